#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tracial {

// Words over {X,Y}. The empty string is the unit word 1.
using Word = std::string;

// Lex-min representative over all rotations of w and of its reverse.
Word canonical_word(const Word& w);

// Word reversal (the involution w -> w*).
Word star(const Word& w);

// All canonical words of length <= degree, shortest first, then lexicographic.
std::vector<Word> canonical_words(int degree);

// Canonical words of exactly the given length.
std::vector<Word> canonical_words_of_length(int length);

// Key used in JSON for a word ("1" for the empty word).
std::string word_key(const Word& w);
Word word_from_key(const std::string& key);

// Noncommutative polynomial with real coefficients, stored word -> coefficient.
struct NcPoly {
    std::map<Word, double> terms;

    NcPoly() = default;
    static NcPoly constant(double c);
    static NcPoly word(const Word& w, double c = 1.0);
    // a*1 + b*X + c*Y
    static NcPoly affine(double a, double b, double c);

    int degree() const;
    NcPoly star() const;
    NcPoly& operator+=(const NcPoly& o);
    NcPoly& operator*=(double s);
    void prune(double eps = 0.0);
};

NcPoly operator+(NcPoly a, const NcPoly& b);
NcPoly operator-(NcPoly a, const NcPoly& b);
NcPoly operator*(const NcPoly& a, const NcPoly& b);
NcPoly operator*(double s, NcPoly a);

// Canonical moment sequence: one value per cyclic/reversal class of words.
class MomentSequence {
public:
    explicit MomentSequence(int degree = 4);

    int degree() const { return degree_; }
    bool has(const Word& w) const;
    double get(const Word& w) const;
    double operator()(const Word& w) const { return get(w); }
    // Stores under the canonical class of w. Throws if a different value was
    // already stored for the same class.
    void set(const Word& w, double value);
    // Stores under the canonical class of w, replacing any previous value.
    void assign(const Word& w, double value);
    const std::map<Word, double>& entries() const { return entries_; }
    // True iff every canonical word of length <= degree has a value.
    bool complete() const;
    bool normalized(double tol = 1e-12) const;
    MomentSequence scaled(double s) const;
    // Copy restricted to words of length <= d.
    MomentSequence truncated(int d) const;

private:
    int degree_;
    std::map<Word, double> entries_;
};

// Max over canonical words of |a_w - b_w| on the words present in both.
double max_abs_diff(const MomentSequence& a, const MomentSequence& b);

// Riesz functional: sum of a_w * beta_w.
double riesz_apply(const MomentSequence& seq, const NcPoly& p);

// Degree-2 word basis {1,X,Y,X^2,XY,YX,Y^2}.
const std::vector<Word>& basis2();
// Degree-3 extension columns {X^3,X^2Y,XYX,XY^2,YX^2,YXY,Y^2X,Y^3}.
const std::vector<Word>& basis3();

struct MomentMatrix {
    std::vector<Word> basis;
    Eigen::MatrixXd data;
};

// 7x7 matrix with entry (U,V) = beta_{U* V}.
MomentMatrix build_moment_matrix(const MomentSequence& seq);
Eigen::MatrixXd moment_matrix(const MomentSequence& seq);

// Reads a degree-4 sequence back from a 7x7 moment matrix.
MomentSequence sequence_from_matrix(const Eigen::MatrixXd& M);

// Coefficient vector of a degree <= 2 polynomial over basis2().
Eigen::VectorXd poly_to_vector(const NcPoly& p);
NcPoly vector_to_poly(const Eigen::VectorXd& v, double eps = 0.0);

struct Atom {
    Eigen::MatrixXd A;
    Eigen::MatrixXd B;
    double density = 0.0;

    int size() const { return static_cast<int>(A.rows()); }
    static Atom point(double x, double y, double density);
};

struct Measure {
    std::vector<Atom> atoms;

    // (m_1, ..., m_r): number of atoms of each size, trailing zeros dropped.
    std::vector<int> type() const;
    double total_density() const;
    Measure scaled(double s) const;
    void append(const Measure& o);
};

std::string type_string(const std::vector<int>& t);

// Evaluates a word / polynomial at a matrix pair.
Eigen::MatrixXd eval_word(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Word& w);
Eigen::MatrixXd eval_poly(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const NcPoly& p);

// beta_w = sum lambda_i * tr(w(A_i,B_i)) / t_i for every canonical word up to degree.
MomentSequence moments_from_measure(const Measure& mu, int degree = 4);

// Moment matrix of a single point (x,y): v v^T with v = (1,x,y,x^2,xy,yx,y^2).
Eigen::MatrixXd point_moment_matrix(double x, double y);
// Moment matrix of a single atom with unit density.
Eigen::MatrixXd atom_moment_matrix(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

struct Classified {
    MomentSequence seq;
    double mass = 1.0;
    bool nc = true;
};

// Divides by beta_1 and flags nc iff |beta_{XXYY} - beta_{XYXY}| > tol.
Classified classify_sequence(const MomentSequence& seq, double tol = 1e-8);

}  // namespace tracial
