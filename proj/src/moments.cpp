#include "tracial/moments.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace tracial {

Word star(const Word& w) { return Word(w.rbegin(), w.rend()); }

Word canonical_word(const Word& w) {
    for (char ch : w) {
        if (ch != 'X' && ch != 'Y') {
            throw std::invalid_argument("word '" + w + "' has letters outside {X,Y}");
        }
    }
    if (w.size() < 2) return w;
    Word best = w;
    const Word r = star(w);
    const std::size_t n = w.size();
    for (std::size_t k = 0; k < n; ++k) {
        Word a = w.substr(k) + w.substr(0, k);
        Word b = r.substr(k) + r.substr(0, k);
        if (a < best) best = a;
        if (b < best) best = b;
    }
    return best;
}

std::vector<Word> canonical_words_of_length(int length) {
    std::set<Word> seen;
    const int total = 1 << length;
    for (int mask = 0; mask < total; ++mask) {
        Word w(length, 'X');
        for (int i = 0; i < length; ++i) {
            if (mask & (1 << (length - 1 - i))) w[i] = 'Y';
        }
        seen.insert(canonical_word(w));
    }
    return {seen.begin(), seen.end()};
}

std::vector<Word> canonical_words(int degree) {
    std::vector<Word> out;
    for (int d = 0; d <= degree; ++d) {
        auto ws = canonical_words_of_length(d);
        out.insert(out.end(), ws.begin(), ws.end());
    }
    return out;
}

std::string word_key(const Word& w) { return w.empty() ? "1" : w; }

Word word_from_key(const std::string& key) { return key == "1" ? Word() : key; }

// ---------------------------------------------------------------- NcPoly

NcPoly NcPoly::constant(double c) { return word(Word(), c); }

NcPoly NcPoly::word(const Word& w, double c) {
    NcPoly p;
    p.terms[w] = c;
    return p;
}

NcPoly NcPoly::affine(double a, double b, double c) {
    NcPoly p;
    if (a != 0.0) p.terms[""] = a;
    if (b != 0.0) p.terms["X"] = b;
    if (c != 0.0) p.terms["Y"] = c;
    return p;
}

int NcPoly::degree() const {
    int d = 0;
    for (const auto& [w, c] : terms) {
        if (c != 0.0) d = std::max(d, static_cast<int>(w.size()));
    }
    return d;
}

NcPoly NcPoly::star() const {
    NcPoly p;
    for (const auto& [w, c] : terms) p.terms[tracial::star(w)] += c;
    return p;
}

NcPoly& NcPoly::operator+=(const NcPoly& o) {
    for (const auto& [w, c] : o.terms) terms[w] += c;
    return *this;
}

NcPoly& NcPoly::operator*=(double s) {
    for (auto& [w, c] : terms) c *= s;
    return *this;
}

void NcPoly::prune(double eps) {
    for (auto it = terms.begin(); it != terms.end();) {
        if (std::abs(it->second) <= eps) {
            it = terms.erase(it);
        } else {
            ++it;
        }
    }
}

NcPoly operator+(NcPoly a, const NcPoly& b) { return a += b; }

NcPoly operator-(NcPoly a, const NcPoly& b) {
    for (const auto& [w, c] : b.terms) a.terms[w] -= c;
    return a;
}

NcPoly operator*(const NcPoly& a, const NcPoly& b) {
    NcPoly p;
    for (const auto& [u, cu] : a.terms) {
        if (cu == 0.0) continue;
        for (const auto& [v, cv] : b.terms) {
            if (cv == 0.0) continue;
            p.terms[u + v] += cu * cv;
        }
    }
    return p;
}

NcPoly operator*(double s, NcPoly a) { return a *= s; }

// -------------------------------------------------------- MomentSequence

MomentSequence::MomentSequence(int degree) : degree_(degree) {
    if (degree < 0) throw std::invalid_argument("negative sequence degree");
}

bool MomentSequence::has(const Word& w) const { return entries_.count(canonical_word(w)) > 0; }

double MomentSequence::get(const Word& w) const {
    const Word c = canonical_word(w);
    auto it = entries_.find(c);
    if (it == entries_.end()) {
        throw std::out_of_range("missing moment for word " + word_key(c));
    }
    return it->second;
}

void MomentSequence::set(const Word& w, double value) {
    if (static_cast<int>(w.size()) > degree_) {
        throw std::invalid_argument("word " + word_key(w) + " exceeds sequence degree");
    }
    const Word c = canonical_word(w);
    auto it = entries_.find(c);
    if (it != entries_.end() && it->second != value) {
        std::ostringstream os;
        os << "conflicting values for equivalent words in class " << word_key(c) << ": "
           << it->second << " vs " << value;
        throw std::invalid_argument(os.str());
    }
    entries_[c] = value;
}

void MomentSequence::assign(const Word& w, double value) {
    if (static_cast<int>(w.size()) > degree_) {
        throw std::invalid_argument("word " + word_key(w) + " exceeds sequence degree");
    }
    entries_[canonical_word(w)] = value;
}

bool MomentSequence::complete() const {
    for (const auto& w : canonical_words(degree_)) {
        if (!entries_.count(w)) return false;
    }
    return true;
}

bool MomentSequence::normalized(double tol) const {
    auto it = entries_.find("");
    return it != entries_.end() && std::abs(it->second - 1.0) <= tol;
}

MomentSequence MomentSequence::scaled(double s) const {
    MomentSequence out(degree_);
    for (const auto& [w, v] : entries_) out.entries_[w] = v * s;
    return out;
}

MomentSequence MomentSequence::truncated(int d) const {
    MomentSequence out(std::min(d, degree_));
    for (const auto& [w, v] : entries_) {
        if (static_cast<int>(w.size()) <= d) out.entries_[w] = v;
    }
    return out;
}

double max_abs_diff(const MomentSequence& a, const MomentSequence& b) {
    double m = 0.0;
    for (const auto& [w, v] : a.entries()) {
        auto it = b.entries().find(w);
        if (it != b.entries().end()) m = std::max(m, std::abs(v - it->second));
    }
    return m;
}

double riesz_apply(const MomentSequence& seq, const NcPoly& p) {
    double s = 0.0;
    for (const auto& [w, c] : p.terms) {
        if (c == 0.0) continue;
        if (static_cast<int>(w.size()) > seq.degree()) {
            throw std::invalid_argument("polynomial degree exceeds sequence degree");
        }
        s += c * seq.get(w);
    }
    return s;
}

// ------------------------------------------------------- moment matrices

const std::vector<Word>& basis2() {
    static const std::vector<Word> b{"", "X", "Y", "XX", "XY", "YX", "YY"};
    return b;
}

const std::vector<Word>& basis3() {
    static const std::vector<Word> b{"XXX", "XXY", "XYX", "XYY", "YXX", "YXY", "YYX", "YYY"};
    return b;
}

MomentMatrix build_moment_matrix(const MomentSequence& seq) {
    if (seq.degree() < 4) throw std::invalid_argument("moment matrix needs a degree-4 sequence");
    MomentMatrix m;
    m.basis = basis2();
    m.data = moment_matrix(seq);
    return m;
}

Eigen::MatrixXd moment_matrix(const MomentSequence& seq) {
    const auto& b = basis2();
    Eigen::MatrixXd M(7, 7);
    for (int i = 0; i < 7; ++i) {
        for (int j = i; j < 7; ++j) {
            M(i, j) = seq.get(star(b[i]) + b[j]);
            M(j, i) = M(i, j);
        }
    }
    return M;
}

MomentSequence sequence_from_matrix(const Eigen::MatrixXd& M) {
    if (M.rows() != 7 || M.cols() != 7) throw std::invalid_argument("expected a 7x7 moment matrix");
    const auto& b = basis2();
    std::map<Word, std::pair<double, int>> acc;
    for (int i = 0; i < 7; ++i) {
        for (int j = 0; j < 7; ++j) {
            auto& slot = acc[canonical_word(star(b[i]) + b[j])];
            slot.first += M(i, j);
            slot.second += 1;
        }
    }
    MomentSequence seq(4);
    for (const auto& [w, s] : acc) seq.assign(w, s.first / s.second);
    return seq;
}

Eigen::VectorXd poly_to_vector(const NcPoly& p) {
    const auto& b = basis2();
    Eigen::VectorXd v = Eigen::VectorXd::Zero(7);
    for (const auto& [w, c] : p.terms) {
        auto it = std::find(b.begin(), b.end(), w);
        if (it == b.end()) {
            if (c != 0.0) throw std::invalid_argument("polynomial has terms above degree 2");
            continue;
        }
        v(it - b.begin()) += c;
    }
    return v;
}

NcPoly vector_to_poly(const Eigen::VectorXd& v, double eps) {
    NcPoly p;
    for (int i = 0; i < 7; ++i) {
        if (std::abs(v(i)) > eps) p.terms[basis2()[i]] = v(i);
    }
    return p;
}

// --------------------------------------------------------------- measures

Atom Atom::point(double x, double y, double density) {
    Atom a;
    a.A = Eigen::MatrixXd::Constant(1, 1, x);
    a.B = Eigen::MatrixXd::Constant(1, 1, y);
    a.density = density;
    return a;
}

std::vector<int> Measure::type() const {
    std::vector<int> t;
    for (const auto& a : atoms) {
        const int s = a.size();
        if (static_cast<int>(t.size()) < s) t.resize(s, 0);
        t[s - 1] += 1;
    }
    while (!t.empty() && t.back() == 0) t.pop_back();
    return t;
}

double Measure::total_density() const {
    double s = 0.0;
    for (const auto& a : atoms) s += a.density;
    return s;
}

Measure Measure::scaled(double s) const {
    Measure m = *this;
    for (auto& a : m.atoms) a.density *= s;
    return m;
}

void Measure::append(const Measure& o) { atoms.insert(atoms.end(), o.atoms.begin(), o.atoms.end()); }

std::string type_string(const std::vector<int>& t) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (i) os << ",";
        os << t[i];
    }
    os << ")";
    return os.str();
}

Eigen::MatrixXd eval_word(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Word& w) {
    Eigen::MatrixXd P = Eigen::MatrixXd::Identity(A.rows(), A.cols());
    for (char ch : w) P = P * (ch == 'X' ? A : B);
    return P;
}

Eigen::MatrixXd eval_poly(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const NcPoly& p) {
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(A.rows(), A.cols());
    for (const auto& [w, c] : p.terms) S += c * eval_word(A, B, w);
    return S;
}

MomentSequence moments_from_measure(const Measure& mu, int degree) {
    MomentSequence seq(degree);
    for (const auto& w : canonical_words(degree)) {
        double s = 0.0;
        for (const auto& a : mu.atoms) {
            s += a.density * eval_word(a.A, a.B, w).trace() / a.size();
        }
        seq.assign(w, s);
    }
    return seq;
}

Eigen::MatrixXd point_moment_matrix(double x, double y) {
    Eigen::VectorXd v(7);
    v << 1.0, x, y, x * x, x * y, y * x, y * y;
    return v * v.transpose();
}

Eigen::MatrixXd atom_moment_matrix(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    Measure m;
    Atom a;
    a.A = A;
    a.B = B;
    a.density = 1.0;
    m.atoms.push_back(a);
    return moment_matrix(moments_from_measure(m, 4));
}

Classified classify_sequence(const MomentSequence& seq, double tol) {
    const double b1 = seq.get("");
    if (!(b1 > 0.0)) throw std::invalid_argument("beta_1 must be positive");
    Classified c;
    c.mass = b1;
    c.seq = seq.scaled(1.0 / b1);
    c.nc = std::abs(c.seq.get("XXYY") - c.seq.get("XYXY")) > tol;
    return c;
}

}  // namespace tracial
