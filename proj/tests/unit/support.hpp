#pragma once

#include <cmath>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tracial/linalg.hpp"
#include "tracial/moments.hpp"

namespace testsupport {

// Moment matrices of the four rank-5 families written out entry by entry
// (order 1, X, Y, X^2, XY, YX, Y^2). Used as an oracle independent of the
// word-level bookkeeping in the library.
inline Eigen::MatrixXd bc_matrix(const std::string& bc, double bx, double by, double b2, double b3,
                                 double b4) {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(7, 7);
    auto sym = [&](int i, int j, double v) { M(i, j) = M(j, i) = v; };
    if (bc == "BC1") {
        const double e = b2 - b4;
        sym(0, 0, 1); sym(0, 1, bx); sym(0, 2, by); sym(0, 3, b2); sym(0, 6, 1 - b2);
        sym(1, 1, b2); sym(1, 3, bx);
        sym(2, 2, 1 - b2); sym(2, 6, by);
        sym(3, 3, b4); sym(3, 6, e);
        sym(4, 4, e); sym(4, 5, -e); sym(5, 5, e);
        sym(6, 6, 1 - 2 * b2 + b4);
    } else if (bc == "BC2") {
        sym(0, 0, 1); sym(0, 2, by); sym(0, 3, b2); sym(0, 6, 1);
        sym(1, 1, b2); sym(1, 3, b3);
        sym(2, 2, 1); sym(2, 6, by);
        sym(3, 3, b4); sym(3, 6, b2);
        sym(4, 4, b2); sym(4, 5, -b2); sym(5, 5, b2);
        sym(6, 6, 1);
    } else if (bc == "BC3") {
        const double e = b2 + b4;
        sym(0, 0, 1); sym(0, 1, bx); sym(0, 2, by); sym(0, 3, b2); sym(0, 6, 1 + b2);
        sym(1, 1, b2); sym(1, 3, -bx);
        sym(2, 2, 1 + b2); sym(2, 6, by);
        sym(3, 3, b4); sym(3, 6, e);
        sym(4, 4, e); sym(4, 5, -e); sym(5, 5, e);
        sym(6, 6, 1 + 2 * b2 + b4);
    } else {
        sym(0, 0, 1); sym(0, 1, bx); sym(0, 2, by); sym(0, 3, b2); sym(0, 6, b2);
        sym(1, 1, b2); sym(2, 2, b2);
        sym(3, 3, b4); sym(3, 6, b4);
        sym(4, 4, b4); sym(4, 5, -b4); sym(5, 5, b4);
        sym(6, 6, b4);
    }
    return M;
}

inline tracial::MomentSequence bc_sequence(const std::string& bc, double bx, double by, double b2,
                                           double b3, double b4) {
    return tracial::sequence_from_matrix(bc_matrix(bc, bx, by, b2, b3, b4));
}

// The normalized degree-4 sequence whose moment matrix annihilates every
// given relation, when that sequence is unique; returns false otherwise.
inline bool sequence_from_relations(const std::vector<tracial::NcPoly>& rels,
                                    tracial::MomentSequence& out) {
    using namespace tracial;
    const auto words = canonical_words(4);
    const int n = static_cast<int>(words.size());
    std::map<Word, int> idx;
    for (int i = 0; i < n; ++i) idx[words[i]] = i;
    std::vector<Eigen::VectorXd> rows;
    for (const auto& p : rels) {
        for (const auto& u : basis2()) {
            Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
            for (const auto& [w, c] : p.terms) r(idx[canonical_word(star(u) + w)]) += c;
            rows.push_back(r);
        }
    }
    Eigen::MatrixXd A(rows.size(), n);
    for (size_t i = 0; i < rows.size(); ++i) A.row(i) = rows[i].transpose();
    const Eigen::MatrixXd K = Eigen::FullPivLU<Eigen::MatrixXd>(A).kernel();
    if (K.cols() != 1 || std::abs(K(idx[""], 0)) < 1e-12) return false;
    const Eigen::VectorXd b = K.col(0) / K(idx[""], 0);
    out = MomentSequence(4);
    for (int i = 0; i < n; ++i) out.assign(words[i], b(i));
    return true;
}

inline double uniform(std::mt19937& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Reflections diag(1,-1) and [[0,1],[1,0]] rotated by phi; they anticommute.
inline std::pair<Eigen::Matrix2d, Eigen::Matrix2d> reflection_pair(double phi) {
    Eigen::Matrix2d R;
    R << std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi);
    Eigen::Matrix2d P, Q;
    P << 1, 0, 0, -1;
    Q << 0, 1, 1, 0;
    return {R * P * R.transpose(), R * Q * R.transpose()};
}

// A random 2x2 atom (X, Y) satisfying the rank-6 basic relation.
inline tracial::Atom relation_atom(const std::string& rel, std::mt19937& rng, double density) {
    const auto [P, Q] = reflection_pair(uniform(rng, 0.0, 3.14159));
    const double t = uniform(rng, 0.3, 1.2);
    tracial::Atom a;
    a.density = density;
    if (rel == "REL1") {
        a.A = std::cos(t) * P;
        a.B = std::sin(t) * Q;
    } else if (rel == "REL2") {
        a.A = std::sinh(t) * P;
        a.B = std::cosh(t) * Q;
    } else if (rel == "REL3") {
        a.A = uniform(rng, 0.4, 1.5) * P;
        a.B = uniform(rng, 0.4, 1.5) * Q;
    } else {
        Eigen::Matrix2d S;
        S << uniform(rng, -1, 1), uniform(rng, -1, 1), 0, uniform(rng, -1, 1);
        S(1, 0) = S(0, 1);
        a.A = S;
        a.B = P;
    }
    return a;
}

// A random point of the commutative zero set of the relation.
inline tracial::Atom relation_point(const std::string& rel, std::mt19937& rng, double density) {
    const double t = uniform(rng, -1.4, 1.4);
    const double sgn = uniform(rng, 0, 1) < 0.5 ? -1.0 : 1.0;
    if (rel == "REL1") return tracial::Atom::point(std::cos(2 * t), std::sin(2 * t), density);
    if (rel == "REL2") return tracial::Atom::point(std::sinh(t), sgn * std::cosh(t), density);
    if (rel == "REL3") return sgn > 0 ? tracial::Atom::point(2 * t, 0, density) : tracial::Atom::point(0, 2 * t, density);
    return tracial::Atom::point(1.5 * t, sgn, density);
}

// Normalized measure with the given numbers of points and 2x2 atoms.
inline tracial::Measure relation_measure(const std::string& rel, std::mt19937& rng, int points, int atoms) {
    tracial::Measure mu;
    for (int k = 0; k < points; ++k) mu.atoms.push_back(relation_point(rel, rng, uniform(rng, 0.2, 1.0)));
    for (int k = 0; k < atoms; ++k) mu.atoms.push_back(relation_atom(rel, rng, uniform(rng, 0.2, 1.0)));
    return mu.scaled(1.0 / mu.total_density());
}

// 7x7 matrix from 49 row-major entries.
inline Eigen::MatrixXd m2_matrix(std::initializer_list<double> values) {
    Eigen::MatrixXd M(7, 7);
    auto it = values.begin();
    for (int i = 0; i < 7; ++i)
        for (int j = 0; j < 7; ++j) M(i, j) = *it++;
    return M;
}

// Worked rank-6 examples in canonical form, parametrized by beta_X4.
// REL1 (Y^2 = 1 - X^2), rank 6 for b in (1/4, 1/2).
inline Eigen::MatrixXd rel1_example(double b) {
    return m2_matrix({1, 0, 0, .5, 0, 0, .5,      0, .5, 0, 0, 0, 0, 0,      0, 0, .5, 0, 0, 0, 0,
                      .5, 0, 0, b, 0, 0, .5 - b,  0, 0, 0, 0, .5 - b, 0, 0,  0, 0, 0, 0, 0, .5 - b, 0,
                      .5, 0, 0, .5 - b, 0, 0, b});
}

// REL2 (Y^2 = 1 + X^2).
inline Eigen::MatrixXd rel2_example(double b) {
    return m2_matrix({1, 0, 0, .5, 0, 0, 1.5,      0, .5, 0, 0, 0, 0, 0,
                      0, 0, 1.5, 0, 0, 0, 0,       .5, 0, 0, b, 0, 0, .5 + b,
                      0, 0, 0, 0, .5 + b, 0, 0,    0, 0, 0, 0, 0, .5 + b, 0,
                      1.5, 0, 0, .5 + b, 0, 0, 2 + b});
}

// REL3 (XY + YX = 0).
inline Eigen::MatrixXd rel3_example(double b) {
    return m2_matrix({1, 0, 0, 1, 0, 0, 1,  0, 1, 0, 0, 0, 0, 0,  0, 0, 1, 0, 0, 0, 0,  1, 0, 0, b, 0, 0, 1,
                      0, 0, 0, 0, 1, -1, 0, 0, 0, 0, 0, -1, 1, 0, 1, 0, 0, 1, 0, 0, 2});
}

// REL4 (Y^2 = 1).
inline Eigen::MatrixXd rel4_example(double b) {
    return m2_matrix({1, 0, 0, 1, 0, 0, 1,  0, 1, 0, 0, 0, 0, 0,  0, 0, 1, 0, 0, 0, 0,  1, 0, 0, b, 0, 0, 1,
                      0, 0, 0, 0, 1, 0, 0,  0, 0, 0, 0, 0, 1, 0,  1, 0, 0, 1, 0, 0, 1});
}

// Every atom of mu annihilates every kernel polynomial of M(2) of seq.
inline bool annihilates_kernel(const tracial::Measure& mu, const tracial::MomentSequence& seq,
                               const tracial::ToleranceConfig& cfg, double tol = 1e-7) {
    const tracial::KernelInfo k = tracial::kernel_relations(tracial::build_moment_matrix(seq), cfg);
    for (const auto& atom : mu.atoms) {
        for (const auto& rel : k.relations) {
            if (tracial::eval_poly(atom.A, atom.B, rel.poly).norm() > tol) return false;
        }
    }
    return true;
}

}  // namespace testsupport
