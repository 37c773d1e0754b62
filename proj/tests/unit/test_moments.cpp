#include <algorithm>
#include <random>
#include <set>
#include <string>

#include "doctest.h"
#include "support.hpp"
#include "tracial/moments.hpp"
#include "tracial/rank4.hpp"

using namespace tracial;

namespace {

std::vector<Word> all_words(int length) {
    std::vector<Word> out{""};
    for (int k = 0; k < length; ++k) {
        std::vector<Word> next;
        for (const auto& w : out) {
            next.push_back(w + "X");
            next.push_back(w + "Y");
        }
        out = std::move(next);
    }
    return out;
}

Eigen::MatrixXd random_symmetric(std::mt19937& rng, int n) {
    Eigen::MatrixXd M(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) M(i, j) = testsupport::uniform(rng, -1, 1);
    }
    return (M + M.transpose()) / 2;
}

}  // namespace

TEST_CASE("moments: canonical words are invariant under rotation and reversal") {
    for (int len = 0; len <= 6; ++len) {
        for (const auto& w : all_words(len)) {
            const Word c = canonical_word(w);
            CHECK(canonical_word(c) == c);
            CHECK(canonical_word(star(w)) == c);
            if (!w.empty()) CHECK(canonical_word(w.substr(1) + w.front()) == c);
            CHECK(c <= w);
        }
    }
}

TEST_CASE("moments: canonical classes agree with traces of random symmetric matrices") {
    // Words in one class have equal traces on symmetric pairs; distinct classes
    // generically differ. This classifies words without canonical_word.
    std::mt19937 rng(3);
    const Eigen::MatrixXd A = random_symmetric(rng, 4), B = random_symmetric(rng, 4);
    for (int len = 1; len <= 4; ++len) {
        std::set<long long> trace_classes;
        for (const auto& w : all_words(len)) {
            const double tr = eval_word(A, B, w).trace();
            CHECK(tr == doctest::Approx(eval_word(A, B, canonical_word(w)).trace()).epsilon(1e-12));
            trace_classes.insert(std::llround(tr * 1e9));
        }
        CHECK(trace_classes.size() == canonical_words_of_length(len).size());
    }
    CHECK(canonical_words(4).size() == 16);
    CHECK(canonical_words_of_length(4) == std::vector<Word>{"XXXX", "XXXY", "XXYY", "XYXY", "XYYY", "YYYY"});
}

TEST_CASE("moments: set rejects a conflicting value for the same class") {
    MomentSequence s;
    s.set("XY", 0.5);
    CHECK_NOTHROW(s.set("YX", 0.5));
    CHECK_THROWS(s.set("YX", 0.6));
    s.assign("YX", 0.6);
    CHECK(s.get("XY") == 0.6);
    CHECK(word_from_key(word_key("")) == "");
    CHECK(word_key("") == "1");
}

TEST_CASE("moments: moment matrix entries are traces of U* V") {
    std::mt19937 rng(5);
    const Measure mu = testsupport::relation_measure("REL2", rng, 2, 2);
    const MomentSequence s = moments_from_measure(mu);
    const Eigen::MatrixXd M = moment_matrix(s);
    for (int i = 0; i < 7; ++i) {
        for (int j = 0; j < 7; ++j) {
            double direct = 0.0;
            for (const auto& at : mu.atoms) {
                const Eigen::MatrixXd U = eval_word(at.A, at.B, basis2()[i]);
                const Eigen::MatrixXd V = eval_word(at.A, at.B, basis2()[j]);
                direct += at.density * (U.transpose() * V).trace() / at.size();
            }
            CHECK(M(i, j) == doctest::Approx(direct).epsilon(1e-12));
        }
    }
    CHECK((M - M.transpose()).norm() == 0.0);
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(M).eigenvalues().minCoeff() > -1e-12);
    CHECK(max_abs_diff(sequence_from_matrix(M), s) < 1e-14);
}

TEST_CASE("moments: point and atom moment matrices") {
    const Eigen::MatrixXd P = point_moment_matrix(2.0, -1.0);
    Eigen::VectorXd v(7);
    v << 1, 2, -1, 4, -2, -2, 1;
    CHECK((P - v * v.transpose()).norm() == 0.0);
    const Eigen::MatrixXd A = Eigen::Matrix2d{{1, 0}, {0, -1}}, B = Eigen::Matrix2d{{0, 1}, {1, 0}};
    Measure mu;
    mu.atoms.push_back({A, B, 1.0});
    CHECK((atom_moment_matrix(A, B) - moment_matrix(moments_from_measure(mu))).norm() < 1e-14);
}

TEST_CASE("moments: polynomial arithmetic, star and Riesz functional") {
    const NcPoly x = NcPoly::word("X"), y = NcPoly::word("Y");
    const NcPoly p = x * y - 2.0 * (y * x) + NcPoly::constant(3);
    CHECK(p.degree() == 2);
    const NcPoly ps = p.star();
    CHECK(ps.terms.at("YX") == 1.0);
    CHECK(ps.terms.at("XY") == -2.0);
    const Eigen::VectorXd v = poly_to_vector(p);
    CHECK(v(0) == 3.0);
    CHECK(v(4) == 1.0);
    CHECK(v(5) == -2.0);
    CHECK(vector_to_poly(v).terms == p.terms);
    const MomentSequence s = canonical_rank4_sequence(0.5);
    CHECK(riesz_apply(s, p) == doctest::Approx(3 * s.get("") - s.get("XY")));
}

TEST_CASE("moments: measure type, scaling and classification") {
    Measure mu;
    mu.atoms.push_back(Atom::point(1, 0, 0.5));
    mu.atoms.push_back({Eigen::Matrix2d{{1, 0}, {0, -1}}, Eigen::Matrix2d{{0, 1}, {1, 0}}, 1.5});
    CHECK(mu.type() == std::vector<int>{1, 1});
    CHECK(type_string(mu.type()) == "(1,1)");
    CHECK(mu.total_density() == 2.0);
    const MomentSequence s = moments_from_measure(mu);
    const Classified c = classify_sequence(s);
    CHECK(c.mass == 2.0);
    CHECK(c.nc);
    CHECK(c.seq.normalized());
    CHECK(max_abs_diff(moments_from_measure(mu.scaled(0.5)), c.seq) < 1e-15);
    Measure points;
    points.atoms.push_back(Atom::point(1, 2, 1.0));
    CHECK_FALSE(classify_sequence(moments_from_measure(points)).nc);
}
