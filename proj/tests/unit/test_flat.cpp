#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "support.hpp"
#include "tracial/flat.hpp"

using namespace tracial;
using testsupport::rel1_example;
using testsupport::rel3_example;
using testsupport::rel4_example;

namespace {

const std::vector<std::string> kRelations = {"REL1", "REL2", "REL3", "REL4"};

// Degree-6 block of a moment sequence, rows and columns over basis3().
Eigen::MatrixXd c3_from_sequence(const MomentSequence& seq) {
    const auto& b = basis3();
    Eigen::MatrixXd C(8, 8);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) C(i, j) = seq.get(star(b[i]) + b[j]);
    return C;
}

FlatParams params_of(const std::string& rel, const MomentSequence& seq) {
    FlatParams p;
    p.p = seq.get("XXXXX");
    p.q = rel == "REL3" ? seq.get("YYYYY") : seq.get("XXXXY");
    p.r = seq.get("XXYXY");
    return p;
}

// Measure of rank 6: two points and one 2x2 atom on the relation.
Measure flat_measure(const std::string& rel, std::mt19937& rng) {
    return testsupport::relation_measure(rel, rng, 2, 1);
}

}  // namespace

TEST_CASE("flat: parameter counts and relation shapes") {
    CHECK(flat_param_count("REL1") == 2);
    CHECK(flat_param_count("REL3") == 2);
    CHECK(flat_param_count("REL4") == 3);
    CHECK(flat_relation_shape("REL1") == "Y2=1-X2");
    CHECK(flat_relation_shape("REL4") == "Y2=1");
    CHECK_THROWS_AS(flat_param_count("REL9"), std::invalid_argument);
}

TEST_CASE("flat: degree-5 moments agree with measures on the relation") {
    std::mt19937 rng(11);
    for (const auto& rel : kRelations) {
        for (int trial = 0; trial < 10; ++trial) {
            const Measure mu = testsupport::relation_measure(rel, rng, 3, 2);
            const MomentSequence full = moments_from_measure(mu, 5);
            const MomentSequence low = full.truncated(4);
            const MomentSequence got = degree5_moments(rel, low, params_of(rel, full));
            INFO(rel << " trial " << trial);
            CHECK(max_abs_diff(got, full) < 1e-10);
            for (const auto& w : canonical_words_of_length(5)) CHECK(got.has(w));
        }
    }
}

TEST_CASE("flat: REL1 with p equal to beta_X3 gives a vanishing X3Y2 moment") {
    std::mt19937 rng(3);
    const MomentSequence seq = moments_from_measure(testsupport::relation_measure("REL1", rng, 3, 2));
    const MomentSequence s5 = degree5_moments("REL1", seq, {seq.get("XXX"), 0.2, 0.0});
    CHECK(std::abs(s5.get("XXXYY")) < 1e-14);
    CHECK(std::abs(s5.get("XXYXY")) < 1e-14);
}

TEST_CASE("flat: REL4 block row X^2 has the expected layout") {
    const MomentSequence seq = sequence_from_matrix(rel4_example(1.5));
    const double p = 0.3, q = -0.4, r = 0.7;
    const Eigen::MatrixXd B3 = build_B3("REL4", seq, {p, q, r});
    REQUIRE(B3.rows() == 7);
    REQUIRE(B3.cols() == 8);
    const double x3 = seq.get("XXX"), x2y = seq.get("XXY");
    Eigen::VectorXd expected(8);
    expected << p, q, q, x3, q, r, x3, x2y;
    CHECK((B3.row(3).transpose() - expected).norm() < 1e-14);
}

TEST_CASE("flat: relation mismatch is rejected") {
    const MomentSequence seq = sequence_from_matrix(rel4_example(1.5));
    CHECK_THROWS_AS(build_B3("REL1", seq, {}), std::invalid_argument);
    CHECK_THROWS_AS(build_B3("REL3", seq, {}), std::invalid_argument);
    CHECK_NOTHROW(build_B3("REL4", seq, {}));
}

TEST_CASE("flat: zero block gives zero C3") {
    const Eigen::MatrixXd M2 = rel3_example(2.0);
    const Eigen::MatrixXd C3 = compute_C3("REL3", M2, Eigen::MatrixXd::Zero(7, 8));
    CHECK(C3.norm() == doctest::Approx(0.0));
}

TEST_CASE("flat: C3 does not depend on the choice of solution W") {
    std::mt19937 rng(5);
    for (const auto& rel : kRelations) {
        for (int trial = 0; trial < 10; ++trial) {
            const MomentSequence seq = moments_from_measure(testsupport::relation_measure(rel, rng, 3, 2));
            const Eigen::MatrixXd M2 = moment_matrix(seq);
            const FlatParams prm{testsupport::uniform(rng, -1, 1), testsupport::uniform(rng, -1, 1),
                                 testsupport::uniform(rng, -1, 1)};
            const Eigen::MatrixXd B3 = build_B3(rel, seq, prm);
            const Eigen::MatrixXd C3 = compute_C3(rel, M2, B3);
            // Full 7x7 minimum-norm solve, plus an arbitrary kernel component.
            Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(M2);
            cod.setThreshold(1e-10);
            Eigen::MatrixXd W = cod.solve(B3);
            const Eigen::VectorXd k = relation_vector(flat_relation_shape(rel));
            W += k * Eigen::RowVectorXd::Random(8);
            const Eigen::MatrixXd C3w = W.transpose() * M2 * W;
            INFO(rel << " trial " << trial);
            CHECK((C3 - C3w).norm() < 1e-8 * (1 + C3.norm()));
        }
    }
}

TEST_CASE("flat: C3 equals the degree-6 block of a rank-6 measure") {
    std::mt19937 rng(17);
    ToleranceConfig cfg;
    for (const auto& rel : kRelations) {
        for (int trial = 0; trial < 10; ++trial) {
            const Measure mu = flat_measure(rel, rng);
            const MomentSequence full = moments_from_measure(mu, 6);
            const MomentSequence seq = full.truncated(4);
            const Eigen::MatrixXd M2 = moment_matrix(seq);
            REQUIRE(numerical_rank(M2, cfg) == 6);
            const Eigen::MatrixXd B3 = build_B3(rel, seq, params_of(rel, full));
            const Eigen::MatrixXd C3 = compute_C3(rel, M2, B3);
            INFO(rel << " trial " << trial);
            CHECK((C3 - c3_from_sequence(full)).norm() < 1e-8);
            CHECK(hankel_residuals(rel, C3, seq).max_abs() < 1e-8);
            CHECK(moment_structure_residuals(C3).max_abs() < 1e-8);
        }
    }
}

TEST_CASE("flat: automatic identities hold for arbitrary parameters") {
    std::mt19937 rng(23);
    for (const auto& rel : kRelations) {
        for (int trial = 0; trial < 20; ++trial) {
            const MomentSequence seq = moments_from_measure(testsupport::relation_measure(rel, rng, 3, 2));
            const FlatParams prm{testsupport::uniform(rng, -2, 2), testsupport::uniform(rng, -2, 2),
                                 testsupport::uniform(rng, -2, 2)};
            const Eigen::MatrixXd C3 = compute_C3(rel, moment_matrix(seq), build_B3(rel, seq, prm));
            INFO(rel << " trial " << trial);
            CHECK(automatic_identities(C3).max_abs() < 1e-9 * (1 + C3.norm()));
        }
    }
}

TEST_CASE("flat: REL1 example has the stated Hankel gap") {
    for (double b : {0.3, 0.45}) {
        const Eigen::MatrixXd M2 = rel1_example(b);
        const MomentSequence seq = sequence_from_matrix(M2);
        const double gap = 0.5 * (1 - 2 * b) * (1 - 2 * b);
        for (const FlatParams prm : {FlatParams{0.3, -0.2}, FlatParams{-1, 1}, FlatParams{0, 0}}) {
            const Eigen::MatrixXd C3 = compute_C3("REL1", M2, build_B3("REL1", seq, prm));
            CHECK(C3(3, 6) - C3(5, 5) == doctest::Approx(gap).epsilon(1e-9));
        }
        const FlatResult r = flat_search("REL1", seq);
        CHECK_FALSE(r.found);
        CHECK(r.min_residual >= gap * gap * (1 - 1e-6));
    }
}

TEST_CASE("flat: REL2 example has gap 4.5") {
    const double b = 1.0;
    const Eigen::MatrixXd M2 = testsupport::rel2_example(b);
    const MomentSequence seq = sequence_from_matrix(M2);
    const Eigen::MatrixXd C3 = compute_C3("REL2", M2, build_B3("REL2", seq, {0.1, 0.7}));
    CHECK(C3(3, 6) - C3(5, 5) == doctest::Approx(4.5));
    CHECK_FALSE(flat_search("REL2", seq).found);
}

TEST_CASE("flat: REL3 example matches the closed-form C3") {
    for (double b : {1.5, 2.0, 3.0}) {
        const Eigen::MatrixXd M2 = rel3_example(b);
        const MomentSequence seq = sequence_from_matrix(M2);
        for (const FlatParams prm : {FlatParams{0.4, 0.7}, FlatParams{-0.3, 1.1}}) {
            const double p = prm.p, q = prm.q;
            const Eigen::MatrixXd C3 = compute_C3("REL3", M2, build_B3("REL3", seq, prm));
            INFO("b " << b << " p " << p << " q " << q);
            CHECK(C3(0, 0) == doctest::Approx(p * p / (b - 1) + b * b));
            CHECK(C3(7, 7) == doctest::Approx(q * q + 4));
            CHECK(C3(0, 5) == doctest::Approx(-b));
            CHECK(C3(1, 2) == doctest::Approx(-1));
            CHECK(C3(0, 1) == doctest::Approx(0).epsilon(1e-12));
            // The fixed entries -b and -1 contradict C16 = C23, so no flat extension.
            const HankelResidual h = hankel_residuals("REL3", C3, seq);
            CHECK(h.max_abs() >= b - 1 - 1e-9);
        }
        CHECK_FALSE(flat_search("REL3", seq).found);
    }
}

TEST_CASE("flat: REL4 example is flat only at beta_X4 = 3/2") {
    {
        const MomentSequence seq = sequence_from_matrix(rel4_example(1.5));
        const FlatResult r = flat_search("REL4", seq);
        REQUIRE(r.found);
        CHECK(std::abs(r.params.q) < 1e-6);
        CHECK(r.params.p * r.params.p == doctest::Approx(0.125).epsilon(1e-6));
        CHECK(r.params.r * r.params.r == doctest::Approx(0.5).epsilon(1e-6));
        CHECK(r.m3_psd);
        CHECK(r.m3_rank == 6);
        CHECK(r.m2_rank == 6);
        CHECK(moment_structure_residuals(r.C3).max_abs() < 1e-8);
        // The relation Y^2 = 1 propagates to the new columns of M3.
        const auto idx = [](const std::string& w, bool deg3) {
            const auto& b = deg3 ? basis3() : basis2();
            for (int i = 0; i < static_cast<int>(b.size()); ++i)
                if (b[i] == w) return deg3 ? 7 + i : i;
            return -1;
        };
        CHECK((r.M3.col(idx("XYY", true)) - r.M3.col(idx("X", false))).norm() < 1e-7);
        CHECK((r.M3.col(idx("YYX", true)) - r.M3.col(idx("X", false))).norm() < 1e-7);
        CHECK((r.M3.col(idx("YYY", true)) - r.M3.col(idx("Y", false))).norm() < 1e-7);
    }
    for (double b : {1.2, 1.8}) {
        const FlatResult r = flat_search("REL4", sequence_from_matrix(rel4_example(b)));
        CHECK_FALSE(r.found);
        CHECK(r.min_residual > 1e-6);
    }
}

TEST_CASE("flat: search recovers flat extensions of rank-6 measures") {
    std::mt19937 rng(29);
    for (const auto& rel : kRelations) {
        int found = 0;
        const int trials = 8;
        for (int trial = 0; trial < trials; ++trial) {
            const Measure mu = flat_measure(rel, rng);
            const MomentSequence seq = moments_from_measure(mu, 4);
            const FlatResult r = flat_search(rel, seq);
            if (r.found) ++found;
            INFO(rel << " trial " << trial << " min " << r.min_residual);
            if (r.found) {
                CHECK(r.m3_psd);
                CHECK(r.m3_rank == 6);
            }
        }
        INFO(rel << " found " << found);
        CHECK(found == trials);
    }
}
