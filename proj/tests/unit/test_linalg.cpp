#include <cmath>
#include <random>

#include "doctest.h"
#include "support.hpp"
#include "tracial/linalg.hpp"

using namespace tracial;

namespace {

// Random PSD matrix of the given rank with eigenvalues in [0.5, 2].
Eigen::MatrixXd random_psd(std::mt19937& rng, int n, int rank) {
    Eigen::MatrixXd G(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) G(i, j) = testsupport::uniform(rng, -1, 1);
    }
    const Eigen::MatrixXd Q = Eigen::HouseholderQR<Eigen::MatrixXd>(G).householderQ();
    Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < rank; ++i) d(i) = testsupport::uniform(rng, 0.5, 2.0);
    return Q * d.asDiagonal() * Q.transpose();
}

}  // namespace

TEST_CASE("linalg: numerical rank and PSD of planted spectra") {
    const ToleranceConfig cfg;
    std::mt19937 rng(11);
    for (int rank = 0; rank <= 7; ++rank) {
        const Eigen::MatrixXd M = random_psd(rng, 7, rank);
        CHECK(numerical_rank(M, cfg) == rank);
        CHECK(is_psd(M, cfg).psd);
        if (rank > 0) CHECK_FALSE(rank_info(M, cfg).borderline);
    }
    Eigen::MatrixXd indefinite = random_psd(rng, 7, 6);
    indefinite(0, 0) -= 3.0;
    CHECK_FALSE(is_psd(indefinite, cfg).psd);
    CHECK(is_psd(indefinite, cfg).margin < 0);
}

TEST_CASE("linalg: a rank cut between close eigenvalues is flagged borderline") {
    Eigen::VectorXd d(3);
    d << 1.0, 3e-9, 0.0;
    const RankInfo info = rank_info(Eigen::MatrixXd(d.asDiagonal()), {});
    CHECK(info.borderline);
}

TEST_CASE("linalg: kernel of points on the unit circle is X^2 + Y^2 = 1") {
    Measure mu;
    for (double t : {0.1, 1.3, 2.2, 3.9, 5.1}) mu.atoms.push_back(Atom::point(std::cos(t), std::sin(t), 0.2));
    const MomentSequence s = moments_from_measure(mu);
    const KernelInfo k = kernel_relations(build_moment_matrix(s), {});
    // Commutative data adds XY - YX to the circle relation.
    REQUIRE(k.relations.size() == 2);
    const Eigen::MatrixXd M = moment_matrix(s);
    CHECK(relation_residual(M, relation_vector("X2+Y2=1")) < 1e-12);
    CHECK(relation_residual(M, relation_vector("Y2=1")) > 1e-3);
    for (const auto& r : k.relations) CHECK((M * r.coeffs).norm() < 1e-10);
}

TEST_CASE("linalg: span fits and greedy bases") {
    const ToleranceConfig cfg;
    std::mt19937 rng(4);
    const Measure mu = testsupport::relation_measure("REL3", rng, 3, 2);
    const Eigen::MatrixXd M = moment_matrix(moments_from_measure(mu));
    const std::vector<int> basis = greedy_basis(M, {0, 1, 2, 3, 4, 5, 6}, cfg);
    CHECK(static_cast<int>(basis.size()) == numerical_rank(M, cfg));
    for (int col = 0; col < 7; ++col) {
        const SpanFit fit = express_in_span(M, col, basis, cfg);
        CHECK(fit.in_span);
        Eigen::VectorXd rebuilt = Eigen::VectorXd::Zero(7);
        for (size_t i = 0; i < basis.size(); ++i) rebuilt += fit.coeffs(i) * M.col(basis[i]);
        CHECK((rebuilt - M.col(col)).norm() < 1e-8);
    }
    Eigen::MatrixXd pd = Eigen::MatrixXd::Identity(7, 7);
    CHECK_FALSE(express_in_span(pd, 6, {0, 1, 2}, cfg).in_span);
}

TEST_CASE("linalg: rank-drop alpha recovers a planted point mass") {
    const ToleranceConfig cfg;
    std::mt19937 rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        const Measure rest = testsupport::relation_measure("REL1", rng, 2, 1);
        const double x = testsupport::uniform(rng, -2, 2), y = testsupport::uniform(rng, -2, 2);
        const double w = testsupport::uniform(rng, 0.1, 1.0);
        const Eigen::MatrixXd D = point_moment_matrix(x, y);
        const Eigen::MatrixXd M = moment_matrix(moments_from_measure(rest)) + w * D;
        const AlphaDrop drop = smallest_rank_drop_alpha(M, D, cfg);
        REQUIRE(drop.ok);
        // The point is off the support of `rest`, so all of w can be removed.
        CHECK(drop.alpha == doctest::Approx(w).epsilon(1e-7));
        CHECK(drop.rank_after == drop.rank_before - 1);
        CHECK(rank_drop_alpha_generalized(M, D, cfg) == doctest::Approx(w).epsilon(1e-7));
    }
}
