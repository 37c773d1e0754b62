#include <cmath>
#include <random>
#include <string>

#include "doctest.h"
#include "support.hpp"
#include "tracial/generate.hpp"
#include "tracial/transforms.hpp"

using namespace tracial;

namespace {

AffineMap random_map(std::mt19937& rng) {
    for (;;) {
        const AffineMap m =
            AffineMap::general(testsupport::uniform(rng, -2, 2), testsupport::uniform(rng, -2, 2),
                               testsupport::uniform(rng, -2, 2), testsupport::uniform(rng, -2, 2),
                               testsupport::uniform(rng, -2, 2), testsupport::uniform(rng, -2, 2));
        if (std::abs(m.det()) > 0.2) return m;
    }
}

}  // namespace

TEST_CASE("transforms: doubling x scales moments by powers of two") {
    const MomentSequence s = gen_random("REL2", 1).moments;
    const MomentSequence t = apply_affine(s, AffineMap::scale(2, 1));
    for (const auto& w : canonical_words(4)) {
        const auto xs = std::count(w.begin(), w.end(), 'X');
        CHECK(t.get(w) == doctest::Approx(std::pow(2.0, xs) * s.get(w)).epsilon(1e-13));
    }
}

TEST_CASE("transforms: images of sequences agree with images of measures") {
    std::mt19937 rng(21);
    for (const std::string label : {"rank4", "BC2", "REL3"}) {
        const Generated g = gen_random(label, 5);
        TransformChain chain;
        chain.push(random_map(rng));
        chain.push(random_map(rng));
        const MomentSequence direct = apply_chain(g.moments, chain);
        const MomentSequence via_atoms = moments_from_measure(push_forward_measure(g.measure, chain));
        CHECK(max_abs_diff(direct, via_atoms) < 1e-10);
        const Measure back = pull_back_measure(push_forward_measure(g.measure, chain), chain);
        CHECK(max_abs_diff(moments_from_measure(back), g.moments) < 1e-10);
    }
}

TEST_CASE("transforms: invertible maps preserve rank and PSD; inverses round-trip") {
    const ToleranceConfig cfg;
    std::mt19937 rng(22);
    const std::vector<std::string> labels = {"rank4", "BC1", "BC3", "REL1", "REL4"};
    for (int trial = 0; trial < 100; ++trial) {
        const MomentSequence s = gen_random(labels[trial % labels.size()], trial).moments;
        const AffineMap phi = random_map(rng);
        const MomentSequence t = apply_affine(s, phi);
        CHECK(numerical_rank(moment_matrix(t), cfg) == numerical_rank(moment_matrix(s), cfg));
        CHECK(is_psd(moment_matrix(t), cfg).psd);
        const double scale = std::max(1.0, moment_matrix(t).cwiseAbs().maxCoeff());
        CHECK(max_abs_diff(apply_affine(t, phi.inverse()), s) < 1e-9 * scale);
        const AffineMap id = compose(phi.inverse(), phi);
        CHECK(std::abs(id.a) + std::abs(id.b - 1) + std::abs(id.c) + std::abs(id.d) + std::abs(id.e) +
                  std::abs(id.f - 1) <
              1e-10);
    }
}

TEST_CASE("transforms: composition matches sequential application") {
    std::mt19937 rng(23);
    const MomentSequence s = gen_random("BC4", 2).moments;
    const AffineMap f = random_map(rng), g = random_map(rng);
    TransformChain chain;
    chain.push(f);
    chain.push(g);
    CHECK(max_abs_diff(apply_affine(s, chain.composed()), apply_affine(apply_affine(s, f), g)) < 1e-9);
    CHECK(max_abs_diff(apply_affine(s, compose(g, f)), apply_chain(s, chain)) < 1e-9);
}

TEST_CASE("transforms: singular maps are rejected") {
    const MomentSequence s = gen_random("rank4", 0).moments;
    CHECK_THROWS_AS(apply_affine(s, AffineMap::general(0, 1, 2, 0, 2, 4)), std::invalid_argument);
}

TEST_CASE("transforms: reductions land on the canonical relations") {
    const ToleranceConfig cfg;
    std::mt19937 rng(24);
    for (const std::string label : {"rank4", "BC1", "BC2", "BC3", "BC4", "REL1", "REL2", "REL3", "REL4"}) {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            TransformChain scramble;
            scramble.push(random_map(rng));
            const MomentSequence s = apply_chain(gen_random(label, seed).moments, scramble);
            const int rank = numerical_rank(moment_matrix(s), cfg);
            const Reduction red =
                rank == 4 ? reduce_rank4(s, cfg) : rank == 5 ? reduce_rank5(s, cfg) : reduce_rank6(s, cfg);
            INFO(label << " seed " << seed << " -> " << red.target);
            CHECK(max_abs_diff(apply_chain(s, red.chain), red.canonical) < 1e-8);
            CHECK(red.canonical.get("") == doctest::Approx(1.0));
            const Eigen::MatrixXd M = moment_matrix(red.canonical);
            for (const auto& v : canonical_kernel(red.target, red.param)) {
                CHECK(relation_residual(M, v) < 1e-7);
            }
            if (label.rfind("REL", 0) == 0) CHECK(red.target == label);
            if (label == "rank4") CHECK(red.target == "rank4");
        }
    }
}
