#include <cmath>
#include <random>
#include <string>

#include "doctest.h"
#include "support.hpp"
#include "tracial/generate.hpp"
#include "tracial/pipeline.hpp"
#include "tracial/rank4.hpp"

using namespace tracial;

namespace {

AffineMap random_map(std::mt19937& rng) {
    for (;;) {
        const AffineMap m = AffineMap::general(testsupport::uniform(rng, -1, 1), testsupport::uniform(rng, 0.5, 1.5),
                                               testsupport::uniform(rng, -0.5, 0.5), testsupport::uniform(rng, -1, 1),
                                               testsupport::uniform(rng, -0.5, 0.5), testsupport::uniform(rng, 0.5, 1.5));
        if (std::abs(m.det()) > 0.3) return m;
    }
}

void check_constructed(const SolveReport& rep, const MomentSequence& seq, const ToleranceConfig& cfg) {
    REQUIRE(rep.verdict == Verdict::Exists);
    REQUIRE(rep.measure_constructed);
    CHECK(rep.reconstruction_error <= cfg.match_tol);
    CHECK(max_abs_diff(moments_from_measure(rep.measure), seq) <= cfg.match_tol * seq.get(""));
    CHECK(rep.kernel_residual <= 1e-7);
}

}  // namespace

TEST_CASE("pipeline: generated instances with complete criteria are represented") {
    const ToleranceConfig cfg;
    for (const std::string label : {"rank4", "BC1", "BC2", "BC3", "BC4", "REL1-sym", "REL3-sym"}) {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const Generated g = gen_random(label, seed);
            const SolveReport rep = solve_pipeline(g.moments, cfg);
            INFO(label << " seed " << seed);
            check_constructed(rep, g.moments, cfg);
            CHECK(rep.nc);
        }
    }
}

TEST_CASE("pipeline: affine images and scaled masses are represented") {
    const ToleranceConfig cfg;
    std::mt19937 rng(17);
    for (const std::string label : {"rank4", "BC1", "BC2", "BC3", "BC4", "REL1-sym", "REL3-sym"}) {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            TransformChain chain;
            chain.push(random_map(rng));
            const double mass = testsupport::uniform(rng, 0.5, 3.0);
            const MomentSequence seq = apply_chain(gen_random(label, seed).moments, chain).scaled(mass);
            const SolveReport rep = solve_pipeline(seq, cfg);
            INFO(label << " seed " << seed);
            check_constructed(rep, seq, cfg);
            CHECK(rep.measure.total_density() == doctest::Approx(mass));
        }
    }
}

TEST_CASE("pipeline: nc perturbation of a rank-3 point sequence has no measure") {
    Measure mu;
    mu.atoms.push_back(Atom::point(1, 0, 0.3));
    mu.atoms.push_back(Atom::point(0, 1, 0.3));
    mu.atoms.push_back(Atom::point(-1, 0.5, 0.4));
    MomentSequence seq = moments_from_measure(mu);
    seq.assign("XYXY", seq.get("XYXY") - 0.01);
    const SolveReport rep = solve_pipeline(seq);
    CHECK(rep.nc);
    CHECK(rep.verdict == Verdict::NotExists);
}

TEST_CASE("pipeline: canonical rank-4 input at a = 0 gives one size-2 atom") {
    const SolveReport rep = solve_pipeline(canonical_rank4_sequence(0.0));
    check_constructed(rep, canonical_rank4_sequence(0.0), {});
    CHECK(rep.minimal_type == std::vector<int>{0, 1});
    CHECK(rep.measure.type() == std::vector<int>{0, 1});
    CHECK(rep.target_case == "rank4");
}

TEST_CASE("pipeline: REL1 example at beta_X4 = 0.4 has type (4,1)") {
    const MomentSequence seq = sequence_from_matrix(testsupport::rel1_example(0.4));
    const SolveReport rep = solve_pipeline(seq);
    check_constructed(rep, seq, {});
    CHECK(rep.measure.type() == std::vector<int>{4, 1});
    CHECK(rep.target_case == "REL1");
    CHECK(rep.uniqueness == "not-classified");
    REQUIRE(rep.rank6);
    CHECK(rep.rank6->method == "alpha-drop");
}

TEST_CASE("pipeline: positive definite input gets the informational verdict") {
    std::mt19937 rng(8);
    Measure mu = testsupport::relation_measure("REL1", rng, 3, 2);
    mu.atoms.push_back(Atom::point(0.3, -0.2, 0.4));
    mu.atoms.push_back(Atom::point(1.7, 0.9, 0.3));
    const MomentSequence seq = moments_from_measure(mu);
    REQUIRE(numerical_rank(moment_matrix(seq), {}) == 7);
    const SolveReport rep = solve_pipeline(seq);
    CHECK(rep.verdict == Verdict::Exists);
    CHECK(rep.method == "positive-definite");
    CHECK_FALSE(rep.measure_constructed);
    CHECK(rep.measure.atoms.empty());
    const Json j = report_to_json(rep);
    CHECK(j["measure"].is_null());
    CHECK(j["reconstruction_error"].is_null());
}

TEST_CASE("pipeline: flat certificate without extraction is declared") {
    const SolveReport rep = solve_pipeline(sequence_from_matrix(testsupport::rel4_example(1.5)));
    CHECK(rep.verdict == Verdict::Exists);
    REQUIRE(rep.rank6);
    CHECK(rep.rank6->flat_certificate);
    if (rep.method == "flat-extension") CHECK_FALSE(rep.measure_constructed);
}

TEST_CASE("pipeline: non-PSD input has no measure") {
    const SolveReport rep = solve_pipeline(sequence_from_matrix(testsupport::rel1_example(0.2)));
    CHECK(rep.verdict == Verdict::NotExists);
    CHECK_FALSE(rep.psd);
    CHECK(exit_code(rep.verdict) == 1);
}

TEST_CASE("pipeline: commutative input goes to the commutative solver") {
    Measure mu;
    mu.atoms.push_back(Atom::point(1, 0, 0.3));
    mu.atoms.push_back(Atom::point(0, 1, 0.3));
    mu.atoms.push_back(Atom::point(-1, 0.5, 0.4));
    const MomentSequence seq = moments_from_measure(mu);
    const SolveReport rep = solve_pipeline(seq);
    CHECK_FALSE(rep.nc);
    check_constructed(rep, seq, {});
    CHECK(rep.minimal_type == std::vector<int>{3});
}

TEST_CASE("pipeline: malformed input is an input error") {
    MomentSequence partial;
    partial.set("", 1.0);
    CHECK_THROWS_AS(solve_pipeline(partial), InputError);
    MomentSequence zero_mass = canonical_rank4_sequence(0.5);
    zero_mass.assign("", 0.0);
    CHECK_THROWS_AS(solve_pipeline(zero_mass), InputError);
}

TEST_CASE("pipeline: reports are identical across runs") {
    const Generated g = gen_random("REL1", 4);
    const std::string a = report_to_json(solve_pipeline(g.moments)).dump();
    const std::string b = report_to_json(solve_pipeline(gen_random("REL1", 4).moments)).dump();
    CHECK(a == b);
}

TEST_CASE("pipeline: verify_measure flags a perturbed measure") {
    const Generated g = gen_random("BC2", 3);
    const VerifyReport ok = verify_measure(g.moments, g.measure);
    CHECK(ok.matches);
    CHECK(ok.annihilates_kernel);
    Measure bad = g.measure;
    bad.atoms.front().A(0, 0) += 1e-3;
    const VerifyReport off = verify_measure(g.moments, bad);
    CHECK_FALSE(off.matches);
    CHECK(off.max_error > 1e-5);
}

TEST_CASE("pipeline: reduce_sequence dispatches by rank") {
    CHECK(reduce_sequence(gen_random("rank4", 2).moments).target == "rank4");
    const std::string bc = reduce_sequence(gen_random("BC3", 2).moments).target;
    CHECK(bc.rfind("BC", 0) == 0);
    CHECK(reduce_sequence(gen_random("REL2", 2).moments).target == "REL2");
    Measure mu;
    mu.atoms.push_back(Atom::point(1, 2, 1.0));
    CHECK_THROWS_AS(reduce_sequence(moments_from_measure(mu)), InputError);
}

TEST_CASE("io: sequences and measures survive a JSON roundtrip") {
    const Generated g = gen_random("REL3", 9);
    const MomentSequence back = sequence_from_json(parse_json(sequence_to_json(g.moments).dump()));
    CHECK(max_abs_diff(back, g.moments) == 0.0);
    const Measure mu = measure_from_json(parse_json(measure_to_json(g.measure).dump()));
    CHECK(max_abs_diff(moments_from_measure(mu), g.moments) < 1e-15);
    CHECK(sequence_to_json(g.moments)["beta"].size() == 16);
}

TEST_CASE("io: non-canonical keys fold into their class; conflicts are errors") {
    Json j = sequence_to_json(canonical_rank4_sequence(0.5));
    j["beta"]["YX"] = j["beta"]["XY"];
    j["beta"]["YYXX"] = j["beta"]["XXYY"];
    CHECK_NOTHROW(sequence_from_json(j));
    j["beta"]["YXXX"] = 12.0;
    CHECK_THROWS_AS(sequence_from_json(j), InputError);
    Json missing = sequence_to_json(canonical_rank4_sequence(0.5));
    missing["beta"].erase("XYXY");
    CHECK_THROWS_AS(sequence_from_json(missing), InputError);
    Json bad_letter = sequence_to_json(canonical_rank4_sequence(0.5));
    bad_letter["beta"]["XZ"] = 1.0;
    CHECK_THROWS_AS(sequence_from_json(bad_letter), InputError);
    CHECK_THROWS_AS(parse_json("{\"beta\": "), InputError);
    CHECK_THROWS_AS(sequence_from_json(parse_json("[1, 2]")), InputError);
}

TEST_CASE("io: measure input is validated") {
    CHECK_THROWS_AS(measure_from_json(parse_json(R"({"atoms":[{"A":[[1,2],[3,4]],"B":[[1,0],[0,1]],"density":1}]})")),
                    InputError);
    CHECK_THROWS_AS(measure_from_json(parse_json(R"({"atoms":[{"A":[[1]],"B":[[1,0],[0,1]],"density":1}]})")),
                    InputError);
    CHECK_THROWS_AS(measure_from_json(parse_json(R"({"atoms":[{"A":[[1]],"B":[[1]],"density":-1}]})")), InputError);
    const Measure mu = measure_from_json(parse_json(R"({"atoms":[{"A":[[1]],"B":[[2]],"density":0.5}]})"));
    CHECK(mu.atoms.size() == 1);
    CHECK(mu.atoms[0].B(0, 0) == 2.0);
}
