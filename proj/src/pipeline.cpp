#include "tracial/pipeline.hpp"

#include <cmath>
#include <sstream>

#include "tracial/cmsolver.hpp"
#include "tracial/rank4.hpp"
#include "tracial/rank5.hpp"

namespace tracial {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

MomentSequence checked_input(const MomentSequence& seq) {
    if (seq.degree() < 4) throw InputError("a degree-4 moment sequence is required");
    const MomentSequence s = seq.truncated(4);
    for (const auto& w : canonical_words(4)) {
        if (!s.has(w)) throw InputError("missing moment for word " + word_key(w));
        if (!std::isfinite(s.get(w))) throw InputError("moment for word " + word_key(w) + " is not finite");
    }
    if (!(s.get("") > 0.0)) throw InputError("beta_1 must be positive");
    return s;
}

void solve_commutative(const MomentSequence& s, const ToleranceConfig& cfg, SolveReport& rep) {
    rep.target_case = "cm";
    rep.method = "commutative";
    CmReport cm;
    try {
        cm = cm_solve(s, cfg);
    } catch (const std::domain_error& e) {
        rep.verdict = Verdict::Undetermined;
        rep.diagnostics.push_back(e.what());
        return;
    }
    for (const auto& d : cm.diagnostics) rep.diagnostics.push_back("cm_solve: " + d);
    if (cm.admits) {
        rep.verdict = Verdict::Exists;
        rep.measure = points_to_measure(cm.points);
        rep.measure_constructed = true;
        // A point measure needs at least rank M2 points, so equality is minimal.
        if (static_cast<int>(cm.points.size()) == cm.rank) rep.minimal_type = {cm.rank};
        return;
    }
    bool sampling = false;
    for (const auto& d : cm.diagnostics) sampling = sampling || d.find("sampling-limited") != std::string::npos;
    rep.verdict = sampling ? Verdict::Undetermined : Verdict::NotExists;
}

void solve_rank4_case(const MomentSequence& s, const ToleranceConfig& cfg, SolveReport& rep) {
    rep.method = "rank4";
    const Rank4Report r = solve_rank4(s, cfg);
    rep.target_case = "rank4";
    rep.chain = r.reduction.chain;
    for (const auto& w : r.warnings) rep.diagnostics.push_back(w);
    if (!r.exists) {
        rep.verdict = Verdict::NotExists;
        rep.diagnostics.push_back(r.reason);
        return;
    }
    rep.verdict = Verdict::Exists;
    rep.measure.atoms.push_back(r.atom);
    rep.measure_constructed = true;
    rep.minimal_type = {0, 1};
    rep.uniqueness = r.uniqueness;
    rep.diagnostics.push_back("canonical parameter a = " + fmt(r.a));
}

void solve_rank5_case(const MomentSequence& s, const ToleranceConfig& cfg, SolveReport& rep) {
    rep.method = "rank5";
    const Reduction red = reduce_rank5(s, cfg);
    rep.target_case = red.target;
    rep.chain = red.chain;
    const Rank5Report r = solve_rank5(red.target, red.canonical, cfg);
    for (const auto& n : r.notes) rep.diagnostics.push_back(n);
    if (!r.exists) {
        rep.verdict = Verdict::NotExists;
        rep.diagnostics.push_back(r.reason);
        for (const auto& c : r.existence_conditions) {
            if (!c.holds) rep.diagnostics.push_back("failing condition: " + c.label);
        }
        return;
    }
    rep.verdict = Verdict::Exists;
    rep.measure = pull_back_measure(r.measure, red.chain);
    for (const auto& alt : r.alternatives) rep.alternatives.push_back(pull_back_measure(alt, red.chain));
    rep.measure_constructed = true;
    rep.minimal_type = r.minimal_type;
    rep.uniqueness = r.uniqueness;
    rep.diagnostics.push_back("alpha_0 = " + fmt(r.alpha0));
}

void solve_rank6_case(const MomentSequence& s, const ToleranceConfig& cfg, const LmiOptions& opt,
                      SolveReport& rep) {
    const Reduction red = reduce_rank6(s, cfg);
    rep.target_case = red.target;
    rep.chain = red.chain;
    Rank6Report r = solve_rank6(red.target, red.canonical, cfg, opt);
    rep.verdict = r.verdict;
    rep.method = r.method;
    for (const auto& d : r.diagnostics) rep.diagnostics.push_back(d);
    if (r.verdict == Verdict::Exists && !r.measure.atoms.empty()) {
        rep.measure = pull_back_measure(r.measure, red.chain);
        rep.measure_constructed = true;
    }
    if (r.verdict == Verdict::Exists && r.method == "flat-extension") {
        rep.diagnostics.push_back("existence certified by a flat extension; no measure is extracted");
    }
    rep.rank6 = std::move(r);
}

}  // namespace

double kernel_annihilation(const MomentSequence& seq, const Measure& mu, const ToleranceConfig& cfg) {
    const MomentSequence s = seq.scaled(1.0 / seq.get(""));
    const KernelInfo k = kernel_relations(build_moment_matrix(s), cfg);
    double worst = 0.0;
    for (const auto& atom : mu.atoms) {
        for (const auto& rel : k.relations) {
            worst = std::max(worst, eval_poly(atom.A, atom.B, rel.poly).norm());
        }
    }
    return worst;
}

SolveReport solve_pipeline(const MomentSequence& input, const ToleranceConfig& cfg, const LmiOptions& opt) {
    const MomentSequence seq = checked_input(input);
    SolveReport rep;
    const Classified cls = classify_sequence(seq, cfg.match_tol);
    const MomentSequence& s = cls.seq;
    rep.nc = cls.nc;
    const Eigen::MatrixXd M = moment_matrix(s);
    const RankInfo ri = rank_info(M, cfg);
    rep.rank = ri.rank;
    if (ri.borderline) {
        rep.diagnostics.push_back("numerical rank is borderline (nearest eigenvalue within a factor " +
                                  fmt(ri.gap_ratio) + " of the cut)");
    }
    const PsdInfo psd = is_psd(M, cfg);
    rep.psd = psd.psd;
    rep.psd_margin = psd.margin;
    if (!psd.psd) {
        rep.verdict = Verdict::NotExists;
        rep.method = "psd";
        rep.diagnostics.push_back("M2 is not positive semidefinite (min eigenvalue " + fmt(psd.margin) + ")");
        return rep;
    }

    try {
        if (!rep.nc) {
            solve_commutative(s, cfg, rep);
        } else if (rep.rank <= 3) {
            rep.verdict = Verdict::NotExists;
            rep.method = "rank-bound";
            rep.diagnostics.push_back("an nc sequence with rank M2 <= 3 admits no measure");
        } else if (rep.rank == 4) {
            solve_rank4_case(s, cfg, rep);
        } else if (rep.rank == 5) {
            solve_rank5_case(s, cfg, rep);
        } else if (rep.rank == 6) {
            solve_rank6_case(s, cfg, opt, rep);
        } else {
            rep.verdict = Verdict::Exists;
            rep.method = "positive-definite";
            rep.target_case = "rank7";
            rep.diagnostics.push_back("M2 is positive definite: a measure exists by the cited result for the "
                                      "positive definite case; its construction is out of scope");
        }
    } catch (const NoMeasureError& e) {
        rep.verdict = Verdict::NotExists;
        rep.diagnostics.push_back(e.what());
    } catch (const InconsistentInputError& e) {
        rep.verdict = Verdict::Undetermined;
        rep.diagnostics.push_back(std::string("reduction inconsistent with the numerical rank: ") + e.what());
    } catch (const std::invalid_argument& e) {
        rep.verdict = Verdict::Undetermined;
        rep.diagnostics.push_back(e.what());
    }

    if (rep.measure_constructed) {
        rep.measure = rep.measure.scaled(cls.mass);
        for (auto& alt : rep.alternatives) alt = alt.scaled(cls.mass);
        rep.reconstruction_error = max_abs_diff(moments_from_measure(rep.measure), seq) / cls.mass;
        rep.kernel_residual = kernel_annihilation(seq, rep.measure, cfg);
        if (rep.reconstruction_error > cfg.match_tol) {
            rep.diagnostics.push_back("constructed measure reproduces the moments only to " +
                                      fmt(rep.reconstruction_error) + "; verdict withdrawn");
            rep.verdict = Verdict::Undetermined;
        }
    }
    return rep;
}

Reduction reduce_sequence(const MomentSequence& input, const ToleranceConfig& cfg) {
    const MomentSequence seq = checked_input(input);
    const Classified cls = classify_sequence(seq, cfg.match_tol);
    if (!cls.nc) throw InputError("reduction applies to nc sequences; this one is commutative");
    const int r = numerical_rank(moment_matrix(cls.seq), cfg);
    if (r == 4) return reduce_rank4(cls.seq, cfg);
    if (r == 5) return reduce_rank5(cls.seq, cfg);
    if (r == 6) return reduce_rank6(cls.seq, cfg);
    throw InputError("reduction is defined for ranks 4 to 6; M2 has rank " + std::to_string(r));
}

VerifyReport verify_measure(const MomentSequence& input, const Measure& mu, const ToleranceConfig& cfg) {
    const MomentSequence seq = checked_input(input);
    VerifyReport v;
    const MomentSequence m = moments_from_measure(mu);
    const double scale = std::max(1.0, seq.get(""));
    for (const auto& w : canonical_words(4)) {
        const double d = std::abs(seq.get(w) - m.get(w)) / scale;
        if (v.worst_word.empty() || d > v.max_error) {
            v.max_error = d;
            v.worst_word = word_key(w);
        }
    }
    v.matches = v.max_error <= cfg.match_tol;
    v.kernel_residual = kernel_annihilation(seq, mu, cfg);
    v.annihilates_kernel = v.kernel_residual <= cfg.span_tol;
    return v;
}

int exit_code(Verdict v) {
    switch (v) {
        case Verdict::Exists:
            return 0;
        case Verdict::NotExists:
            return 1;
        case Verdict::Undetermined:
            return 2;
    }
    return 2;
}

Json report_to_json(const SolveReport& rep) {
    Json j;
    j["verdict"] = verdict_name(rep.verdict);
    j["method"] = rep.method;
    j["nc"] = rep.nc;
    j["rank"] = rep.rank;
    j["psd"] = rep.psd;
    j["psd_margin"] = rep.psd_margin;
    j["target_case"] = rep.target_case;
    j["chain"] = chain_to_json(rep.chain);
    j["measure_constructed"] = rep.measure_constructed;
    if (rep.measure_constructed) {
        j["measure"] = measure_to_json(rep.measure);
        j["type"] = rep.measure.type();
        j["reconstruction_error"] = rep.reconstruction_error;
        j["kernel_residual"] = rep.kernel_residual;
    } else {
        j["measure"] = nullptr;
        j["type"] = nullptr;
        j["reconstruction_error"] = nullptr;
        j["kernel_residual"] = nullptr;
    }
    Json alts = Json::array();
    for (const auto& a : rep.alternatives) alts.push_back(measure_to_json(a));
    j["alternatives"] = std::move(alts);
    if (rep.minimal_type.empty()) {
        j["minimal_type"] = nullptr;
    } else {
        j["minimal_type"] = rep.minimal_type;
    }
    j["uniqueness"] = rep.uniqueness;
    if (rep.rank6) {
        const Rank6Report& r = *rep.rank6;
        Json r6;
        r6["relation"] = r.relation;
        r6["alpha0"] = r.alpha0;
        r6["alpha0_closed_form"] = r.alpha0_closed;
        r6["flat_certificate"] = r.flat_certificate;
        if (r.flat_certificate) r6["flat_params"] = {r.flat_params.p, r.flat_params.q, r.flat_params.r};
        if (r.witness) {
            const LmiWitness& w = *r.witness;
            Json wj;
            wj["pattern"] = w.pattern;
            wj["params"] = {w.a, w.b, w.c, w.d, w.e};
            wj["xi"] = w.xi;
            wj["family_params"] = {w.t1, w.t2};
            Json conds = Json::array();
            for (const auto& c : w.conditions) {
                conds.push_back({{"label", c.label}, {"value", c.lhs}, {"bound", c.rhs}, {"holds", c.holds}});
            }
            wj["conditions"] = std::move(conds);
            r6["witness"] = std::move(wj);
        }
        j["rank6"] = std::move(r6);
    }
    j["diagnostics"] = rep.diagnostics;
    return j;
}

Json verify_to_json(const VerifyReport& rep) {
    Json j;
    j["matches"] = rep.matches;
    j["max_error"] = rep.max_error;
    j["worst_word"] = rep.worst_word;
    j["kernel_residual"] = rep.kernel_residual;
    j["annihilates_kernel"] = rep.annihilates_kernel;
    return j;
}

Json reduction_to_json(const Reduction& red) {
    Json j;
    j["target_case"] = red.target;
    if (red.target == "rank4") j["a"] = red.param;
    j["chain"] = chain_to_json(red.chain);
    j["steps"] = red.steps;
    Json consts = Json::object();
    for (const auto& [name, v] : red.constants) consts[name] = v;
    j["constants"] = std::move(consts);
    j["canonical"] = sequence_to_json(red.canonical);
    return j;
}

}  // namespace tracial
