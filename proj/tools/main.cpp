#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "tracial/flat.hpp"
#include "tracial/generate.hpp"
#include "tracial/io.hpp"
#include "tracial/pipeline.hpp"

using namespace tracial;

namespace {

constexpr int kInputError = 3;

std::string read_input(const std::string& path) {
    std::ostringstream os;
    if (path == "-") {
        os << std::cin.rdbuf();
    } else {
        std::ifstream in(path);
        if (!in) throw InputError("cannot open " + path);
        os << in.rdbuf();
    }
    return os.str();
}

void print_matrix(std::ostream& os, const Eigen::MatrixXd& M) {
    for (int i = 0; i < M.rows(); ++i) {
        os << (i == 0 ? "[" : " ");
        for (int j = 0; j < M.cols(); ++j) os << std::setw(14) << M(i, j);
        os << (i + 1 == M.rows() ? " ]" : "") << "\n";
    }
}

void print_measure(std::ostream& os, const Measure& mu) {
    int k = 0;
    for (const auto& a : mu.atoms) {
        os << "  atom " << ++k << "  size " << a.size() << "  density " << a.density << "\n";
        if (a.size() == 1) {
            os << "    (x, y) = (" << a.A(0, 0) << ", " << a.B(0, 0) << ")\n";
        } else {
            os << "    A =\n";
            print_matrix(os, a.A);
            os << "    B =\n";
            print_matrix(os, a.B);
        }
    }
}

void print_report(std::ostream& os, const SolveReport& rep) {
    os << std::setprecision(10);
    os << "verdict              " << verdict_name(rep.verdict) << "\n";
    os << "method               " << (rep.method.empty() ? "-" : rep.method) << "\n";
    os << "sequence             " << (rep.nc ? "nc" : "cm") << ", rank " << rep.rank << ", min eigenvalue "
       << rep.psd_margin << "\n";
    os << "case                 " << (rep.target_case.empty() ? "-" : rep.target_case) << "\n";
    os << "transform chain      " << rep.chain.maps.size() << " map(s)\n";
    if (rep.measure_constructed) {
        os << "measure type         " << type_string(rep.measure.type()) << "\n";
        os << "reconstruction error " << rep.reconstruction_error << "\n";
        os << "kernel residual      " << rep.kernel_residual << "\n";
    } else {
        os << "measure              not constructed\n";
    }
    os << "minimal type         " << (rep.minimal_type.empty() ? "not-classified" : type_string(rep.minimal_type))
       << "\n";
    os << "uniqueness           " << rep.uniqueness << "\n";
    if (rep.measure_constructed) {
        os << "atoms\n";
        print_measure(os, rep.measure);
    }
    for (size_t i = 0; i < rep.alternatives.size(); ++i) {
        os << "alternative measure " << i + 1 << "\n";
        print_measure(os, rep.alternatives[i]);
    }
    for (const auto& d : rep.diagnostics) os << "note: " << d << "\n";
}

struct Options {
    ToleranceConfig cfg;
    LmiOptions lmi;
    std::uint64_t seed = 0;
    bool json = false;
};

int run_solve(const Options& o, const std::string& path) {
    const MomentSequence seq = sequence_from_json(parse_json(read_input(path)));
    const SolveReport rep = solve_pipeline(seq, o.cfg, o.lmi);
    if (o.json) {
        std::cout << report_to_json(rep).dump(2) << "\n";
    } else {
        print_report(std::cout, rep);
    }
    return exit_code(rep.verdict);
}

int run_verify(const Options& o, const std::string& seq_path, const std::string& measure_path) {
    const MomentSequence seq = sequence_from_json(parse_json(read_input(seq_path)));
    const Measure mu = measure_from_json(parse_json(read_input(measure_path)));
    const VerifyReport v = verify_measure(seq, mu, o.cfg);
    if (o.json) {
        std::cout << verify_to_json(v).dump(2) << "\n";
    } else {
        std::cout << std::setprecision(10);
        std::cout << "moments match        " << (v.matches ? "yes" : "no") << "\n";
        std::cout << "max moment error     " << v.max_error << " (word " << v.worst_word << ")\n";
        std::cout << "kernel annihilated   " << (v.annihilates_kernel ? "yes" : "no") << "\n";
        std::cout << "kernel residual      " << v.kernel_residual << "\n";
    }
    return v.matches && v.annihilates_kernel ? 0 : 1;
}

int run_reduce(const Options& o, const std::string& path) {
    const MomentSequence seq = sequence_from_json(parse_json(read_input(path)));
    try {
        std::cout << reduction_to_json(reduce_sequence(seq, o.cfg)).dump(2) << "\n";
    } catch (const NoMeasureError& e) {
        std::cout << Json{{"verdict", "not-exists"}, {"reason", e.what()}}.dump(2) << "\n";
        return 1;
    } catch (const InconsistentInputError& e) {
        std::cout << Json{{"verdict", "undetermined"}, {"reason", e.what()}}.dump(2) << "\n";
        return 2;
    }
    return 0;
}

int run_flat_check(const Options& o, const std::string& path, const std::string& relation) {
    const MomentSequence seq = sequence_from_json(parse_json(read_input(path)));
    std::string rel = relation;
    MomentSequence canonical = seq.scaled(1.0 / seq.get(""));
    if (rel.empty()) {
        const Reduction red = reduce_sequence(seq, o.cfg);
        if (red.target.rfind("REL", 0) != 0) {
            throw InputError("flat-check needs a rank-6 sequence; reduction gave " + red.target);
        }
        rel = red.target;
        canonical = red.canonical;
    }
    const FlatResult r = flat_search(rel, canonical, o.cfg);
    if (o.json) {
        Json j;
        j["relation"] = rel;
        j["found"] = r.found;
        j["params"] = {r.params.p, r.params.q, r.params.r};
        j["min_residual"] = r.min_residual;
        Json res = Json::array();
        for (const auto& [label, v] : r.residuals.equalities) res.push_back({{"equality", label}, {"residual", v}});
        j["residuals"] = std::move(res);
        j["m3_psd"] = r.m3_psd;
        j["m3_rank"] = r.m3_rank;
        j["m2_rank"] = r.m2_rank;
        j["diagnostics"] = r.diagnostics;
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << std::setprecision(10);
        std::cout << "relation " << rel << "  parameters (p, q, r) = (" << r.params.p << ", " << r.params.q << ", "
                  << r.params.r << ")\n";
        std::cout << std::left << std::setw(28) << "equality" << "residual\n";
        for (const auto& [label, v] : r.residuals.equalities) std::cout << std::setw(28) << label << v << "\n";
        std::cout << "M3 PSD " << (r.m3_psd ? "yes" : "no") << ", rank M3 " << r.m3_rank << ", rank M2 " << r.m2_rank
                  << "\n";
        std::cout << "verdict " << (r.found ? "flat extension found" : "no flat extension found") << "\n";
        for (const auto& d : r.diagnostics) std::cout << "note: " << d << "\n";
    }
    return r.found ? 0 : 2;
}

int run_gen_random(const Options& o, const std::string& label) {
    const Generated g = gen_random(label, o.seed);
    Json j;
    j["label"] = g.label;
    j["seed"] = o.seed;
    j["beta"] = sequence_to_json(g.moments)["beta"];
    j["measure"] = measure_to_json(g.measure);
    std::cout << j.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quartic tracial moment problem solver"};
    app.require_subcommand(1);
    Options o;
    app.add_option("--tol-rank", o.cfg.rank_tol, "Relative eigenvalue cut for the numerical rank")->capture_default_str();
    app.add_option("--tol-psd", o.cfg.psd_tol, "Relative negative-eigenvalue allowance for PSD")->capture_default_str();
    app.add_option("--tol-match", o.cfg.match_tol, "Moment agreement tolerance")->capture_default_str();
    app.add_option("--lmi-grid", o.lmi.grid, "Grid points per axis of the rank-6 atom search")->capture_default_str();
    app.add_option("--lmi-iters", o.lmi.iters, "Pattern-search steps per refined start")->capture_default_str();
    app.add_option("--seed", o.seed, "Seed for gen-random")->capture_default_str();
    app.add_flag("--json", o.json, "Emit JSON");

    std::string input = "-", measure_path, relation, label;
    auto* solve = app.add_subcommand("solve", "Decide existence and construct a measure");
    solve->add_option("input", input, "Sequence JSON file, - for stdin")->capture_default_str();
    auto* verify = app.add_subcommand("verify", "Check a measure against a sequence");
    verify->add_option("input", input, "Sequence JSON file")->required();
    verify->add_option("measure", measure_path, "Measure JSON file")->required();
    auto* reduce = app.add_subcommand("reduce", "Print the reduction chain and canonical case");
    reduce->add_option("input", input, "Sequence JSON file, - for stdin")->capture_default_str();
    auto* flat = app.add_subcommand("flat-check", "Search for a flat extension of a rank-6 sequence");
    flat->add_option("input", input, "Sequence JSON file, - for stdin")->capture_default_str();
    flat->add_option("--relation", relation, "Treat the input as canonical for REL1..REL4 (skips reduction)")
        ->check(CLI::IsMember({"REL1", "REL2", "REL3", "REL4"}));
    auto* gen = app.add_subcommand("gen-random", "Sample a measure of a case and print its moments");
    gen->add_option("label", label, "rank4, BC1..BC4, REL1..REL4, REL1-sym, REL3-sym")
        ->required()
        ->check(CLI::IsMember(generator_labels()));
    for (auto* sub : {solve, verify, reduce, flat, gen}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kInputError;
    }

    try {
        if (solve->parsed()) return run_solve(o, input);
        if (verify->parsed()) return run_verify(o, input, measure_path);
        if (reduce->parsed()) return run_reduce(o, input);
        if (flat->parsed()) return run_flat_check(o, input, relation);
        if (gen->parsed()) return run_gen_random(o, label);
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    }
    return kInputError;
}
