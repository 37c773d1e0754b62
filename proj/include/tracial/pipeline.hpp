#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tracial/io.hpp"
#include "tracial/linalg.hpp"
#include "tracial/moments.hpp"
#include "tracial/rank6.hpp"
#include "tracial/transforms.hpp"

namespace tracial {

struct SolveReport {
    Verdict verdict = Verdict::Undetermined;
    // "commutative", "rank-bound", "rank4", "rank5", "alpha-drop", "lmi-witness",
    // "heuristic-sufficient", "flat-extension", "positive-definite".
    std::string method;
    bool nc = true;
    int rank = 0;
    bool psd = false;
    double psd_margin = 0.0;
    std::string target_case;  // "cm", "rank4", "BC1".."BC4", "REL1".."REL4", "rank7" or empty
    TransformChain chain;
    // False when the verdict rests on a certificate without an explicit
    // measure (rank 7, flat extension); reconstruction is then not available.
    bool measure_constructed = false;
    Measure measure;                  // in the coordinates and mass of the input
    std::vector<Measure> alternatives;  // other minimal measures when not unique
    std::vector<int> minimal_type;      // empty when not classified
    std::string uniqueness = "not-classified";
    double reconstruction_error = 0.0;  // on the normalized sequence
    double kernel_residual = 0.0;       // max ||p(A,B)|| over atoms and kernel relations
    std::optional<Rank6Report> rank6;
    std::vector<std::string> diagnostics;
};

// Rank dispatch: commutative data goes to cm_solve; nc rank <= 3 has no
// measure; ranks 4, 5 and 6 are reduced to canonical form, solved and pulled
// back; rank 7 gets the informational positive-definite verdict. Every
// constructed measure is checked against the input moments; a failed check
// turns the verdict into undetermined. Throws InputError for incomplete or
// non-normalizable input.
SolveReport solve_pipeline(const MomentSequence& seq, const ToleranceConfig& cfg = {}, const LmiOptions& opt = {});

// Reduction by rank (4, 5 or 6) of an nc sequence. Throws InputError for other
// ranks or commutative input; NoMeasureError and InconsistentInputError pass through.
Reduction reduce_sequence(const MomentSequence& seq, const ToleranceConfig& cfg = {});

struct VerifyReport {
    bool matches = false;
    double max_error = 0.0;  // max |beta_w - beta_w(mu)| relative to max(1, beta_1)
    std::string worst_word;
    double kernel_residual = 0.0;
    bool annihilates_kernel = false;
};

// Checks a measure against a sequence: moments to match_tol and kernel
// annihilation of every atom to span_tol.
VerifyReport verify_measure(const MomentSequence& seq, const Measure& mu, const ToleranceConfig& cfg = {});

// Largest ||p(A,B)|| over the atoms of mu and an orthonormal basis of ker M2(seq).
double kernel_annihilation(const MomentSequence& seq, const Measure& mu, const ToleranceConfig& cfg);

Json report_to_json(const SolveReport& rep);
Json verify_to_json(const VerifyReport& rep);
Json reduction_to_json(const Reduction& red);

// 0 exists, 1 not-exists, 2 undetermined.
int exit_code(Verdict v);

}  // namespace tracial
