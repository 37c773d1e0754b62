#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tracial/cmsolver.hpp"
#include "tracial/flat.hpp"
#include "tracial/linalg.hpp"
#include "tracial/moments.hpp"

namespace tracial {

enum class Verdict { Exists, NotExists, Undetermined };

// "exists", "not-exists", "undetermined".
std::string verdict_name(Verdict v);

// Budget of the atom-parameter search: grid x grid starting points, then up
// to `iters` pattern-search steps from the best candidates.
struct LmiOptions {
    int grid = 16;
    int iters = 200;
    int refine_starts = 4;
};

// A decomposition M2 = L + xi * M^{(X,Y)} with L a commutative moment matrix
// of the relation's LMI pattern and (X,Y) a size-2 atom.
struct LmiWitness {
    std::string pattern;  // REL1..REL4
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0, e = 0.0;
    Eigen::MatrixXd L;
    Eigen::MatrixXd residual;  // M2 - L
    double xi = 0.0;
    double t1 = 0.0, t2 = 0.0;  // atom-family parameters
    Atom atom;                  // density xi
    std::vector<WeightedPoint> variety_points;  // measure of L found by cm_solve
    std::vector<Condition> conditions;
};

struct LmiResult {
    bool found = false;
    LmiWitness witness;
    double best_margin = 0.0;  // largest min-eigenvalue of L seen, relative to ||M2||
    std::vector<std::string> diagnostics;
};

// The LMI pattern L(a,b,c,d,e) for REL1 or REL3 built from the odd moments of seq.
Eigen::MatrixXd lmi_matrix(const std::string& pattern, const MomentSequence& seq, double a, double b, double c,
                           double d, double e);

// Independent re-check of the LMI conditions for a candidate L. Condition 4
// (rank against variety cardinality) is decided by cm_solve on L.
std::vector<Condition> lmi_conditions(const std::string& pattern, const MomentSequence& seq,
                                      const Eigen::MatrixXd& L, const ToleranceConfig& cfg);

// Size-2 atom of the relation's family at parameters (t1, t2):
//   REL1: X = diag(sqrt t1, -sqrt t1), Y = sqrt(1-t1) [[t2/2, k], [k, -t2/2]], k = sqrt(4-t2^2)/2
//   REL2: as REL1 with sqrt(1+t1) in place of sqrt(1-t1)
//   REL3: X = diag(sqrt t1, -sqrt t1), Y = [[0, sqrt t2], [sqrt t2, 0]]
//   REL4: X = diag(t1, -t1), Y = [[cos t2, sin t2], [sin t2, -cos t2]]
Atom rank6_family_atom(const std::string& relation, double t1, double t2);

// Searches the relation's atom family for xi, (X,Y) with M2 - xi M^{(X,Y)}
// commutative and PSD, then extracts its measure with cm_solve. For REL1 and
// REL3 this is the full existence criterion; for REL2 and REL4 it is only a
// sufficient test. Exhaustion is reported through found = false.
LmiResult lmi_feasibility_search(const std::string& pattern, const MomentSequence& seq, const ToleranceConfig& cfg,
                                 const LmiOptions& opt = {});

// Closed forms for the first rank drop when the odd moments vanish:
// REL1 subtracts M^{(1,0)} + M^{(-1,0)}, REL3 subtracts M^{(0,0)}.
double rel1_alpha0_closed_form(const MomentSequence& seq);
double rel3_alpha0_closed_form(const MomentSequence& seq);

// Measure of a PSD moment matrix of rank at most 5 (commutative, rank 4 or
// rank 5 nc). Throws NoMeasureError when no measure is found.
Measure represent_low_rank(const Eigen::MatrixXd& R, const ToleranceConfig& cfg);

struct Rank6Report {
    std::string relation;
    Verdict verdict = Verdict::Undetermined;
    // "alpha-drop", "lmi-witness", "heuristic-sufficient", "flat-extension" or empty.
    std::string method;
    Measure measure;  // densities carry the mass beta_1 of the input
    double alpha0 = 0.0;
    double alpha0_closed = 0.0;
    std::optional<LmiWitness> witness;
    bool flat_certificate = false;
    FlatParams flat_params;
    double reconstruction_error = 0.0;
    std::vector<std::string> diagnostics;
};

// Each solver expects the kernel of M2 to be its relation (throws
// std::invalid_argument otherwise).
Rank6Report solve_rank6_rel1(const MomentSequence& seq, const ToleranceConfig& cfg, const LmiOptions& opt = {});
Rank6Report solve_rank6_rel3(const MomentSequence& seq, const ToleranceConfig& cfg, const LmiOptions& opt = {});
Rank6Report solve_rank6_rel2_rel4(const std::string& relation, const MomentSequence& seq,
                                  const ToleranceConfig& cfg, const LmiOptions& opt = {});
Rank6Report solve_rank6(const std::string& relation, const MomentSequence& seq, const ToleranceConfig& cfg,
                        const LmiOptions& opt = {});

}  // namespace tracial
