#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tracial/linalg.hpp"
#include "tracial/moments.hpp"

namespace tracial {

// Rank-6 basic relations:
//   REL1: Y^2 = 1 - X^2    REL2: Y^2 = 1 + X^2
//   REL3: XY + YX = 0      REL4: Y^2 = 1
// Free degree-5 parameters: (p, q) for REL1..REL3, (p, q, r) for REL4.
struct FlatParams {
    double p = 0.0, q = 0.0, r = 0.0;
};

int flat_param_count(const std::string& relation);

// Name of the relation shape used by kernel_relations ("Y2=1-X2", ...).
std::string flat_relation_shape(const std::string& relation);

// Degree-5 sequence: the degree-4 moments of seq plus the degree-5 moments
// forced by recursive generation, with the free ones set from params.
MomentSequence degree5_moments(const std::string& relation, const MomentSequence& seq,
                               const FlatParams& params);

// 7x8 block with rows basis2() and columns basis3(), entry beta_{U* V}.
// Throws std::invalid_argument when M(2) does not satisfy the relation.
Eigen::MatrixXd build_B3(const std::string& relation, const MomentSequence& seq, const FlatParams& params,
                         const ToleranceConfig& cfg = {});

// Indices into basis2() of the columns spanning M(2) for the relation.
std::vector<int> flat_column_basis(const std::string& relation);

// C3 = W1^T A W1 with A = M(2) restricted to the column basis and A W1 = B3 on
// those rows. Throws std::domain_error when A is singular.
Eigen::MatrixXd compute_C3(const std::string& relation, const Eigen::MatrixXd& M2, const Eigen::MatrixXd& B3,
                           const ToleranceConfig& cfg = {});

struct HankelResidual {
    std::vector<std::pair<std::string, double>> equalities;  // label, lhs - rhs

    double max_abs() const;
    double sum_squares() const;
};

// The relation's equality system for C3 (entries C_ij are 1-based over basis3()).
HankelResidual hankel_residuals(const std::string& relation, const Eigen::MatrixXd& C3,
                                const MomentSequence& seq);

// Relation-independent moment-structure conditions on C3: every group of
// entries that name the same degree-6 moment must agree.
HankelResidual moment_structure_residuals(const Eigen::MatrixXd& C3);

// Identities that hold for every flat extension regardless of moment structure.
HankelResidual automatic_identities(const Eigen::MatrixXd& C3);

struct FlatOptions {
    double tol = 1e-8;     // per-equality tolerance for a flat extension
    int max_evals = 4000;  // function evaluations per start
};

struct FlatResult {
    bool found = false;
    FlatParams params;
    double min_residual = 0.0;  // sum of squared equality residuals at params
    HankelResidual residuals;
    Eigen::MatrixXd B3, C3, M3;
    bool m3_psd = false;
    int m3_rank = 0;
    int m2_rank = 0;
    std::vector<std::string> diagnostics;
};

// Multi-start least-squares search over the free degree-5 moments for a
// flat extension M3 = [[M2, B3], [B3^T, C3]] with moment structure.
FlatResult flat_search(const std::string& relation, const MomentSequence& seq, const ToleranceConfig& cfg = {},
                       const FlatOptions& opt = {});

}  // namespace tracial
