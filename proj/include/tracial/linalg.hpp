#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tracial/moments.hpp"

namespace tracial {

struct ToleranceConfig {
    double rank_tol = 1e-9;   // eigenvalue cut, relative to max |lambda|
    double psd_tol = 1e-9;    // allowed negative eigenvalue, relative to max |lambda|
    double match_tol = 1e-8;  // moment comparison
    double span_tol = 1e-7;   // column-in-span test, relative to max |M_ij|
    double coef_tol = 1e-6;   // "is this relation coefficient zero"
};

// One evaluated inequality or equality of a closed-form condition list.
struct Condition {
    std::string label;
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};

struct RankInfo {
    int rank = 0;
    double cut = 0.0;
    // Smallest |lambda| / cut ratio on either side of the cut; below 10 the
    // classification is flagged as borderline.
    double gap_ratio = 0.0;
    bool borderline = false;
};

RankInfo rank_info(const Eigen::MatrixXd& M, const ToleranceConfig& cfg);
int numerical_rank(const Eigen::MatrixXd& M, const ToleranceConfig& cfg);

struct PsdInfo {
    bool psd = false;
    double margin = 0.0;  // minimum eigenvalue
};

PsdInfo is_psd(const Eigen::MatrixXd& M, const ToleranceConfig& cfg);

// Linear dependency among the columns {1,X,Y,X^2,XY,YX,Y^2}.
struct ColumnRelation {
    Eigen::VectorXd coeffs;
    NcPoly poly;
};

struct KernelInfo {
    std::vector<ColumnRelation> relations;  // orthonormal kernel basis
    std::vector<std::string> shapes;        // matching canonical relation names
};

KernelInfo kernel_relations(const MomentMatrix& M2, const ToleranceConfig& cfg);

// Canonical single relations by name, as coefficient vectors over basis2().
// Names: "X2+Y2=1", "Y2=1", "Y2-X2=1", "Y2=X2", "XY+YX=0", "Y2=1-X2", "Y2=1+X2".
const std::vector<std::pair<std::string, Eigen::VectorXd>>& canonical_relation_shapes();
Eigen::VectorXd relation_vector(const std::string& name);

// ||M p|| / max(1, ||M||) for a coefficient vector p normalized to unit length.
double relation_residual(const Eigen::MatrixXd& M, const Eigen::VectorXd& p);

// Column `target` written in terms of the columns `basis`, solved on the
// principal block M[basis,basis].
struct SpanFit {
    bool in_span = false;
    Eigen::VectorXd coeffs;
    double residual = 0.0;
};

SpanFit express_in_span(const Eigen::MatrixXd& M, int target, const std::vector<int>& basis,
                        const ToleranceConfig& cfg);

// Greedily picks independent columns in the given order.
std::vector<int> greedy_basis(const Eigen::MatrixXd& M, const std::vector<int>& order,
                              const ToleranceConfig& cfg);

struct AlphaDrop {
    bool ok = false;
    double alpha = 0.0;
    double psd_loss_alpha = 0.0;  // set when PSD-ness is lost before the rank drops
    int rank_before = 0;
    int rank_after = 0;
    std::string message;
};

// Smallest alpha > 0 with rank(M - alpha D) < rank(M) while M - alpha D stays PSD.
AlphaDrop smallest_rank_drop_alpha(const Eigen::MatrixXd& M, const Eigen::MatrixXd& D,
                                   const ToleranceConfig& cfg);

// Same quantity via 1 / lambda_max(L^{-1/2} U^T D U L^{-1/2}) on the range of M.
// Only meaningful when ker M is contained in ker D.
double rank_drop_alpha_generalized(const Eigen::MatrixXd& M, const Eigen::MatrixXd& D,
                                   const ToleranceConfig& cfg);

}  // namespace tracial
