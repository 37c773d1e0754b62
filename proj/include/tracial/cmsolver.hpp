#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tracial/linalg.hpp"
#include "tracial/moments.hpp"

namespace tracial {

// Commutative monomial basis {1, x, y, x^2, xy, y^2} of degree <= 2.
// A conic p is stored as its coefficient vector over this basis.
using Conic = Eigen::Matrix<double, 6, 1>;

double eval_conic(const Conic& p, double x, double y);

// Commutative 6x6 moment matrix of a sequence with beta_XXYY = beta_XYXY.
Eigen::MatrixXd commutative_moment_matrix(const MomentSequence& seq);

struct WeightedPoint {
    double x = 0.0, y = 0.0, weight = 0.0;
};

struct CmReport {
    bool admits = false;
    bool psd = false;
    bool recursively_generated = false;
    int rank = 0;
    int variety_card = 0;  // -1 stands for an infinite variety
    std::vector<Conic> kernel;
    std::vector<WeightedPoint> points;
    double residual = 0.0;  // max |beta - beta(points)| over all moments up to degree 4
    std::vector<std::string> diagnostics;
};

struct CmOptions {
    int samples = 64;        // candidate points per sampled curve
    bool allow_polish = true;
};

// Solves the commutative quartic problem for a singular moment matrix.
// Throws std::domain_error when M(2) has no kernel relation and
// std::invalid_argument for a noncommutative sequence.
CmReport cm_solve(const MomentSequence& seq, const ToleranceConfig& cfg, const CmOptions& opt = {});

// Common real zeros of the conics. Returns false when the set is infinite
// (pts is left empty in that case).
bool finite_variety(const std::vector<Conic>& conics, std::vector<Eigen::Vector2d>& pts, double tol);

// Lawson-Hanson nonnegative least squares: argmin ||A x - b|| subject to x >= 0.
Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, int max_iter = 0);

// Degree-4 commutative moment vector of a point, ordered as the
// commutative monomials x^i y^j with i + j <= 4 (15 entries).
Eigen::VectorXd point_moment_vector(double x, double y);
// The same ordering read off a sequence.
Eigen::VectorXd sequence_moment_vector(const MomentSequence& seq);

Measure points_to_measure(const std::vector<WeightedPoint>& pts);

}  // namespace tracial
