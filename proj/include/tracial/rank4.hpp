#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tracial/linalg.hpp"
#include "tracial/moments.hpp"
#include "tracial/transforms.hpp"

namespace tracial {

struct Rank4Report {
    bool exists = false;
    std::string reason;
    double a = 0.0;  // canonical parameter in (-2,2)
    Atom atom;       // in the coordinates of the input, density = beta_1
    Reduction reduction;
    std::string uniqueness = "unique up to orthogonal equivalence";
    std::vector<std::string> warnings;
};

// X = diag(1,-1), Y = [[a/2, k],[k, -a/2]] with k = sqrt(4 - a^2) / 2 > 0, unit density.
Atom canonical_rank4_atom(double a);

// Moments of the canonical rank-4 family written out entrywise: all odd
// moments vanish, beta_XY = beta_X3Y = beta_XY3 = a/2, beta_XYXY = a^2/2 - 1,
// and the remaining even moments equal 1.
MomentSequence canonical_rank4_sequence(double a);

// Solves a sequence with PSD rank-4 nc moment matrix. Input need not be normalized.
Rank4Report solve_rank4(const MomentSequence& seq, const ToleranceConfig& cfg);

// Measure for a PSD rank-4 moment matrix (not necessarily normalized), used for
// the residuals left after subtracting size-1 atoms. Throws NoMeasureError.
Measure solve_rank4_matrix(const Eigen::MatrixXd& R, const ToleranceConfig& cfg);

}  // namespace tracial
