#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tracial/linalg.hpp"
#include "tracial/moments.hpp"

namespace tracial {

// The sequence provably admits no measure (a necessary condition failed).
struct NoMeasureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The input contradicts an assumption that holds for every PSD matrix of the
// detected rank (a proven-positive constant came out nonpositive, etc.).
struct InconsistentInputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// phi(x,y) = (a + b x + c y, d + e x + f y)
struct AffineMap {
    double a = 0.0, b = 1.0, c = 0.0;
    double d = 0.0, e = 0.0, f = 1.0;
    std::string name;

    static AffineMap identity();
    static AffineMap swap();
    static AffineMap shift(double dx, double dy);  // (x + dx, y + dy)
    static AffineMap scale(double sx, double sy);  // (sx x, sy y)
    static AffineMap general(double a, double b, double c, double d, double e, double f,
                             std::string name = "");

    double det() const { return b * f - c * e; }
    AffineMap inverse() const;
    NcPoly first() const { return NcPoly::affine(a, b, c); }
    NcPoly second() const { return NcPoly::affine(d, e, f); }
    // (phi_1(A,B), phi_2(A,B)) for a matrix pair.
    std::pair<Eigen::MatrixXd, Eigen::MatrixXd> apply(const Eigen::MatrixXd& A,
                                                      const Eigen::MatrixXd& B) const;
};

// outer o inner
AffineMap compose(const AffineMap& outer, const AffineMap& inner);

// Maps applied in order: maps[0] first.
struct TransformChain {
    std::vector<AffineMap> maps;
    std::string target_case;

    void push(const AffineMap& m) { maps.push_back(m); }
    void append(const TransformChain& o);
    AffineMap composed() const;
};

// beta~_w = L_beta(w(phi_1, phi_2)). Throws std::invalid_argument for singular maps.
MomentSequence apply_affine(const MomentSequence& seq, const AffineMap& phi);
MomentSequence apply_chain(const MomentSequence& seq, const TransformChain& chain);

// Image of each atom under the chain (a measure for apply_chain(seq)).
Measure push_forward_measure(const Measure& mu, const TransformChain& chain);
// Inverse images: turns a measure of the transformed sequence into one of the original.
Measure pull_back_measure(const Measure& mu, const TransformChain& chain);

// Result of a canonical-form reduction.
struct Reduction {
    std::string target;  // "rank4", "BC1".."BC4", "REL1".."REL4", or a Y2 shape
    TransformChain chain;
    MomentSequence canonical;
    double param = 0.0;  // rank-4 parameter a
    std::vector<std::string> steps;
    std::vector<std::pair<std::string, double>> constants;
};

// Kernel vectors over basis2() of the canonical relations for a target.
std::vector<Eigen::VectorXd> canonical_kernel(const std::string& target, double param = 0.0);

// Reduces a PSD rank-4 nc sequence to X^2 = 1, XY + YX = a 1, Y^2 = 1.
Reduction reduce_rank4(const MomentSequence& seq, const ToleranceConfig& cfg);

// Symmetric Y^2 relation Y^2 = a1 + a2 X + a3 Y + a4 X^2 + a5 (XY + YX), read
// from the kernel of M_2. Returns {a1,...,a5}.
std::vector<double> extract_Y2_relation(const MomentSequence& seq, const ToleranceConfig& cfg);

// Normalizes the Y^2 relation to Y^2 = 1 - X^2, Y^2 = 1, Y^2 = 1 + X^2 or Y^2 = X^2.
// With to_anticommuting set, the last case continues to XY + YX = 0.
Reduction reduce_Y2(const MomentSequence& seq, const ToleranceConfig& cfg,
                    bool to_anticommuting = false);

Reduction reduce_rank5(const MomentSequence& seq, const ToleranceConfig& cfg);
Reduction reduce_rank6(const MomentSequence& seq, const ToleranceConfig& cfg);

}  // namespace tracial
