#include "tracial/rank4.hpp"

#include <cmath>

namespace tracial {

Atom canonical_rank4_atom(double a) {
    const double k = 0.5 * std::sqrt(std::max(0.0, 4.0 - a * a));
    Atom atom;
    atom.A = Eigen::Matrix2d{{1.0, 0.0}, {0.0, -1.0}};
    atom.B = Eigen::Matrix2d{{a / 2, k}, {k, -a / 2}};
    atom.density = 1.0;
    return atom;
}

MomentSequence canonical_rank4_sequence(double a) {
    MomentSequence s(4);
    for (const auto& w : canonical_words(4)) s.assign(w, 0.0);
    for (const char* w : {"", "XX", "YY", "XXXX", "XXYY", "YYYY"}) s.assign(w, 1.0);
    for (const char* w : {"XY", "XXXY", "XYYY"}) s.assign(w, a / 2);
    s.assign("XYXY", a * a / 2 - 1.0);
    return s;
}

Rank4Report solve_rank4(const MomentSequence& seq, const ToleranceConfig& cfg) {
    Rank4Report rep;
    const double mass = seq.get("");
    const MomentSequence normalized = seq.scaled(1.0 / mass);
    try {
        rep.reduction = reduce_rank4(normalized, cfg);
    } catch (const NoMeasureError& e) {
        rep.exists = false;
        rep.reason = e.what();
        return rep;
    }
    rep.a = rep.reduction.param;
    if (2.0 - std::abs(rep.a) < 1e-6) {
        rep.warnings.push_back("canonical parameter a is within 1e-6 of the PSD boundary |a| = 2; "
                               "the atom is ill-conditioned");
    }
    Measure canonical;
    canonical.atoms.push_back(canonical_rank4_atom(rep.a));
    Measure mu = pull_back_measure(canonical, rep.reduction.chain);
    rep.atom = mu.atoms.front();
    rep.atom.density = mass;
    rep.exists = true;
    return rep;
}

Measure solve_rank4_matrix(const Eigen::MatrixXd& R, const ToleranceConfig& cfg) {
    const double m = R(0, 0);
    if (!(m > 0.0)) throw NoMeasureError("rank-4 residual has nonpositive mass");
    const MomentSequence seq = sequence_from_matrix(R / m);
    const Rank4Report rep = solve_rank4(seq, cfg);
    if (!rep.exists) throw NoMeasureError("rank-4 residual admits no measure: " + rep.reason);
    Measure mu;
    mu.atoms.push_back(rep.atom);
    mu.atoms.front().density = m;
    return mu;
}

}  // namespace tracial
