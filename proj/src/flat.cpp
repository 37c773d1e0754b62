#include "tracial/flat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

namespace tracial {

namespace {

void check_relation(const std::string& relation) {
    if (relation != "REL1" && relation != "REL2" && relation != "REL3" && relation != "REL4") {
        throw std::invalid_argument("unknown rank-6 relation " + relation);
    }
}

// 1-based C_ij as written in the equality systems.
double C(const Eigen::MatrixXd& C3, int i, int j) { return C3(i - 1, j - 1); }

std::string label(int i, int j) { return "C" + std::to_string(i) + std::to_string(j); }

void add_eq(HankelResidual& h, const Eigen::MatrixXd& C3, int i, int j, int k, int l) {
    h.equalities.emplace_back(label(i, j) + " = " + label(k, l), C(C3, i, j) - C(C3, k, l));
}

void add_value(HankelResidual& h, const Eigen::MatrixXd& C3, int i, int j, double v, const std::string& name) {
    h.equalities.emplace_back(label(i, j) + " = " + name, C(C3, i, j) - v);
}

// Consecutive equalities inside each group of 1-based index pairs.
void add_groups(HankelResidual& h, const Eigen::MatrixXd& C3,
                const std::vector<std::vector<std::pair<int, int>>>& groups) {
    for (const auto& g : groups) {
        for (size_t k = 1; k < g.size(); ++k) add_eq(h, C3, g[k - 1].first, g[k - 1].second, g[k].first, g[k].second);
    }
}

struct ResidualFunctor {
    using Scalar = double;
    enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
    using InputType = Eigen::VectorXd;
    using ValueType = Eigen::VectorXd;
    using JacobianType = Eigen::MatrixXd;

    std::string relation;
    const MomentSequence* seq = nullptr;
    Eigen::MatrixXd M2;
    ToleranceConfig cfg;
    int n_in = 2, n_out = 1;

    int inputs() const { return n_in; }
    int values() const { return n_out; }

    static FlatParams unpack(const Eigen::VectorXd& x) {
        FlatParams p;
        p.p = x(0);
        p.q = x(1);
        if (x.size() > 2) p.r = x(2);
        return p;
    }

    HankelResidual eval(const FlatParams& p) const {
        const Eigen::MatrixXd B3 = build_B3(relation, *seq, p, cfg);
        return hankel_residuals(relation, compute_C3(relation, M2, B3, cfg), *seq);
    }

    int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& f) const {
        const HankelResidual h = eval(unpack(x));
        for (int i = 0; i < n_out; ++i) f(i) = h.equalities[i].second;
        return 0;
    }
};

}  // namespace

int flat_param_count(const std::string& relation) {
    check_relation(relation);
    return relation == "REL4" ? 3 : 2;
}

std::string flat_relation_shape(const std::string& relation) {
    check_relation(relation);
    if (relation == "REL1") return "Y2=1-X2";
    if (relation == "REL2") return "Y2=1+X2";
    if (relation == "REL3") return "XY+YX=0";
    return "Y2=1";
}

MomentSequence degree5_moments(const std::string& relation, const MomentSequence& seq, const FlatParams& prm) {
    check_relation(relation);
    MomentSequence out(5);
    const MomentSequence low = seq.truncated(4);
    for (const auto& [w, v] : low.entries()) out.assign(w, v);
    const double bx = seq.get("X"), by = seq.get("Y");
    const double bx3 = seq.get("XXX"), bx2y = seq.get("XXY");
    const double p = prm.p, q = prm.q;
    double x5 = p, x4y = q, x3y2 = 0, x2yxy = 0, x2y3 = 0, xy2xy = 0, xy4 = 0, y5 = 0;
    if (relation == "REL1" || relation == "REL2") {
        // Y^2 = 1 -+ X^2; s = -1 for REL1 and +1 for REL2.
        const double s = relation == "REL1" ? -1.0 : 1.0;
        x3y2 = x2yxy = bx3 + s * p;
        x2y3 = xy2xy = bx2y + s * q;
        xy4 = bx + 2.0 * s * bx3 + p;
        y5 = by + 2.0 * s * bx2y + q;
    } else if (relation == "REL3") {
        x4y = 0.0;
        y5 = q;
    } else {
        x2yxy = prm.r;
        x3y2 = bx3;
        x2y3 = xy2xy = bx2y;
        xy4 = bx;
        y5 = by;
    }
    out.assign("XXXXX", x5);
    out.assign("XXXXY", x4y);
    out.assign("XXXYY", x3y2);
    out.assign("XXYXY", x2yxy);
    out.assign("XXYYY", x2y3);
    out.assign("XYYXY", xy2xy);
    out.assign("XYYYY", xy4);
    out.assign("YYYYY", y5);
    return out;
}

Eigen::MatrixXd build_B3(const std::string& relation, const MomentSequence& seq, const FlatParams& params,
                         const ToleranceConfig& cfg) {
    const Eigen::MatrixXd M2 = moment_matrix(seq);
    const double res = relation_residual(M2, relation_vector(flat_relation_shape(relation)));
    if (res > cfg.span_tol) {
        std::ostringstream os;
        os << "M(2) does not satisfy " << flat_relation_shape(relation) << " (residual " << res << ")";
        throw std::invalid_argument(os.str());
    }
    const MomentSequence s5 = degree5_moments(relation, seq, params);
    const auto& rows = basis2();
    const auto& cols = basis3();
    Eigen::MatrixXd B3(7, 8);
    for (int i = 0; i < 7; ++i) {
        for (int j = 0; j < 8; ++j) B3(i, j) = s5.get(star(rows[i]) + cols[j]);
    }
    return B3;
}

std::vector<int> flat_column_basis(const std::string& relation) {
    check_relation(relation);
    // {1, X, Y, X^2, XY} plus YX, or plus Y^2 when XY and YX coincide up to sign.
    if (relation == "REL3") return {0, 1, 2, 3, 4, 6};
    return {0, 1, 2, 3, 4, 5};
}

Eigen::MatrixXd compute_C3(const std::string& relation, const Eigen::MatrixXd& M2, const Eigen::MatrixXd& B3,
                           const ToleranceConfig& cfg) {
    const std::vector<int> idx = flat_column_basis(relation);
    const int k = static_cast<int>(idx.size());
    Eigen::MatrixXd A(k, k), Bm(k, B3.cols());
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) A(i, j) = M2(idx[i], idx[j]);
        Bm.row(i) = B3.row(idx[i]);
    }
    if (numerical_rank(A, cfg) < k) {
        throw std::domain_error("principal block of M(2) on the column basis is singular");
    }
    const Eigen::MatrixXd W1 = A.ldlt().solve(Bm);
    const Eigen::MatrixXd C3 = W1.transpose() * A * W1;
    return 0.5 * (C3 + C3.transpose());
}

double HankelResidual::max_abs() const {
    double m = 0.0;
    for (const auto& e : equalities) m = std::max(m, std::abs(e.second));
    return m;
}

double HankelResidual::sum_squares() const {
    double s = 0.0;
    for (const auto& e : equalities) s += e.second * e.second;
    return s;
}

HankelResidual hankel_residuals(const std::string& relation, const Eigen::MatrixXd& C3, const MomentSequence& seq) {
    check_relation(relation);
    HankelResidual h;
    if (relation == "REL1" || relation == "REL2") {
        add_eq(h, C3, 4, 7, 6, 6);
        add_eq(h, C3, 2, 5, 3, 3);
        add_eq(h, C3, 1, 2, 1, 3);
        add_eq(h, C3, 1, 6, 2, 3);
        add_eq(h, C3, 4, 8, 6, 8);
        add_eq(h, C3, 1, 4, 2, 2);
        add_eq(h, C3, 2, 8, 4, 4);
        add_eq(h, C3, 2, 6, 2, 7);
    } else if (relation == "REL3") {
        add_value(h, C3, 1, 2, 0.0, "0");
        add_value(h, C3, 1, 3, 0.0, "0");
        add_eq(h, C3, 1, 8, 2, 4);
        add_eq(h, C3, 1, 6, 2, 3);
        add_eq(h, C3, 3, 8, 4, 6);
        add_value(h, C3, 4, 8, 0.0, "0");
        add_value(h, C3, 6, 8, 0.0, "0");
        add_eq(h, C3, 1, 4, 2, 2);
        add_eq(h, C3, 2, 8, 4, 4);
        add_eq(h, C3, 2, 6, 2, 7);
        add_eq(h, C3, 2, 7, 3, 4);
    } else {
        add_value(h, C3, 6, 6, seq.get("XX"), "beta_XX");
        add_eq(h, C3, 2, 5, 3, 3);
        add_eq(h, C3, 1, 2, 1, 3);
        add_eq(h, C3, 1, 6, 2, 3);
        add_value(h, C3, 2, 2, seq.get("XXXX"), "beta_XXXX");
        add_value(h, C3, 2, 6, seq.get("XXXY"), "beta_XXXY");
    }
    return h;
}

HankelResidual moment_structure_residuals(const Eigen::MatrixXd& C3) {
    HankelResidual h;
    add_groups(h, C3,
               {{{4, 7}, {6, 6}},
                {{2, 5}, {3, 3}},
                {{1, 2}, {1, 3}, {1, 5}},
                {{1, 8}, {2, 4}, {5, 7}},
                {{1, 6}, {2, 3}, {3, 5}},
                {{3, 8}, {4, 6}, {6, 7}},
                {{4, 8}, {6, 8}, {7, 8}},
                {{1, 4}, {1, 7}, {2, 2}, {5, 5}},
                {{2, 8}, {5, 8}, {4, 4}, {7, 7}},
                {{2, 6}, {2, 7}, {3, 4}, {3, 7}, {4, 5}, {5, 6}}});
    return h;
}

HankelResidual automatic_identities(const Eigen::MatrixXd& C3) {
    HankelResidual h;
    add_groups(h, C3,
               {{{1, 2}, {1, 5}},
                {{2, 4}, {5, 7}},
                {{2, 3}, {3, 5}},
                {{4, 6}, {6, 7}},
                {{4, 8}, {7, 8}},
                {{1, 4}, {1, 7}},
                {{2, 2}, {5, 5}},
                {{2, 8}, {5, 8}},
                {{4, 4}, {7, 7}},
                {{2, 6}, {5, 6}},
                {{2, 7}, {4, 5}},
                {{3, 4}, {3, 7}}});
    return h;
}

FlatResult flat_search(const std::string& relation, const MomentSequence& seq, const ToleranceConfig& cfg,
                       const FlatOptions& opt) {
    FlatResult out;
    const int np = flat_param_count(relation);
    ResidualFunctor f;
    f.relation = relation;
    f.seq = &seq;
    f.M2 = moment_matrix(seq);
    f.cfg = cfg;
    f.n_in = np;
    out.m2_rank = numerical_rank(f.M2, cfg);
    try {
        f.n_out = static_cast<int>(f.eval(FlatParams{}).equalities.size());
    } catch (const std::exception& e) {
        out.diagnostics.push_back(e.what());
        return out;
    }

    // Coarse 3x3 lattice scaled by the largest moment; the third parameter of
    // REL4 alternates sign across the lattice.
    double s = 0.0;
    for (const auto& [w, v] : seq.entries()) s = std::max(s, std::abs(v));
    s = std::max(s, 1.0);
    const double lat[3] = {-s, s / 3.0, s};
    double best = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_x = Eigen::VectorXd::Zero(np);
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            Eigen::VectorXd x(np);
            if (np == 2) {
                x << lat[a], lat[b];
            } else {
                x << lat[a], ((a + b) % 2 ? -s : s) / 7.0, lat[b];
            }
            Eigen::NumericalDiff<ResidualFunctor, Eigen::Central> nd(f);
            Eigen::LevenbergMarquardt<Eigen::NumericalDiff<ResidualFunctor, Eigen::Central>> lm(nd);
            lm.parameters.maxfev = opt.max_evals;
            lm.parameters.xtol = 1e-15;
            lm.parameters.ftol = 1e-15;
            lm.minimize(x);
            const double v = f.eval(ResidualFunctor::unpack(x)).sum_squares();
            if (v < best) {
                best = v;
                best_x = x;
            }
        }
    }
    out.params = ResidualFunctor::unpack(best_x);
    out.residuals = f.eval(out.params);
    out.min_residual = out.residuals.sum_squares();
    out.B3 = build_B3(relation, seq, out.params, cfg);
    out.C3 = compute_C3(relation, f.M2, out.B3, cfg);
    out.M3.resize(15, 15);
    out.M3 << f.M2, out.B3, out.B3.transpose(), out.C3;
    out.m3_psd = is_psd(out.M3, cfg).psd;
    out.m3_rank = numerical_rank(out.M3, cfg);
    const bool equalities_hold = out.residuals.max_abs() <= opt.tol;
    out.found = equalities_hold && out.m3_psd && out.m3_rank == out.m2_rank;
    if (!equalities_hold) {
        std::ostringstream os;
        os << "no flat extension with moment structure: smallest residual sum of squares " << out.min_residual;
        out.diagnostics.push_back(os.str());
    } else if (!out.found) {
        std::ostringstream os;
        os << "equalities hold but M3 is " << (out.m3_psd ? "" : "not PSD, ") << "rank " << out.m3_rank
           << " against rank " << out.m2_rank << " of M(2)";
        out.diagnostics.push_back(os.str());
    }
    return out;
}

}  // namespace tracial
