#include "tracial/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace tracial {

namespace {

Eigen::VectorXd sym_eigenvalues(const Eigen::MatrixXd& M) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()),
                                                      Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

double max_abs(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

RankInfo rank_info(const Eigen::MatrixXd& M, const ToleranceConfig& cfg) {
    RankInfo info;
    if (M.size() == 0) return info;
    const Eigen::VectorXd ev = sym_eigenvalues(M);
    const double top = max_abs(ev);
    if (top == 0.0) return info;
    info.cut = cfg.rank_tol * top;
    double closest = std::numeric_limits<double>::infinity();
    for (int i = 0; i < ev.size(); ++i) {
        const double a = std::abs(ev(i));
        if (a > info.cut) info.rank += 1;
        const double ratio = a > info.cut ? a / info.cut : info.cut / std::max(a, 1e-300);
        closest = std::min(closest, ratio);
    }
    info.gap_ratio = closest;
    info.borderline = closest < 10.0;
    return info;
}

int numerical_rank(const Eigen::MatrixXd& M, const ToleranceConfig& cfg) {
    return rank_info(M, cfg).rank;
}

PsdInfo is_psd(const Eigen::MatrixXd& M, const ToleranceConfig& cfg) {
    PsdInfo info;
    if (M.size() == 0) {
        info.psd = true;
        return info;
    }
    const Eigen::VectorXd ev = sym_eigenvalues(M);
    info.margin = ev(0);
    info.psd = ev(0) >= -cfg.psd_tol * std::max(max_abs(ev), 1e-300);
    return info;
}

const std::vector<std::pair<std::string, Eigen::VectorXd>>& canonical_relation_shapes() {
    static const std::vector<std::pair<std::string, Eigen::VectorXd>> shapes = [] {
        auto v = [](std::initializer_list<double> xs) {
            Eigen::VectorXd r(7);
            int i = 0;
            for (double x : xs) r(i++) = x;
            return r;
        };
        //                                1   X   Y  XX  XY  YX  YY
        return std::vector<std::pair<std::string, Eigen::VectorXd>>{
            {"X2+Y2=1", v({-1, 0, 0, 1, 0, 0, 1})},
            {"Y2=1", v({-1, 0, 0, 0, 0, 0, 1})},
            {"Y2-X2=1", v({-1, 0, 0, -1, 0, 0, 1})},
            {"Y2=X2", v({0, 0, 0, -1, 0, 0, 1})},
            {"XY+YX=0", v({0, 0, 0, 0, 1, 1, 0})},
            {"Y2=1-X2", v({-1, 0, 0, 1, 0, 0, 1})},
            {"Y2=1+X2", v({-1, 0, 0, -1, 0, 0, 1})},
        };
    }();
    return shapes;
}

Eigen::VectorXd relation_vector(const std::string& name) {
    for (const auto& [n, v] : canonical_relation_shapes()) {
        if (n == name) return v;
    }
    throw std::invalid_argument("unknown relation shape " + name);
}

double relation_residual(const Eigen::MatrixXd& M, const Eigen::VectorXd& p) {
    const double np = p.norm();
    if (np == 0.0) return 0.0;
    const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
    return (M * (p / np)).cwiseAbs().maxCoeff() / scale;
}

KernelInfo kernel_relations(const MomentMatrix& M2, const ToleranceConfig& cfg) {
    KernelInfo info;
    const Eigen::MatrixXd& M = M2.data;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()));
    const Eigen::VectorXd& ev = es.eigenvalues();
    const double cut = cfg.rank_tol * std::max(max_abs(ev), 1e-300);
    for (int i = 0; i < ev.size(); ++i) {
        if (std::abs(ev(i)) <= cut) {
            ColumnRelation rel;
            rel.coeffs = es.eigenvectors().col(i);
            rel.poly = vector_to_poly(rel.coeffs, 1e-12);
            info.relations.push_back(rel);
        }
    }
    for (const auto& [name, v] : canonical_relation_shapes()) {
        if (relation_residual(M, v) <= cfg.span_tol) info.shapes.push_back(name);
    }
    return info;
}

SpanFit express_in_span(const Eigen::MatrixXd& M, int target, const std::vector<int>& basis,
                        const ToleranceConfig& cfg) {
    SpanFit fit;
    const int k = static_cast<int>(basis.size());
    const int n = static_cast<int>(M.rows());
    const double scale = std::max(M.cwiseAbs().maxCoeff(), 1e-300);
    if (k == 0) {
        fit.coeffs = Eigen::VectorXd();
        fit.residual = M.col(target).cwiseAbs().maxCoeff() / scale;
        fit.in_span = fit.residual <= cfg.span_tol;
        return fit;
    }
    Eigen::MatrixXd A(k, k);
    Eigen::VectorXd b(k);
    for (int i = 0; i < k; ++i) {
        b(i) = M(basis[i], target);
        for (int j = 0; j < k; ++j) A(i, j) = M(basis[i], basis[j]);
    }
    fit.coeffs = A.colPivHouseholderQr().solve(b);
    Eigen::VectorXd r = M.col(target);
    for (int j = 0; j < k; ++j) r -= fit.coeffs(j) * M.col(basis[j]);
    (void)n;
    fit.residual = r.cwiseAbs().maxCoeff() / scale;
    fit.in_span = fit.residual <= cfg.span_tol;
    return fit;
}

std::vector<int> greedy_basis(const Eigen::MatrixXd& M, const std::vector<int>& order,
                              const ToleranceConfig& cfg) {
    std::vector<int> S;
    for (int idx : order) {
        if (!express_in_span(M, idx, S, cfg).in_span) S.push_back(idx);
    }
    return S;
}

AlphaDrop smallest_rank_drop_alpha(const Eigen::MatrixXd& M, const Eigen::MatrixXd& D,
                                   const ToleranceConfig& cfg) {
    AlphaDrop out;
    const Eigen::VectorXd ev0 = sym_eigenvalues(M);
    const double top = std::max(max_abs(ev0), 1e-300);
    const int r = numerical_rank(M, cfg);
    out.rank_before = r;
    if (r == 0) {
        out.message = "matrix is zero";
        return out;
    }
    const int n = static_cast<int>(M.rows());
    // Roundoff level of the eigenvalues; a crossing through zero shows up as
    // an eigenvalue below -noise just past the drop point. Inputs produced by
    // chains of affine maps can start with kernel eigenvalues slightly below
    // zero, so the level is raised to a multiple of that offset.
    const double noise = std::max(1e-13 * top, 10.0 * std::max(0.0, -ev0(0)));
    auto event = [&](double alpha) {
        const Eigen::VectorXd ev = sym_eigenvalues(M - alpha * D);
        return ev(n - r) <= 0.0 || ev(0) < -noise;
    };

    const double dscale = std::max(D.cwiseAbs().maxCoeff(), 1e-300);
    const double alpha_max = 1e8 * top / dscale;
    double lo = 0.0;
    double hi = 1e-10 * top / dscale;
    bool bracketed = false;
    while (hi <= alpha_max) {
        if (event(hi)) {
            bracketed = true;
            break;
        }
        lo = hi;
        hi *= 2.0;
    }
    if (!bracketed) {
        out.message = "no rank drop found along alpha > 0";
        return out;
    }
    for (int it = 0; it < 400 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
        const double m = 0.5 * (lo + hi);
        (event(m) ? hi : lo) = m;
    }
    out.alpha = 0.5 * (lo + hi);
    const Eigen::MatrixXd R = M - out.alpha * D;
    out.rank_after = numerical_rank(R, cfg);
    const PsdInfo p = is_psd(R, cfg);
    if (!p.psd || out.rank_after >= r) {
        out.psd_loss_alpha = out.alpha;
        std::ostringstream os;
        os << "M - alpha D loses positive semidefiniteness at alpha = " << out.alpha
           << " before the rank drops";
        out.message = os.str();
        return out;
    }
    out.ok = true;
    return out;
}

double rank_drop_alpha_generalized(const Eigen::MatrixXd& M, const Eigen::MatrixXd& D,
                                   const ToleranceConfig& cfg) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()));
    const Eigen::VectorXd& ev = es.eigenvalues();
    const double cut = cfg.rank_tol * std::max(max_abs(ev), 1e-300);
    std::vector<int> keep;
    for (int i = 0; i < ev.size(); ++i) {
        if (ev(i) > cut) keep.push_back(i);
    }
    const int k = static_cast<int>(keep.size());
    Eigen::MatrixXd U(M.rows(), k);
    for (int j = 0; j < k; ++j) U.col(j) = es.eigenvectors().col(keep[j]) / std::sqrt(ev(keep[j]));
    const Eigen::MatrixXd K = U.transpose() * D * U;
    const Eigen::VectorXd kev = sym_eigenvalues(K);
    const double lmax = kev(kev.size() - 1);
    return lmax > 0.0 ? 1.0 / lmax : std::numeric_limits<double>::infinity();
}

}  // namespace tracial
