#include "tracial/cmsolver.hpp"
#include "tracial/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <unsupported/Eigen/Polynomials>

namespace tracial {

namespace {

// (i, j) exponents of x^i y^j for the degree <= 4 moment vector.
const std::vector<std::pair<int, int>>& monomials4() {
    static const std::vector<std::pair<int, int>> m = [] {
        std::vector<std::pair<int, int>> out;
        for (int d = 0; d <= 4; ++d) {
            for (int i = d; i >= 0; --i) out.emplace_back(i, d - i);
        }
        return out;
    }();
    return m;
}

const std::pair<int, int> kBasis2[6] = {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};

double cm_moment(const MomentSequence& seq, int i, int j) {
    return seq.get(std::string(i, 'X') + std::string(j, 'Y'));
}

double ipow(double x, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= x;
    return r;
}

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

double conic_scale(double x, double y) { return 1.0 + x * x + y * y; }

bool on_all(const std::vector<Conic>& cs, double x, double y, double tol) {
    for (const auto& c : cs) {
        if (std::abs(eval_conic(c, x, y)) > tol * conic_scale(x, y)) return false;
    }
    return true;
}

void add_unique(std::vector<Eigen::Vector2d>& pts, const Eigen::Vector2d& p, double tol) {
    for (const auto& q : pts) {
        if ((q - p).norm() <= tol * (1.0 + p.norm())) return;
    }
    pts.push_back(p);
}

// Real roots of c0 + c1 t + c2 t^2 (degree read from the largest nonzero
// coefficient relative to tol).
std::vector<double> quadratic_roots(double c0, double c1, double c2, double tol) {
    const double s = std::max({std::abs(c0), std::abs(c1), std::abs(c2)});
    if (s == 0.0) return {};
    if (std::abs(c2) > tol * s) {
        const double disc = c1 * c1 - 4 * c2 * c0;
        if (disc < -tol * s * s) return {};
        const double sq = std::sqrt(std::max(0.0, disc));
        // Stable form avoiding cancellation.
        const double q = -0.5 * (c1 + (c1 >= 0 ? sq : -sq));
        std::vector<double> r;
        if (q != 0.0) {
            r.push_back(q / c2);
            r.push_back(c0 / q);
        } else {
            r.push_back(0.0);
        }
        return r;
    }
    if (std::abs(c1) > tol * s) return {-c0 / c1};
    return {};
}

// Gauss-Newton refinement of a common zero of all conics.
Eigen::Vector2d refine(const std::vector<Conic>& cs, Eigen::Vector2d p) {
    for (int it = 0; it < 20; ++it) {
        Eigen::MatrixXd J(cs.size(), 2);
        Eigen::VectorXd f(cs.size());
        for (size_t k = 0; k < cs.size(); ++k) {
            const Conic& c = cs[k];
            f(k) = eval_conic(c, p.x(), p.y());
            J(k, 0) = c(1) + 2 * c(3) * p.x() + c(4) * p.y();
            J(k, 1) = c(2) + c(4) * p.x() + 2 * c(5) * p.y();
        }
        const Eigen::Vector2d step = J.completeOrthogonalDecomposition().solve(f);
        if (!step.allFinite()) break;
        p -= step;
        if (step.norm() < 1e-15 * (1.0 + p.norm())) break;
    }
    return p;
}

Conic rotate_conic(const Conic& c, double th) {
    // q(u,v) = p(x,y) with x = cos u - sin v, y = sin u + cos v.
    const double co = std::cos(th), si = std::sin(th);
    Conic r = Conic::Zero();
    r(0) = c(0);
    r(1) = c(1) * co + c(2) * si;
    r(2) = -c(1) * si + c(2) * co;
    r(3) = c(3) * co * co + c(4) * co * si + c(5) * si * si;
    r(4) = -2 * c(3) * co * si + c(4) * (co * co - si * si) + 2 * c(5) * si * co;
    r(5) = c(3) * si * si - c(4) * si * co + c(5) * co * co;
    return r;
}

Eigen::Vector2d unrotate(const Eigen::Vector2d& uv, double th) {
    const double co = std::cos(th), si = std::sin(th);
    return {co * uv.x() - si * uv.y(), si * uv.x() + co * uv.y()};
}

// Linear forms l0 + l1 x + l2 y in the span of the conics.
std::vector<Eigen::Vector3d> linear_members(const std::vector<Conic>& cs) {
    const int k = static_cast<int>(cs.size());
    Eigen::MatrixXd Q(3, k);
    for (int j = 0; j < k; ++j) Q.col(j) = cs[j].tail<3>();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(Q);
    lu.setThreshold(1e-9);
    const Eigen::MatrixXd N = lu.kernel();
    std::vector<Eigen::Vector3d> out;
    if (N.cols() == 1 && N.norm() == 0.0) return out;
    for (int c = 0; c < N.cols(); ++c) {
        Conic p = Conic::Zero();
        for (int j = 0; j < k; ++j) p += N(j, c) * cs[j];
        Eigen::Vector3d l = p.head<3>();
        if (l.norm() > 0) out.push_back(l / l.norm());
    }
    return out;
}

struct Line {
    Eigen::Vector2d p0, d;
};

Line line_of(const Eigen::Vector3d& l) {
    const Eigen::Vector2d n(l(1), l(2));
    const double nn = n.squaredNorm();
    return {-l(0) * n / nn, Eigen::Vector2d(-n.y(), n.x()) / std::sqrt(nn)};
}

// Coefficients (c0, c1, c2) of t -> p(p0 + t d).
Eigen::Vector3d restrict_to_line(const Conic& p, const Line& L) {
    auto at = [&](double t) {
        const Eigen::Vector2d q = L.p0 + t * L.d;
        return eval_conic(p, q.x(), q.y());
    };
    const double f0 = at(0.0), f1 = at(1.0), fm = at(-1.0);
    return {f0, 0.5 * (f1 - fm), 0.5 * (f1 + fm) - f0};
}

}  // namespace

double eval_conic(const Conic& p, double x, double y) {
    return p(0) + p(1) * x + p(2) * y + p(3) * x * x + p(4) * x * y + p(5) * y * y;
}

Eigen::MatrixXd commutative_moment_matrix(const MomentSequence& seq) {
    Eigen::MatrixXd M(6, 6);
    for (int r = 0; r < 6; ++r) {
        for (int c = 0; c < 6; ++c) {
            M(r, c) = cm_moment(seq, kBasis2[r].first + kBasis2[c].first,
                                kBasis2[r].second + kBasis2[c].second);
        }
    }
    return M;
}

Eigen::VectorXd point_moment_vector(double x, double y) {
    const auto& m = monomials4();
    Eigen::VectorXd v(m.size());
    for (size_t k = 0; k < m.size(); ++k) v(k) = ipow(x, m[k].first) * ipow(y, m[k].second);
    return v;
}

Eigen::VectorXd sequence_moment_vector(const MomentSequence& seq) {
    const auto& m = monomials4();
    Eigen::VectorXd v(m.size());
    for (size_t k = 0; k < m.size(); ++k) v(k) = cm_moment(seq, m[k].first, m[k].second);
    return v;
}

Measure points_to_measure(const std::vector<WeightedPoint>& pts) {
    Measure mu;
    for (const auto& p : pts) mu.atoms.push_back(Atom::point(p.x, p.y, p.weight));
    return mu;
}

Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, int max_iter) {
    const int n = static_cast<int>(A.cols());
    if (max_iter <= 0) max_iter = 3 * n + 30;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    std::vector<bool> passive(n, false);
    const double tol = 1e-12 * std::max(1.0, A.cwiseAbs().maxCoeff()) * std::max(1.0, b.norm());
    auto solve_passive = [&](Eigen::VectorXd& z) {
        std::vector<int> idx;
        for (int j = 0; j < n; ++j) {
            if (passive[j]) idx.push_back(j);
        }
        z = Eigen::VectorXd::Zero(n);
        if (idx.empty()) return;
        Eigen::MatrixXd Ap(A.rows(), idx.size());
        for (size_t k = 0; k < idx.size(); ++k) Ap.col(k) = A.col(idx[k]);
        const Eigen::VectorXd zp = Ap.colPivHouseholderQr().solve(b);
        for (size_t k = 0; k < idx.size(); ++k) z(idx[k]) = zp(k);
    };
    for (int outer = 0; outer < max_iter; ++outer) {
        const Eigen::VectorXd w = A.transpose() * (b - A * x);
        int best = -1;
        double wmax = tol;
        for (int j = 0; j < n; ++j) {
            if (!passive[j] && w(j) > wmax) {
                wmax = w(j);
                best = j;
            }
        }
        if (best < 0) break;
        passive[best] = true;
        for (int inner = 0; inner < max_iter; ++inner) {
            Eigen::VectorXd z;
            solve_passive(z);
            bool feasible = true;
            for (int j = 0; j < n; ++j) {
                if (passive[j] && z(j) <= 0.0) feasible = false;
            }
            if (feasible) {
                x = z;
                break;
            }
            double alpha = 1.0;
            for (int j = 0; j < n; ++j) {
                if (passive[j] && z(j) <= 0.0) alpha = std::min(alpha, x(j) / (x(j) - z(j)));
            }
            x += alpha * (z - x);
            for (int j = 0; j < n; ++j) {
                if (passive[j] && x(j) <= 1e-15) {
                    passive[j] = false;
                    x(j) = 0.0;
                }
            }
        }
    }
    return x;
}

bool finite_variety(const std::vector<Conic>& conics_in, std::vector<Eigen::Vector2d>& pts, double tol) {
    pts.clear();
    std::vector<Conic> cs;
    for (const auto& c : conics_in) {
        if (c.norm() > 0) cs.push_back(c / c.norm());
    }
    if (cs.empty()) return false;

    const auto lins = linear_members(cs);
    for (const auto& l : lins) {
        if (std::hypot(l(1), l(2)) <= tol) return true;  // nonzero constant: empty set
    }
    if (!lins.empty()) {
        const Line L = line_of(lins.front());
        bool all_zero = true;
        std::vector<double> cand;
        for (const auto& c : cs) {
            const Eigen::Vector3d r = restrict_to_line(c, L);
            if (r.cwiseAbs().maxCoeff() <= tol) continue;
            all_zero = false;
            cand = quadratic_roots(r(0), r(1), r(2), tol);
            break;
        }
        if (all_zero) return false;
        for (double t : cand) {
            const Eigen::Vector2d p = refine(cs, L.p0 + t * L.d);
            if (on_all(cs, p.x(), p.y(), 1e3 * tol)) add_unique(pts, p, 1e-9);
        }
        return true;
    }

    // Only genuine conics from here on. A generic rotation makes the y^2
    // coefficient of every member nonzero.
    const double th = 0.5235987755982988 * 0.7390851332151607;
    std::vector<Conic> rc;
    for (const auto& c : cs) rc.push_back(rotate_conic(c, th));

    if (rc.size() == 1) {
        const Conic& p = rc.front();
        Eigen::Matrix2d Q;
        Q << p(3), 0.5 * p(4), 0.5 * p(4), p(5);
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(Q);
        const Eigen::Vector2d lam = es.eigenvalues();
        const double qs = lam.cwiseAbs().maxCoeff();
        if (lam(0) * lam(1) > tol * qs * qs) {
            // Definite: ellipse, point or empty.
            const Eigen::Vector2d center = -0.5 * Q.inverse() * Eigen::Vector2d(p(1), p(2));
            const double val = eval_conic(p, center.x(), center.y());
            if (std::abs(val) <= tol * conic_scale(center.x(), center.y())) {
                pts.push_back(unrotate(center, th));
                return true;
            }
            if (val * lam(0) > 0) return true;  // empty
            return false;
        }
        if (std::abs(lam(0)) <= tol * qs || std::abs(lam(1)) <= tol * qs) {
            // Parabolic type: rotate onto the eigenbasis, p = l u^2 + d u + e v + f.
            const int nz = std::abs(lam(0)) > std::abs(lam(1)) ? 0 : 1;
            const Eigen::Vector2d eu = es.eigenvectors().col(nz);
            const Eigen::Vector2d ev = es.eigenvectors().col(1 - nz);
            const double e = p(1) * ev.x() + p(2) * ev.y();
            if (std::abs(e) > tol) return false;  // parabola
            const double d = p(1) * eu.x() + p(2) * eu.y();
            if (quadratic_roots(p(0), d, lam(nz), tol).empty()) return true;  // empty
            return false;  // one or two parallel lines
        }
        return false;  // indefinite: hyperbola or crossing lines
    }

    // Pairwise resultant in y of the first two members.
    auto parts = [](const Conic& c) {
        // p = A y^2 + (b0 + b1 x) y + (c0 + c1 x + c2 x^2)
        struct P {
            double A;
            Eigen::Vector2d B;
            Eigen::Vector3d C;
        };
        return P{c(5), Eigen::Vector2d(c(2), c(4)), Eigen::Vector3d(c(0), c(1), c(3))};
    };
    auto pmul = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        Eigen::VectorXd r = Eigen::VectorXd::Zero(a.size() + b.size() - 1);
        for (int i = 0; i < a.size(); ++i) {
            for (int j = 0; j < b.size(); ++j) r(i + j) += a(i) * b(j);
        }
        return r;
    };
    auto pad = [](Eigen::VectorXd a, int n) {
        Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
        r.head(a.size()) = a;
        return r;
    };
    bool any_finite_pair = false;
    std::vector<Eigen::Vector2d> cand;
    for (size_t i = 0; i < rc.size() && !any_finite_pair; ++i) {
        for (size_t j = i + 1; j < rc.size() && !any_finite_pair; ++j) {
            const auto p1 = parts(rc[i]);
            const auto p2 = parts(rc[j]);
            // Res = (A1 C2 - A2 C1)^2 - (A1 B2 - A2 B1)(B1 C2 - B2 C1)
            const Eigen::VectorXd u = p1.A * p2.C - p2.A * p1.C;
            const Eigen::VectorXd v = p1.A * p2.B - p2.A * p1.B;
            const Eigen::VectorXd w = pmul(p1.B, p2.C) - pmul(p2.B, p1.C);
            const Eigen::VectorXd res = pad(pmul(u, u), 5) - pad(pmul(v, w), 5);
            if (res.cwiseAbs().maxCoeff() <= tol) continue;
            any_finite_pair = true;
            int deg = 4;
            while (deg > 0 && std::abs(res(deg)) <= tol * res.cwiseAbs().maxCoeff()) --deg;
            std::vector<double> xs;
            if (deg >= 1) {
                Eigen::PolynomialSolver<double, Eigen::Dynamic> solver;
                solver.compute(res.head(deg + 1));
                for (int k = 0; k < solver.roots().size(); ++k) {
                    const auto z = solver.roots()(k);
                    if (std::abs(z.imag()) <= 1e-6 * (1.0 + std::abs(z.real()))) xs.push_back(z.real());
                }
            }
            for (double x : xs) {
                for (const Conic* c : {&rc[i], &rc[j]}) {
                    const auto pc = parts(*c);
                    const double b = pc.B(0) + pc.B(1) * x;
                    const double cc = pc.C(0) + pc.C(1) * x + pc.C(2) * x * x;
                    for (double y : quadratic_roots(cc, b, pc.A, tol)) cand.emplace_back(x, y);
                }
            }
        }
    }
    if (!any_finite_pair) return false;
    for (const auto& c : cand) {
        const Eigen::Vector2d p = refine(rc, c);
        if (on_all(rc, p.x(), p.y(), 1e3 * tol)) add_unique(pts, p, 1e-8);
    }
    for (auto& p : pts) p = unrotate(p, th);
    return true;
}

namespace {

std::vector<Conic> unit_conics(const std::vector<Conic>& cs) {
    std::vector<Conic> unit;
    for (const auto& c : cs) unit.push_back(c / c.norm());
    return unit;
}

// Points of the variety with abscissa in xs or ordinate in ys, solved
// against the first conic (or taken along the line) and filtered by all.
std::vector<Eigen::Vector2d> points_at(const std::vector<Conic>& unit, const std::vector<double>& xs,
                                       const std::vector<double>& ys) {
    std::vector<Eigen::Vector2d> out;
    const double tol = 1e-9;
    const auto lins = linear_members(unit);
    if (!lins.empty()) {
        const Line L = line_of(lins.front());
        // Parametrize by the coordinate with the larger direction component.
        const bool by_x = std::abs(L.d.x()) >= std::abs(L.d.y());
        for (double v : by_x ? xs : ys) {
            const double t = by_x ? (v - L.p0.x()) / L.d.x() : (v - L.p0.y()) / L.d.y();
            const Eigen::Vector2d p = L.p0 + t * L.d;
            if (on_all(unit, p.x(), p.y(), tol)) add_unique(out, p, 1e-13);
        }
        return out;
    }
    const Conic& p = unit.front();
    for (double x : xs) {
        for (double y : quadratic_roots(p(0) + p(1) * x + p(3) * x * x, p(2) + p(4) * x, p(5), 1e-12)) {
            if (on_all(unit, x, y, tol)) add_unique(out, {x, y}, 1e-13);
        }
    }
    for (double y : ys) {
        for (double x : quadratic_roots(p(0) + p(2) * y + p(5) * y * y, p(1) + p(4) * y, p(3), 1e-12)) {
            if (on_all(unit, x, y, tol)) add_unique(out, {x, y}, 1e-13);
        }
    }
    return out;
}

// Deterministic candidates on an infinite variety: abscissa and ordinate
// grids on [-R, R], plus equally spaced angles on ellipses.
std::vector<Eigen::Vector2d> sample_variety(const std::vector<Conic>& unit, int n, double R) {
    std::vector<double> grid;
    for (int k = 0; k < n; ++k) grid.push_back(n == 1 ? 0.0 : -R + 2.0 * R * k / (n - 1));
    std::vector<Eigen::Vector2d> out = points_at(unit, grid, grid);
    if (!linear_members(unit).empty()) return out;
    const Conic& p = unit.front();
    Eigen::Matrix2d Q;
    Q << p(3), 0.5 * p(4), 0.5 * p(4), p(5);
    if (Q.determinant() > 1e-12) {
        const Eigen::Vector2d center = -0.5 * Q.inverse() * Eigen::Vector2d(p(1), p(2));
        const double val = eval_conic(p, center.x(), center.y());
        for (int k = 0; k < 2 * n; ++k) {
            const double t = 2.0 * M_PI * k / (2 * n);
            const Eigen::Vector2d dir(std::cos(t), std::sin(t));
            // p(center + s dir) = val + s^2 dir^T Q dir
            const double q = dir.dot(Q * dir);
            if (-val / q > 0) {
                const Eigen::Vector2d pt = center + std::sqrt(-val / q) * dir;
                if (on_all(unit, pt.x(), pt.y(), 1e-9)) add_unique(out, pt, 1e-13);
            }
        }
    }
    return out;
}

// Variety points within a few steps h of each support point.
std::vector<Eigen::Vector2d> local_samples(const std::vector<Conic>& unit, const std::vector<Eigen::Vector2d>& centers,
                                           double h) {
    std::vector<Eigen::Vector2d> out;
    for (const auto& c : centers) {
        std::vector<double> xs, ys;
        for (int j = -4; j <= 4; ++j) {
            xs.push_back(c.x() + j * h);
            ys.push_back(c.y() + j * h);
        }
        for (const auto& p : points_at(unit, xs, ys)) {
            if ((p - c).norm() <= 12.0 * h) add_unique(out, p, 1e-13);
        }
    }
    return out;
}

Eigen::MatrixXd moment_columns(const std::vector<Eigen::Vector2d>& pts) {
    Eigen::MatrixXd A(monomials4().size(), pts.size());
    for (size_t k = 0; k < pts.size(); ++k) A.col(k) = point_moment_vector(pts[k].x(), pts[k].y());
    return A;
}

// NNLS with unit-norm column scaling; returns weights for the original columns.
Eigen::VectorXd scaled_nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
    Eigen::VectorXd s(A.cols());
    Eigen::MatrixXd As = A;
    for (int j = 0; j < A.cols(); ++j) {
        s(j) = A.col(j).norm();
        As.col(j) /= s(j);
    }
    Eigen::VectorXd x = nnls(As, b);
    return x.cwiseQuotient(s);
}

struct Support {
    std::vector<Eigen::Vector2d> pts;
    Eigen::VectorXd w;
};

Support support_of(const std::vector<Eigen::Vector2d>& pts, const Eigen::VectorXd& w) {
    Support s;
    const double wmax = w.size() ? w.maxCoeff() : 0.0;
    std::vector<double> ws;
    for (int k = 0; k < w.size(); ++k) {
        if (w(k) > 1e-13 * wmax) {
            s.pts.push_back(pts[k]);
            ws.push_back(w(k));
        }
    }
    s.w = Eigen::Map<Eigen::VectorXd>(ws.data(), ws.size());
    return s;
}

double residual_of(const Support& s, const Eigen::VectorXd& b) {
    if (s.pts.empty()) return b.cwiseAbs().maxCoeff();
    return (moment_columns(s.pts) * s.w - b).cwiseAbs().maxCoeff();
}

// Caratheodory reduction: drops atoms while their moment vectors are dependent.
void caratheodory(Support& s) {
    for (int guard = 0; guard < 64; ++guard) {
        const Eigen::MatrixXd A = moment_columns(s.pts);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
        lu.setThreshold(1e-10);
        if (lu.rank() == static_cast<int>(s.pts.size())) return;
        Eigen::VectorXd z = lu.kernel().col(0);
        if (z.maxCoeff() <= 0) z = -z;
        double t = std::numeric_limits<double>::infinity();
        for (int k = 0; k < z.size(); ++k) {
            if (z(k) > 0) t = std::min(t, s.w(k) / z(k));
        }
        s.w -= t * z;
        Support next;
        std::vector<double> ws;
        for (int k = 0; k < s.w.size(); ++k) {
            if (s.w(k) > 1e-14) {
                next.pts.push_back(s.pts[k]);
                ws.push_back(s.w(k));
            }
        }
        next.w = Eigen::Map<Eigen::VectorXd>(ws.data(), ws.size());
        s = next;
    }
}

Eigen::Vector2d conic_gradient(const Conic& p, const Eigen::Vector2d& q) {
    return {p(1) + 2 * p(3) * q.x() + p(4) * q.y(), p(2) + p(4) * q.x() + 2 * p(5) * q.y()};
}

// Merges atoms closer than tol into their weighted mean.
Support merge_close(const Support& s, double tol) {
    Support out;
    std::vector<double> ws;
    for (size_t k = 0; k < s.pts.size(); ++k) {
        bool merged = false;
        for (size_t j = 0; j < out.pts.size() && !merged; ++j) {
            if ((out.pts[j] - s.pts[k]).norm() < tol) {
                out.pts[j] = (ws[j] * out.pts[j] + s.w(k) * s.pts[k]) / (ws[j] + s.w(k));
                ws[j] += s.w(k);
                merged = true;
            }
        }
        if (!merged) {
            out.pts.push_back(s.pts[k]);
            ws.push_back(s.w(k));
        }
    }
    out.w = Eigen::Map<Eigen::VectorXd>(ws.data(), ws.size());
    return out;
}

// Gauss-Newton on atoms and weights with minimum-norm steps. Each atom moves
// in the span of dirs(q) (one tangent direction on a curve, two in the plane)
// and is mapped back by settle. Weights stay positive; an atom whose weight
// collapses is removed.
template <class Dirs, class Settle>
void gauss_newton(Support& s, const Eigen::VectorXd& b, int iters, Dirs dirs, Settle settle) {
    const auto& m = monomials4();
    auto residual = [&](const std::vector<Eigen::Vector2d>& P, const Eigen::VectorXd& W) {
        Eigen::VectorXd r = -b;
        for (size_t i = 0; i < P.size(); ++i) r += W(i) * point_moment_vector(P[i].x(), P[i].y());
        return r;
    };
    Eigen::VectorXd r = residual(s.pts, s.w);
    const double stop = 1e-15 * std::max(1.0, b.norm());
    for (int it = 0; it < iters && r.norm() > stop && !s.pts.empty(); ++it) {
        const int n = static_cast<int>(s.pts.size());
        std::vector<std::vector<Eigen::Vector2d>> D(n);
        int cols = 0;
        for (int i = 0; i < n; ++i) {
            D[i] = dirs(s.pts[i]);
            cols += static_cast<int>(D[i].size()) + 1;
        }
        Eigen::MatrixXd J(m.size(), cols);
        int c0 = 0;
        for (int i = 0; i < n; ++i) {
            const double x = s.pts[i].x(), y = s.pts[i].y();
            for (size_t k = 0; k < m.size(); ++k) {
                const int a = m[k].first, c = m[k].second;
                const double dx = a ? a * ipow(x, a - 1) * ipow(y, c) : 0.0;
                const double dy = c ? c * ipow(x, a) * ipow(y, c - 1) : 0.0;
                for (size_t d = 0; d < D[i].size(); ++d) {
                    J(k, c0 + d) = s.w(i) * (dx * D[i][d].x() + dy * D[i][d].y());
                }
                J(k, c0 + D[i].size()) = ipow(x, a) * ipow(y, c);
            }
            c0 += static_cast<int>(D[i].size()) + 1;
        }
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(J);
        cod.setThreshold(1e-12);
        const Eigen::VectorXd step = cod.solve(-r);
        // Fraction to the boundary w > 0.
        double tmax = 1.0;
        c0 = 0;
        for (int i = 0; i < n; ++i) {
            const double dw = step(c0 + D[i].size());
            if (dw < 0) tmax = std::min(tmax, 0.95 * s.w(i) / -dw);
            c0 += static_cast<int>(D[i].size()) + 1;
        }
        bool improved = false;
        for (double t = tmax; t > 1e-9 * tmax && !improved; t *= 0.5) {
            std::vector<Eigen::Vector2d> P(n);
            Eigen::VectorXd W(n);
            c0 = 0;
            for (int i = 0; i < n; ++i) {
                Eigen::Vector2d q = s.pts[i];
                for (size_t d = 0; d < D[i].size(); ++d) q += t * step(c0 + d) * D[i][d];
                P[i] = settle(q);
                W(i) = s.w(i) + t * step(c0 + D[i].size());
                c0 += static_cast<int>(D[i].size()) + 1;
            }
            const Eigen::VectorXd rn = residual(P, W);
            if (rn.norm() < r.norm()) {
                s.pts = P;
                s.w = W;
                r = rn;
                improved = true;
            }
        }
        if (!improved) break;
        const double wmax = s.w.maxCoeff();
        if (s.w.minCoeff() < 1e-10 * wmax) {
            s = support_of(s.pts, s.w.cwiseMax(0.0).unaryExpr([&](double v) { return v < 1e-10 * wmax ? 0.0 : v; }));
            r = residual(s.pts, s.w);
        }
    }
}

// Gauss-Newton refinement of a support: first along the variety (atoms move
// on the kernel conics), then in the plane, since the kernel conics carry the
// conditioning of M(2) and may be slightly off the true curve.
Support polish(const Support& s0, const std::vector<Conic>& unit, const Eigen::VectorXd& b) {
    const auto lins = linear_members(unit);
    auto tangent = [&](const Eigen::Vector2d& q) -> std::vector<Eigen::Vector2d> {
        if (!lins.empty()) return {line_of(lins.front()).d};
        const Eigen::Vector2d g = conic_gradient(unit.front(), q);
        if (g.norm() == 0.0) return {Eigen::Vector2d(1.0, 0.0)};
        return {Eigen::Vector2d(-g.y(), g.x()) / g.norm()};
    };
    auto project = [&](Eigen::Vector2d q) {
        for (int it = 0; it < 30; ++it) {
            double worst = 0.0;
            for (const auto& c : unit) {
                const Eigen::Vector2d g = conic_gradient(c, q);
                const double f = eval_conic(c, q.x(), q.y());
                worst = std::max(worst, std::abs(f));
                if (g.squaredNorm() > 0) q -= f * g / g.squaredNorm();
            }
            if (worst < 1e-15 * conic_scale(q.x(), q.y())) break;
        }
        return q;
    };
    auto plane = [](const Eigen::Vector2d&) -> std::vector<Eigen::Vector2d> {
        return {Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(0.0, 1.0)};
    };
    auto identity = [](const Eigen::Vector2d& q) { return q; };
    Support s = merge_close(s0, 1e-4);
    gauss_newton(s, b, 20, tangent, project);
    gauss_newton(s, b, 100, plane, identity);
    return s;
}

}  // namespace

CmReport cm_solve(const MomentSequence& seq, const ToleranceConfig& cfg, const CmOptions& opt) {
    CmReport rep;
    const double comm_gap = std::abs(seq.get("XXYY") - seq.get("XYXY"));
    if (comm_gap > cfg.match_tol * std::max(1.0, std::abs(seq.get("XXYY")))) {
        throw std::invalid_argument("cm_solve needs a commutative sequence (beta_XXYY != beta_XYXY)");
    }
    const Eigen::MatrixXd M = commutative_moment_matrix(seq);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    const Eigen::VectorXd ev = es.eigenvalues();
    const double top = std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
    rep.psd = ev(0) >= -cfg.psd_tol * top;
    for (int i = 0; i < 6; ++i) {
        if (ev(i) > cfg.rank_tol * top) {
            ++rep.rank;
        } else {
            rep.kernel.push_back(es.eigenvectors().col(i));
        }
    }
    if (rep.kernel.empty()) {
        throw std::domain_error("commutative moment matrix has no column relation; outside the supported scope");
    }
    if (!rep.psd) {
        rep.diagnostics.push_back("M(2) is not positive semidefinite (min eigenvalue " + fmt(ev(0)) + ")");
        return rep;
    }

    // Recursive generation: x l and y l must be relations for every linear relation l.
    rep.recursively_generated = true;
    for (const auto& l : linear_members(rep.kernel)) {
        for (int var = 0; var < 2; ++var) {
            Conic q = Conic::Zero();
            if (var == 0) {
                q(1) = l(0); q(3) = l(1); q(4) = l(2);
            } else {
                q(2) = l(0); q(4) = l(1); q(5) = l(2);
            }
            const double res = (M * q).norm() / (top * q.norm());
            if (res > cfg.span_tol) {
                rep.recursively_generated = false;
                std::ostringstream os;
                os << "recursive generation fails: " << (var == 0 ? "x" : "y") << " * (" << l(0) << " + "
                   << l(1) << " x + " << l(2) << " y) is not a column relation (residual " << res << ")";
                rep.diagnostics.push_back(os.str());
            }
        }
    }
    if (!rep.recursively_generated) return rep;

    const Eigen::VectorXd b = sequence_moment_vector(seq);
    std::vector<Eigen::Vector2d> vpts;
    const bool finite = finite_variety(rep.kernel, vpts, 1e-9);
    rep.variety_card = finite ? static_cast<int>(vpts.size()) : -1;
    if (finite && rep.rank > rep.variety_card) {
        rep.diagnostics.push_back("rank " + std::to_string(rep.rank) + " exceeds the variety cardinality " +
                                  std::to_string(rep.variety_card));
        return rep;
    }

    auto accept = [&](Support s) {
        caratheodory(s);
        rep.points.clear();
        for (size_t k = 0; k < s.pts.size(); ++k) rep.points.push_back({s.pts[k].x(), s.pts[k].y(), s.w(k)});
        rep.residual = residual_of(s, b);
        rep.admits = rep.residual <= cfg.match_tol;
        return rep.admits;
    };

    if (finite) {
        Support s = support_of(vpts, scaled_nnls(moment_columns(vpts), b));
        if (!accept(s)) {
            rep.diagnostics.push_back("no nonnegative combination of the " + std::to_string(vpts.size()) +
                                      " variety points matches the moments (residual " + fmt(rep.residual) + ")");
        }
        return rep;
    }

    // Extraction runs in centred, unit-variance coordinates; the points are
    // mapped back and checked against the original moments.
    const double mx = seq.get("X") / seq.get(""), my = seq.get("Y") / seq.get("");
    const double sx = std::sqrt(std::max(seq.get("XX") / seq.get("") - mx * mx, 1e-12));
    const double sy = std::sqrt(std::max(seq.get("YY") / seq.get("") - my * my, 1e-12));
    const AffineMap to_norm = AffineMap::general(-mx / sx, 1.0 / sx, 0.0, -my / sy, 0.0, 1.0 / sy);
    const MomentSequence nseq = apply_affine(seq, to_norm);
    const Eigen::VectorXd nb = sequence_moment_vector(nseq);
    std::vector<Conic> nkernel;
    {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> nes(commutative_moment_matrix(nseq));
        for (int i = 0; i < 6 - rep.rank; ++i) nkernel.push_back(nes.eigenvectors().col(i));
    }
    const std::vector<Conic> unit = unit_conics(nkernel);
    auto to_original = [&](const Support& s) {
        Support o = s;
        for (auto& p : o.pts) p = Eigen::Vector2d(mx + sx * p.x(), my + sy * p.y());
        return o;
    };
    const std::vector<Conic> ounit = unit_conics(rep.kernel);
    auto on_variety = [&] {
        for (const auto& p : rep.points) {
            if (!on_all(ounit, p.x, p.y, 1e-7)) return false;
        }
        return true;
    };
    const double m4 = std::max(nseq.get("XXXX"), nseq.get("YYYY")) / nseq.get("");
    double R = 2.0 * std::pow(std::max(m4, 1e-12), 0.25) + 1.0;
    int n = opt.samples;
    for (int attempt = 0; attempt < 2; ++attempt, n *= 2, R *= 2) {
        std::vector<Eigen::Vector2d> cand = sample_variety(unit, n, R);
        if (cand.size() < static_cast<size_t>(rep.rank)) continue;
        // Column generation: refine the candidate set around the current support.
        double h = 2.0 * R / n;
        Support s;
        for (int round = 0; round < 8; ++round, h *= 0.25) {
            s = support_of(cand, scaled_nnls(moment_columns(cand), nb));
            if (accept(to_original(s)) && on_variety()) return rep;
            std::vector<Eigen::Vector2d> next = s.pts;
            for (const auto& p : local_samples(unit, s.pts, h)) add_unique(next, p, 1e-13);
            cand = next;
        }
        if (opt.allow_polish && !s.pts.empty()) {
            if (accept(to_original(polish(s, unit, nb))) && on_variety()) return rep;
            rep.admits = false;
        }
    }
    rep.diagnostics.push_back("sampling-limited: no representing measure found on the sampled variety "
                              "(residual " + fmt(rep.residual) + ")");
    return rep;
}

}  // namespace tracial
