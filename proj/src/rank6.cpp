#include "tracial/rank6.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "tracial/rank4.hpp"
#include "tracial/rank5.hpp"
#include "tracial/transforms.hpp"

namespace tracial {

namespace {

constexpr int kOne = 0, kX = 1, kY = 2, kXX = 3, kXY = 4, kYX = 5, kYY = 6;

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

double min_eig(const Eigen::MatrixXd& A) {
    if (A.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

Eigen::MatrixXd block(const Eigen::MatrixXd& M, const std::vector<int>& idx) {
    Eigen::MatrixXd B(idx.size(), idx.size());
    for (size_t i = 0; i < idx.size(); ++i)
        for (size_t j = 0; j < idx.size(); ++j) B(i, j) = M(idx[i], idx[j]);
    return B;
}

double scale_of(const Eigen::MatrixXd& M) { return std::max(1.0, M.cwiseAbs().maxCoeff()); }

const std::vector<std::string> kRelations = {"REL1", "REL2", "REL3", "REL4"};

void check_relation(const std::string& rel) {
    if (std::find(kRelations.begin(), kRelations.end(), rel) == kRelations.end()) {
        throw std::invalid_argument("unknown rank-6 relation '" + rel + "'");
    }
}

// Columns of a commutative moment matrix of the relation that are independent
// generically; the remaining ones are fixed combinations of these.
std::vector<int> independent_columns(const std::string& rel) {
    if (rel == "REL3") return {kOne, kX, kY, kXX, kYY};
    return {kOne, kX, kY, kXX, kXY};
}

struct Normalized {
    MomentSequence seq;
    double mass = 1.0;
    Eigen::MatrixXd M;
};

Normalized normalize(const std::string& rel, const MomentSequence& seq, const ToleranceConfig& cfg) {
    Normalized n;
    n.mass = seq.get("");
    if (!(n.mass > 0.0)) throw std::invalid_argument("beta_1 must be positive");
    n.seq = seq.scaled(1.0 / n.mass);
    n.M = moment_matrix(n.seq);
    const Eigen::VectorXd p = relation_vector(flat_relation_shape(rel));
    const double res = relation_residual(n.M, p);
    if (res > cfg.span_tol) {
        throw std::invalid_argument("moment matrix does not satisfy " + rel + " (" + flat_relation_shape(rel) +
                                    "), residual " + fmt(res));
    }
    return n;
}

Measure scaled_measure(const Measure& mu, double s) { return mu.scaled(s); }

double reconstruction(const Measure& mu, const MomentSequence& seq) {
    return max_abs_diff(moments_from_measure(mu, seq.degree()), seq);
}

// ------------------------------------------------------------ atom search

struct Box {
    double lo1, hi1, lo2, hi2;
    // Maps search coordinates to atom-family parameters and, when the
    // coordinates determine it, the density xi (NaN otherwise).
    std::function<void(double, double, double&, double&, double&)> map;
};

Box search_box(const std::string& rel, const Eigen::MatrixXd& M) {
    const double x2 = M(kOne, kXX), y2 = M(kOne, kYY), x4 = M(kXX, kXX);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (rel == "REL1") {
        return {0.0, 1.0, -2.0, 2.0, [nan](double s1, double s2, double& t1, double& t2, double& xi) {
                    t1 = s1;
                    t2 = s2;
                    xi = nan;
                }};
    }
    if (rel == "REL2") {
        const double top = 4.0 * std::max(1.0, x2);
        return {0.0, top, -2.0, 2.0, [nan](double s1, double s2, double& t1, double& t2, double& xi) {
                    t1 = s1;
                    t2 = s2;
                    xi = nan;
                }};
    }
    if (rel == "REL3") {
        // (u, v) = (xi a1, xi a3) lies in (0, beta_X2) x (0, beta_Y2), and the
        // commutativity of the residual fixes xi = u v / beta_X2Y2.
        const double c = M(kXY, kXY);
        return {0.0, x2, 0.0, y2, [c](double u, double v, double& t1, double& t2, double& xi) {
                    xi = u * v / c;
                    t1 = u / xi;
                    t2 = v / xi;
                }};
    }
    const double top = 2.0 * std::max(1.0, std::sqrt(std::sqrt(std::max(x4, 0.0))));
    return {0.0, top, 0.0, std::numbers::pi, [nan](double s1, double s2, double& t1, double& t2, double& xi) {
                t1 = s1;
                t2 = s2;
                xi = nan;
            }};
}

struct Candidate {
    double s1 = 0.0, s2 = 0.0;
    double t1 = 0.0, t2 = 0.0;
    double xi = 0.0;
    double score = -std::numeric_limits<double>::infinity();
    bool valid = false;
    Eigen::MatrixXd L;
};

Candidate evaluate(const std::string& rel, const Eigen::MatrixXd& M, const Box& box, double s1, double s2) {
    Candidate c;
    c.s1 = s1;
    c.s2 = s2;
    double xi = 0.0;
    box.map(s1, s2, c.t1, c.t2, xi);
    const Atom at = rank6_family_atom(rel, c.t1, c.t2);
    const Eigen::MatrixXd D = atom_moment_matrix(at.A, at.B);
    if (std::isnan(xi)) {
        // xi makes the residual commutative: beta_X2Y2 = beta_XYXY.
        const double dD = D(kXY, kXY) - D(kXY, kYX);
        const double dM = M(kXY, kXY) - M(kXY, kYX);
        if (std::abs(dD) < 1e-14) {
            c.score = -10.0;
            return c;
        }
        xi = dM / dD;
    }
    c.xi = xi;
    if (!(xi > 0.0) || !(xi < M(kOne, kOne))) {
        c.score = -1.0 - std::min(std::abs(xi), 1e6);
        return c;
    }
    c.L = M - xi * D;
    c.score = min_eig(block(c.L, independent_columns(rel))) / scale_of(M);
    c.valid = true;
    return c;
}

Candidate pattern_search(const std::string& rel, const Eigen::MatrixXd& M, const Box& box, Candidate best,
                         int iters, double h1, double h2) {
    const double eps1 = 1e-9 * (box.hi1 - box.lo1), eps2 = 1e-9 * (box.hi2 - box.lo2);
    auto clamp = [](double v, double lo, double hi, double eps) { return std::min(hi - eps, std::max(lo + eps, v)); };
    const int dirs[8][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
    for (int it = 0; it < iters && (h1 > eps1 || h2 > eps2); ++it) {
        bool improved = false;
        for (const auto& d : dirs) {
            const double s1 = clamp(best.s1 + d[0] * h1, box.lo1, box.hi1, eps1);
            const double s2 = clamp(best.s2 + d[1] * h2, box.lo2, box.hi2, eps2);
            Candidate c = evaluate(rel, M, box, s1, s2);
            if (c.score > best.score) {
                best = std::move(c);
                improved = true;
                break;
            }
        }
        if (!improved) {
            h1 *= 0.5;
            h2 *= 0.5;
        }
    }
    return best;
}

// Sum of the k smallest eigenvalues of the independent block of L, negated,
// with candidates that leave the PSD cone ranked below every PSD one. Moving
// along it drives L toward the boundary of the cone, where the commutative
// part needs the fewest points.
Candidate polish_low_rank(const std::string& rel, const Eigen::MatrixXd& M, const Box& box, const Candidate& start,
                          int iters, double h1, double h2) {
    const std::vector<int> cols = independent_columns(rel);
    const int k = static_cast<int>(cols.size()) - 2;
    const double floor = -1e-12 * scale_of(M);
    auto score = [&](Candidate& c) {
        if (!c.valid) return;
        const Eigen::VectorXd ev =
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(block(c.L, cols), Eigen::EigenvaluesOnly).eigenvalues();
        c.score = ev(0) < floor ? -1e9 + ev(0) : -ev.head(k).sum() / scale_of(M);
    };
    Candidate best = start;
    score(best);
    const double eps1 = 1e-10 * (box.hi1 - box.lo1), eps2 = 1e-10 * (box.hi2 - box.lo2);
    const int dirs[8][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
    for (int it = 0; it < iters && (h1 > eps1 || h2 > eps2); ++it) {
        bool improved = false;
        for (const auto& d : dirs) {
            const double s1 = best.s1 + d[0] * h1, s2 = best.s2 + d[1] * h2;
            if (s1 <= box.lo1 || s1 >= box.hi1 || s2 <= box.lo2 || s2 >= box.hi2) continue;
            Candidate c = evaluate(rel, M, box, s1, s2);
            score(c);
            if (c.valid && c.score > best.score) {
                best = std::move(c);
                improved = true;
                break;
            }
        }
        if (!improved) {
            h1 *= 0.5;
            h2 *= 0.5;
        }
    }
    return best;
}

void fill_witness_params(LmiWitness& w) {
    const Eigen::MatrixXd& L = w.L;
    w.a = L(kOne, kOne);
    w.b = L(kX, kX);
    if (w.pattern == "REL3") {
        w.c = L(kY, kY);
        w.d = L(kXX, kXX);
        w.e = L(kYY, kYY);
    } else {
        w.c = L(kX, kY);
        w.d = L(kXX, kXX);
        w.e = L(kXX, kXY);
    }
}

// Measure of a commutative PSD moment matrix via cm_solve; empty optional on failure.
std::optional<std::vector<WeightedPoint>> commutative_points(const Eigen::MatrixXd& L, const ToleranceConfig& cfg,
                                                             std::vector<std::string>& diag) {
    const double m = L(kOne, kOne);
    if (!(m > 0.0)) {
        diag.push_back("commutative part has nonpositive mass " + fmt(m));
        return std::nullopt;
    }
    const MomentSequence s = sequence_from_matrix(L / m);
    const CmReport rep = cm_solve(s, cfg);
    if (!rep.admits) {
        std::string msg = "cm_solve rejected the commutative part";
        if (!rep.diagnostics.empty()) msg += ": " + rep.diagnostics.back();
        diag.push_back(msg);
        return std::nullopt;
    }
    std::vector<WeightedPoint> pts = rep.points;
    for (auto& p : pts) p.weight *= m;
    return pts;
}

Measure point_measure(const std::vector<WeightedPoint>& pts) {
    Measure mu;
    for (const auto& p : pts) mu.atoms.push_back(Atom::point(p.x, p.y, p.weight));
    return mu;
}

bool odd_moments_vanish(const MomentSequence& s, const std::vector<Word>& words, double tol) {
    for (const auto& w : words)
        if (std::abs(s.get(w)) > tol) return false;
    return true;
}

// Subtracts alpha0 * D (first rank drop), represents the residual and adds the
// subtracted point masses back.
bool alpha_drop(const Eigen::MatrixXd& M, const std::vector<std::pair<double, double>>& pts,
                const MomentSequence& seq, const ToleranceConfig& cfg, Rank6Report& rep) {
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(7, 7);
    for (const auto& [x, y] : pts) D += point_moment_matrix(x, y);
    const AlphaDrop drop = smallest_rank_drop_alpha(M, D, cfg);
    if (!drop.ok) {
        rep.diagnostics.push_back("alpha-drop failed: " + drop.message);
        return false;
    }
    rep.alpha0 = drop.alpha;
    Measure mu;
    try {
        mu = represent_low_rank(M - drop.alpha * D, cfg);
    } catch (const std::exception& e) {
        rep.diagnostics.push_back(std::string("alpha-drop residual not represented: ") + e.what());
        return false;
    }
    for (const auto& [x, y] : pts) mu.atoms.push_back(Atom::point(x, y, drop.alpha));
    const double err = reconstruction(mu, seq);
    if (err > cfg.match_tol) {
        rep.diagnostics.push_back("alpha-drop measure reproduces the moments only to " + fmt(err));
        return false;
    }
    rep.measure = mu;
    rep.reconstruction_error = err;
    return true;
}

void finish(Rank6Report& rep, const Normalized& n) {
    if (rep.verdict == Verdict::Exists && !rep.measure.atoms.empty()) {
        rep.measure = scaled_measure(rep.measure, n.mass);
    }
}

bool psd_gate(const Normalized& n, const ToleranceConfig& cfg, Rank6Report& rep) {
    const PsdInfo psd = is_psd(n.M, cfg);
    if (!psd.psd) {
        rep.verdict = Verdict::NotExists;
        rep.diagnostics.push_back("moment matrix is not positive semidefinite (min eigenvalue " + fmt(psd.margin) +
                                  ")");
        return false;
    }
    const int r = numerical_rank(n.M, cfg);
    if (r != 6) throw std::invalid_argument("rank-6 solver called on a moment matrix of rank " + std::to_string(r));
    return true;
}

bool try_lmi(const std::string& rel, const Normalized& n, const ToleranceConfig& cfg, const LmiOptions& opt,
             Rank6Report& rep, const std::string& method) {
    LmiResult lr = lmi_feasibility_search(rel, n.seq, cfg, opt);
    for (const auto& d : lr.diagnostics) rep.diagnostics.push_back("atom search: " + d);
    if (!lr.found) return false;
    Measure mu = point_measure(lr.witness.variety_points);
    mu.atoms.push_back(lr.witness.atom);
    rep.measure = mu;
    rep.reconstruction_error = reconstruction(mu, n.seq);
    rep.witness = lr.witness;
    rep.verdict = Verdict::Exists;
    rep.method = method;
    return true;
}

}  // namespace

std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Exists: return "exists";
        case Verdict::NotExists: return "not-exists";
        default: return "undetermined";
    }
}

Eigen::MatrixXd lmi_matrix(const std::string& pattern, const MomentSequence& seq, double a, double b, double c,
                           double d, double e) {
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(7, 7);
    auto sym = [&](int i, int j, double v) { L(i, j) = L(j, i) = v; };
    const double bx = seq.get("X"), by = seq.get("Y"), bx3 = seq.get("XXX");
    if (pattern == "REL1") {
        const double bx2y = seq.get("XXY");
        const double row[7] = {a, bx, by, b, c, c, a - b};
        for (int j = 0; j < 7; ++j) sym(kOne, j, row[j]);
        sym(kX, kX, b); sym(kX, kY, c); sym(kX, kXX, bx3); sym(kX, kXY, bx2y); sym(kX, kYX, bx2y);
        sym(kX, kYY, bx - bx3);
        sym(kY, kY, a - b); sym(kY, kXX, bx2y); sym(kY, kXY, bx - bx3); sym(kY, kYX, bx - bx3);
        sym(kY, kYY, by - bx2y);
        sym(kXX, kXX, d); sym(kXX, kXY, e); sym(kXX, kYX, e); sym(kXX, kYY, b - d);
        for (int i : {kXY, kYX})
            for (int j : {kXY, kYX}) L(i, j) = b - d;
        sym(kXY, kYY, c - e); sym(kYX, kYY, c - e);
        sym(kYY, kYY, a - 2 * b + d);
        return L;
    }
    if (pattern == "REL3") {
        const double by3 = seq.get("YYY");
        sym(kOne, kOne, a); sym(kOne, kX, bx); sym(kOne, kY, by); sym(kOne, kXX, b); sym(kOne, kYY, c);
        sym(kX, kX, b); sym(kX, kXX, bx3);
        sym(kY, kY, c); sym(kY, kYY, by3);
        sym(kXX, kXX, d);
        sym(kYY, kYY, e);
        return L;
    }
    throw std::invalid_argument("LMI pattern is defined for REL1 and REL3 only, got '" + pattern + "'");
}

std::vector<Condition> lmi_conditions(const std::string& pattern, const MomentSequence& seq,
                                      const Eigen::MatrixXd& L, const ToleranceConfig& cfg) {
    const Eigen::MatrixXd M = moment_matrix(seq);
    const double sc = scale_of(M);
    const double tol = cfg.psd_tol * sc;
    std::vector<Condition> out;
    auto add = [&](const std::string& label, double lhs, double rhs, bool holds) {
        out.push_back({label, lhs, rhs, holds});
    };
    const bool patterned = pattern == "REL1" || pattern == "REL3";
    if (patterned) {
        LmiWitness w;
        w.pattern = pattern;
        w.L = L;
        fill_witness_params(w);
        const double dev = (L - lmi_matrix(pattern, seq, w.a, w.b, w.c, w.d, w.e)).cwiseAbs().maxCoeff();
        add("L has the LMI pattern", dev, cfg.match_tol * sc, dev <= cfg.match_tol * sc);
    }
    const double l1 = min_eig(L), l2 = min_eig(M - L);
    add("(1) L is PSD", l1, -tol, l1 >= -tol);
    add("(2) M2 - L is PSD", l2, -tol, l2 >= -tol);
    if (pattern == "REL1") {
        const double l3 = min_eig(block(M - L, {kOne, kX, kY, kXY}));
        add("(3) (M2 - L) on {1,X,Y,XY} is PD", l3, tol, l3 > tol);
    } else if (pattern == "REL3") {
        LmiWitness w;
        w.pattern = pattern;
        w.L = L;
        fill_witness_params(w);
        const double bounds[5][3] = {{w.a, 0.0, 1.0},
                                     {w.b, 0.0, seq.get("XX")},
                                     {w.c, 0.0, seq.get("YY")},
                                     {w.d, 0.0, seq.get("XXXX")},
                                     {w.e, 0.0, seq.get("YYYY")}};
        const char* names[5] = {"a", "b", "c", "d", "e"};
        for (int i = 0; i < 5; ++i) {
            const auto& bd = bounds[i];
            add(std::string("parameter ") + names[i] + " in (" + fmt(bd[1]) + ", " + fmt(bd[2]) + ")", bd[0], bd[2],
                bd[0] > bd[1] - tol && bd[0] < bd[2] + tol);
        }
    }
    const double nc_dev = (L.col(kXY) - L.col(kYX)).cwiseAbs().maxCoeff();
    const bool commutative = nc_dev <= cfg.match_tol * sc;
    add("L is commutative (columns XY and YX agree)", nc_dev, cfg.match_tol * sc, commutative);
    bool cm_ok = false;
    if (commutative && l1 >= -tol) {
        std::vector<std::string> diag;
        try {
            cm_ok = commutative_points(L, cfg, diag).has_value();
        } catch (const std::exception&) {
            cm_ok = false;
        }
    }
    add("rank L <= card V_L (cm_solve admits L)", cm_ok ? 1.0 : 0.0, 1.0, cm_ok);
    return out;
}

Atom rank6_family_atom(const std::string& relation, double t1, double t2) {
    check_relation(relation);
    Atom at;
    at.density = 1.0;
    Eigen::Matrix2d X, Y;
    if (relation == "REL1" || relation == "REL2") {
        const double r = std::sqrt(std::max(0.0, t1));
        const double k = 0.5 * std::sqrt(std::max(0.0, 4.0 - t2 * t2));
        const double s = std::sqrt(std::max(0.0, relation == "REL1" ? 1.0 - t1 : 1.0 + t1));
        X << r, 0, 0, -r;
        Y << s * t2 / 2, s * k, s * k, -s * t2 / 2;
    } else if (relation == "REL3") {
        const double r = std::sqrt(std::max(0.0, t1)), q = std::sqrt(std::max(0.0, t2));
        X << r, 0, 0, -r;
        Y << 0, q, q, 0;
    } else {
        X << t1, 0, 0, -t1;
        Y << std::cos(t2), std::sin(t2), std::sin(t2), -std::cos(t2);
    }
    at.A = X;
    at.B = Y;
    return at;
}

LmiResult lmi_feasibility_search(const std::string& pattern, const MomentSequence& seq, const ToleranceConfig& cfg,
                                 const LmiOptions& opt) {
    check_relation(pattern);
    LmiResult res;
    const Eigen::MatrixXd M = moment_matrix(seq);
    const PsdInfo psd = is_psd(M, cfg);
    if (!psd.psd) {
        res.diagnostics.push_back("M2 is not PSD (min eigenvalue " + fmt(psd.margin) + ")");
        res.best_margin = psd.margin / scale_of(M);
        return res;
    }
    if (pattern == "REL3" && !(M(kXY, kXY) > 0.0)) {
        res.diagnostics.push_back("beta_X2Y2 must be positive for an nc sequence with XY + YX = 0");
        return res;
    }
    const Box box = search_box(pattern, M);
    const int n = std::max(2, opt.grid);
    std::vector<Candidate> grid;
    grid.reserve(n * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double s1 = box.lo1 + (box.hi1 - box.lo1) * (i + 0.5) / n;
            const double s2 = box.lo2 + (box.hi2 - box.lo2) * (j + 0.5) / n;
            grid.push_back(evaluate(pattern, M, box, s1, s2));
        }
    }
    std::sort(grid.begin(), grid.end(), [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
    const int starts = std::min<int>(std::max(1, opt.refine_starts), grid.size());
    std::vector<Candidate> refined;
    for (int k = 0; k < starts; ++k) {
        refined.push_back(pattern_search(pattern, M, box, grid[k], opt.iters, (box.hi1 - box.lo1) / n,
                                         (box.hi2 - box.lo2) / n));
    }
    std::sort(refined.begin(), refined.end(), [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
    res.best_margin = refined.front().score;
    const double feas = -cfg.psd_tol;
    // Each feasible candidate is tried first after moving it to the boundary
    // of the PSD cone, then as found.
    std::vector<Candidate> tries;
    for (const auto& c : refined) {
        if (!c.valid || c.score < feas) break;
        tries.push_back(polish_low_rank(pattern, M, box, c, 4 * opt.iters, (box.hi1 - box.lo1) / n,
                                        (box.hi2 - box.lo2) / n));
        tries.push_back(c);
    }
    for (const auto& c : tries) {
        std::vector<std::string> diag;
        const auto pts = commutative_points(c.L, cfg, diag);
        for (const auto& d : diag) res.diagnostics.push_back(d);
        if (!pts) continue;
        LmiWitness w;
        w.pattern = pattern;
        w.L = c.L;
        w.residual = M - c.L;
        w.xi = c.xi;
        w.t1 = c.t1;
        w.t2 = c.t2;
        w.atom = rank6_family_atom(pattern, c.t1, c.t2);
        w.atom.density = c.xi;
        w.variety_points = *pts;
        fill_witness_params(w);
        Measure mu = point_measure(w.variety_points);
        mu.atoms.push_back(w.atom);
        const double err = reconstruction(mu, seq);
        if (err > cfg.match_tol) {
            res.diagnostics.push_back("candidate measure reproduces the moments only to " + fmt(err));
            continue;
        }
        w.conditions = lmi_conditions(pattern, seq, w.L, cfg);
        res.witness = std::move(w);
        res.found = true;
        return res;
    }
    if (res.best_margin < feas) {
        res.diagnostics.push_back("no PSD commutative residual found; best min-eigenvalue margin " +
                                  fmt(res.best_margin));
    }
    return res;
}

double rel1_alpha0_closed_form(const MomentSequence& seq) {
    const double x2 = seq.get("XX"), x4 = seq.get("XXXX"), xy = seq.get("XY"), x3y = seq.get("XXXY"),
                 xyxy = seq.get("XYXY");
    const double F = xyxy * (x2 * x2 - x4) + x2 * (x2 * x2 - 4 * xy * x3y - x4 * (1 + x2)) + 2 * x3y * x3y +
                     x4 * (x4 + 2 * xy * xy);
    const double G = 2 * xy * (xy - 2 * x3y) + xyxy * (2 * x2 - 1 - x4) + x2 * (2 * x2 - 1 - 3 * x4) +
                     2 * x3y * x3y + x4 * (1 + x4);
    return F / (2 * G);
}

double rel3_alpha0_closed_form(const MomentSequence& seq) {
    const double x2 = seq.get("XX"), y2 = seq.get("YY"), x4 = seq.get("XXXX"), y4 = seq.get("YYYY"),
                 c = seq.get("XXYY");
    const double F = y4 * x2 * x2 - 2 * y2 * x2 * c + c * c + y2 * y2 * x4 - x4 * y4;
    const double G = c * c - x4 * y4;
    return F / G;
}

Measure represent_low_rank(const Eigen::MatrixXd& R, const ToleranceConfig& cfg) {
    const double m = R(kOne, kOne);
    if (!(m > 0.0)) throw NoMeasureError("residual moment matrix has nonpositive mass " + fmt(m));
    const Eigen::MatrixXd Rn = R / m;
    if (!is_psd(Rn, cfg).psd) throw NoMeasureError("residual moment matrix is not PSD");
    const MomentSequence s = sequence_from_matrix(Rn);
    const bool nc = std::abs(Rn(kXY, kXY) - Rn(kXY, kYX)) > cfg.match_tol;
    if (!nc) {
        std::vector<std::string> diag;
        const auto pts = commutative_points(Rn, cfg, diag);
        if (!pts) throw NoMeasureError(diag.empty() ? "commutative residual not represented" : diag.back());
        return point_measure(*pts).scaled(m);
    }
    const int r = numerical_rank(Rn, cfg);
    if (r <= 3) throw NoMeasureError("nc residual of rank " + std::to_string(r) + " admits no measure");
    if (r == 4) return solve_rank4_matrix(R, cfg);
    if (r == 5) {
        const Reduction red = reduce_rank5(s, cfg);
        const Rank5Report rep = solve_rank5(red.target, red.canonical, cfg);
        if (!rep.exists) throw NoMeasureError("rank-5 residual (" + red.target + "): " + rep.reason);
        return pull_back_measure(rep.measure, red.chain).scaled(m);
    }
    throw NoMeasureError("residual still has rank " + std::to_string(r));
}

Rank6Report solve_rank6_rel1(const MomentSequence& seq, const ToleranceConfig& cfg, const LmiOptions& opt) {
    Rank6Report rep;
    rep.relation = "REL1";
    const Normalized n = normalize("REL1", seq, cfg);
    if (!psd_gate(n, cfg, rep)) return rep;
    if (odd_moments_vanish(n.seq, {"X", "Y", "XXX", "XXY"}, cfg.match_tol)) {
        rep.alpha0_closed = rel1_alpha0_closed_form(n.seq);
        if (alpha_drop(n.M, {{1.0, 0.0}, {-1.0, 0.0}}, n.seq, cfg, rep)) {
            rep.verdict = Verdict::Exists;
            rep.method = "alpha-drop";
            finish(rep, n);
            return rep;
        }
    }
    if (!try_lmi("REL1", n, cfg, opt, rep, "lmi-witness")) {
        rep.verdict = Verdict::Undetermined;
        rep.diagnostics.push_back("no LMI witness found within the search budget");
    }
    finish(rep, n);
    return rep;
}

Rank6Report solve_rank6_rel3(const MomentSequence& seq, const ToleranceConfig& cfg, const LmiOptions& opt) {
    Rank6Report rep;
    rep.relation = "REL3";
    const Normalized n = normalize("REL3", seq, cfg);
    if (!psd_gate(n, cfg, rep)) return rep;
    if (odd_moments_vanish(n.seq, {"X", "Y", "XXX", "YYY"}, cfg.match_tol)) {
        rep.alpha0_closed = rel3_alpha0_closed_form(n.seq);
        if (alpha_drop(n.M, {{0.0, 0.0}}, n.seq, cfg, rep)) {
            rep.verdict = Verdict::Exists;
            rep.method = "alpha-drop";
            finish(rep, n);
            return rep;
        }
    }
    if (!try_lmi("REL3", n, cfg, opt, rep, "lmi-witness")) {
        rep.verdict = Verdict::Undetermined;
        rep.diagnostics.push_back("no LMI witness found within the search budget");
    }
    finish(rep, n);
    return rep;
}

Rank6Report solve_rank6_rel2_rel4(const std::string& relation, const MomentSequence& seq,
                                  const ToleranceConfig& cfg, const LmiOptions& opt) {
    if (relation != "REL2" && relation != "REL4") {
        throw std::invalid_argument("solve_rank6_rel2_rel4 expects REL2 or REL4, got '" + relation + "'");
    }
    Rank6Report rep;
    rep.relation = relation;
    const Normalized n = normalize(relation, seq, cfg);
    if (!psd_gate(n, cfg, rep)) return rep;

    const FlatResult flat = flat_search(relation, n.seq, cfg);
    rep.flat_certificate = flat.found;
    rep.flat_params = flat.params;
    if (flat.found) rep.diagnostics.push_back("flat extension with moment structure found");

    bool done = false;
    if (relation == "REL2") {
        done = alpha_drop(n.M, {{0.0, 1.0}, {0.0, -1.0}}, n.seq, cfg, rep);
        if (done) {
            rep.verdict = Verdict::Exists;
            rep.method = "heuristic-sufficient";
            rep.diagnostics.push_back("measure from subtracting the points (0, 1) and (0, -1)");
        }
    }
    if (!done) done = try_lmi(relation, n, cfg, opt, rep, "heuristic-sufficient");
    if (!done && flat.found) {
        rep.verdict = Verdict::Exists;
        rep.method = "flat-extension";
        rep.diagnostics.push_back("measure extraction from a flat extension is not implemented; verdict rests on "
                                  "the flat certificate alone");
        done = true;
    }
    if (!done) {
        rep.verdict = Verdict::Undetermined;
        rep.diagnostics.push_back("no sufficient certificate found; " + relation +
                                  " has no complete existence criterion");
    }
    finish(rep, n);
    return rep;
}

Rank6Report solve_rank6(const std::string& relation, const MomentSequence& seq, const ToleranceConfig& cfg,
                        const LmiOptions& opt) {
    check_relation(relation);
    if (relation == "REL1") return solve_rank6_rel1(seq, cfg, opt);
    if (relation == "REL3") return solve_rank6_rel3(seq, cfg, opt);
    return solve_rank6_rel2_rel4(relation, seq, cfg, opt);
}

}  // namespace tracial
