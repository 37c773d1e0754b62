#include "tracial/transforms.hpp"

#include <cmath>
#include <sstream>

namespace tracial {

namespace {

constexpr int kOne = 0, kX = 1, kY = 2, kXX = 3, kXY = 4, kYX = 5, kYY = 6;

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

bool near_zero(double v, const ToleranceConfig& cfg) { return std::abs(v) <= cfg.coef_tol; }

double require_positive(double v, const std::string& what, const ToleranceConfig& cfg) {
    if (!(v > cfg.coef_tol)) {
        throw InconsistentInputError(what + " = " + fmt(v) +
                                     " must be positive for a PSD matrix of this rank");
    }
    return v;
}

bool in_span(const Eigen::MatrixXd& M, int target, const std::vector<int>& basis,
             const ToleranceConfig& cfg) {
    return express_in_span(M, target, basis, cfg).in_span;
}

// Coefficient vector v over basis2() with column(target) = sum_j v_j column(j).
Eigen::VectorXd fit(const Eigen::MatrixXd& M, int target, const std::vector<int>& basis,
                    const ToleranceConfig& cfg, const std::string& what) {
    const SpanFit f = express_in_span(M, target, basis, cfg);
    if (!f.in_span) {
        throw InconsistentInputError("column " + word_key(basis2()[target]) +
                                     " is not in the expected span while reading " + what +
                                     " (residual " + fmt(f.residual) + ")");
    }
    Eigen::VectorXd v = Eigen::VectorXd::Zero(7);
    for (std::size_t j = 0; j < basis.size(); ++j) v(basis[j]) = f.coeffs(static_cast<int>(j));
    return v;
}

bool kernel_has(const Eigen::MatrixXd& M, const Eigen::VectorXd& p, const ToleranceConfig& cfg) {
    return relation_residual(M, p) <= cfg.span_tol;
}

Eigen::VectorXd anticommutator_vector() {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(7);
    v(kXY) = 1.0;
    v(kYX) = 1.0;
    return v;
}

// Mutable state threaded through the case trees.
struct Work {
    MomentSequence seq;
    TransformChain chain;
    std::vector<std::string> steps;
    std::vector<std::pair<std::string, double>> constants;
    const ToleranceConfig& cfg;

    Work(const MomentSequence& s, const ToleranceConfig& c) : seq(s), cfg(c) {}

    void apply(const AffineMap& m) {
        seq = apply_affine(seq, m);
        chain.push(m);
    }
    Eigen::MatrixXd M() const { return moment_matrix(seq); }
    void note(const std::string& s) { steps.push_back(s); }
    void constant(const std::string& k, double v) { constants.emplace_back(k, v); }

    Reduction finish(const std::string& target, double param = 0.0) {
        Reduction r;
        r.target = target;
        r.chain = chain;
        r.chain.target_case = target;
        r.canonical = seq;
        r.param = param;
        r.steps = steps;
        r.constants = constants;
        return r;
    }
};

void require_independent_core(const Eigen::MatrixXd& M, const ToleranceConfig& cfg) {
    if (greedy_basis(M, {kOne, kX, kY, kXY}, cfg).size() < 4) {
        throw NoMeasureError("columns 1, X, Y, XY of M_2 are linearly dependent");
    }
}

std::vector<double> y2_relation(const MomentSequence& seq, const ToleranceConfig& cfg) {
    const Eigen::MatrixXd M = moment_matrix(seq);
    const std::vector<int> basis = greedy_basis(M, {kOne, kX, kY, kXX, kXY, kYX}, cfg);
    const Eigen::VectorXd v = fit(M, kYY, basis, cfg, "the Y^2 relation");
    // The star of a kernel relation is again a kernel relation; average the two.
    const double a5 = 0.5 * (v(kXY) + v(kYX));
    return {v(kOne), v(kX), v(kY), v(kXX), a5};
}

std::string y2_normalize(Work& w, bool to_anticommuting) {
    const ToleranceConfig& cfg = w.cfg;
    std::vector<double> r = y2_relation(w.seq, cfg);
    if (!near_zero(r[4], cfg)) {
        w.note("Y2 normalization: shear (X, Y - a5 X)");
        w.apply(AffineMap::general(0, 1, 0, 0, -r[4], 1, "shear"));
        r = y2_relation(w.seq, cfg);
    }
    const double a2 = r[1], a3 = r[2], a4 = r[3];
    if (a4 < -cfg.coef_tol) {
        w.note("Y2 normalization, a4 < 0");
        const double s = std::sqrt(-a4);
        w.apply(AffineMap::general(-a2 / (2 * s), s, 0, -a3 / 2, 0, 1, "complete squares"));
        const double C1 = require_positive(y2_relation(w.seq, cfg)[0], "C1", cfg);
        w.constant("C1", C1);
        w.apply(AffineMap::scale(1 / std::sqrt(C1), 1 / std::sqrt(C1)));
        return "Y2=1-X2";
    }
    if (a4 <= cfg.coef_tol) {
        w.note("Y2 normalization, a4 = 0");
        if (!near_zero(a2, cfg)) {
            throw NoMeasureError("Y^2 relation with vanishing X^2 term has X coefficient " + fmt(a2) +
                                 "; recursive generation forces it to be 0");
        }
        w.apply(AffineMap::shift(0, -a3 / 2));
        const double C2 = require_positive(y2_relation(w.seq, cfg)[0], "C2", cfg);
        w.constant("C2", C2);
        w.apply(AffineMap::scale(1, 1 / std::sqrt(C2)));
        return "Y2=1";
    }
    w.note("Y2 normalization, a4 > 0");
    const double s = std::sqrt(a4);
    w.apply(AffineMap::general(a2 / (2 * s), s, 0, -a3 / 2, 0, 1, "complete squares"));
    const double C3 = y2_relation(w.seq, cfg)[0];
    w.constant("C3", C3);
    if (C3 > cfg.coef_tol) {
        w.apply(AffineMap::scale(1 / std::sqrt(C3), 1 / std::sqrt(C3)));
        return "Y2=1+X2";
    }
    if (C3 < -cfg.coef_tol) {
        w.note("Y2 normalization: swap");
        w.apply(AffineMap::swap());
        const double c = require_positive(y2_relation(w.seq, cfg)[0], "-C3", cfg);
        w.apply(AffineMap::scale(1 / std::sqrt(c), 1 / std::sqrt(c)));
        return "Y2=1+X2";
    }
    if (to_anticommuting) {
        w.apply(AffineMap::general(0, 1, -1, 0, 1, 1, "phi8"));
        return "XY+YX=0";
    }
    return "Y2=X2";
}

// ------------------------------------------------------------------ rank 5

constexpr int kMaxDepth = 24;

void rank5_step(Work& w, int depth, std::string& target);

// XY + YX = 0 holds; classify the second relation and normalize it.
void finish_anticommuting(Work& w, int depth, std::string& target) {
    const ToleranceConfig& cfg = w.cfg;
    const Eigen::MatrixXd M = w.M();
    if (!in_span(M, kYY, {kOne, kX, kY, kXX}, cfg)) {
        if (!in_span(M, kXX, {kOne, kX, kY, kYY}, cfg)) {
            throw InconsistentInputError(
                "rank-5 kernel with XY + YX = 0 has no second relation among 1, X, Y, X^2, Y^2");
        }
        w.note("swap so that the second relation expresses Y^2");
        w.apply(AffineMap::swap());
        rank5_step(w, depth + 1, target);
        return;
    }
    const Eigen::VectorXd v = fit(M, kYY, {kOne, kX, kY, kXX}, cfg, "Y^2 relation");
    const double r = v(kOne), s = v(kX), t = v(kY), p = v(kXX);
    if (!near_zero(s, cfg) || !near_zero(t, cfg)) {
        throw NoMeasureError("with XY + YX = 0 the Y^2 relation has linear terms (" + fmt(s) +
                             " X + " + fmt(t) +
                             " Y); recursive generation forces XY = YX, impossible for an nc sequence");
    }
    w.constant("p", p);
    w.constant("r", r);
    if (p < -cfg.coef_tol) {
        w.apply(AffineMap::scale(std::sqrt(-p), 1));
        const double rr = require_positive(r, "constant in X^2 + Y^2 = r", cfg);
        w.apply(AffineMap::scale(1 / std::sqrt(rr), 1 / std::sqrt(rr)));
        target = "BC1";
        return;
    }
    if (p <= cfg.coef_tol) {
        const double rr = require_positive(r, "constant in Y^2 = r", cfg);
        w.apply(AffineMap::scale(1, 1 / std::sqrt(rr)));
        target = "BC2";
        return;
    }
    w.apply(AffineMap::scale(std::sqrt(p), 1));
    if (std::abs(r) <= cfg.coef_tol) {
        target = "BC4";
        return;
    }
    if (r < 0) {
        w.note("swap to make the hyperbola constant positive");
        w.apply(AffineMap::swap());
    }
    const double rr = std::abs(r);
    w.apply(AffineMap::scale(1 / std::sqrt(rr), 1 / std::sqrt(rr)));
    target = "BC3";
}

// XY + YX = kappa 1 with a purely quadratic second relation.
void constant_anticommutator(Work& w, int depth, std::string& target) {
    const ToleranceConfig& cfg = w.cfg;
    const Eigen::MatrixXd M = w.M();
    if (!in_span(M, kYY, {kOne, kX, kY, kXX}, cfg)) {
        rank5_step(w, depth + 1, target);
        return;
    }
    const Eigen::VectorXd v = fit(M, kYY, {kOne, kX, kY, kXX}, cfg, "Y^2 relation");
    const double r = v(kOne), p = v(kXX);
    if (std::abs(p) <= cfg.coef_tol) {
        rank5_step(w, depth + 1, target);
        return;
    }
    if (p < 0) {
        w.note("Y^2 = 1 + q X^2 with q < 0: scale X");
        w.apply(AffineMap::scale(std::sqrt(-p), 1));
        rank5_step(w, depth + 1, target);
        return;
    }
    w.note("Y^2 = 1 + q X^2 with q > 0: scale X");
    w.apply(AffineMap::scale(std::sqrt(p), 1));
    if (std::abs(r) <= cfg.coef_tol) {
        rank5_step(w, depth + 1, target);
        return;
    }
    if (r < 0) w.apply(AffineMap::swap());
    const double at = std::abs(r);
    const double kappa = 2.0 * w.seq.get("XY") / w.seq.get("");
    w.constant("kappa", kappa);
    w.apply(AffineMap::general(0, 1, 0, 0, 1, -kappa / at, "phi12"));
    // Now Y^2 = (1 + kappa^2 / at^2) X^2; normalize X to reach Y^2 = X^2.
    const Eigen::VectorXd u = fit(w.M(), kYY, {kOne, kX, kY, kXX}, cfg, "Y^2 relation");
    const double c = require_positive(u(kXX), "X^2 coefficient after phi12", cfg);
    w.apply(AffineMap::scale(std::sqrt(c), 1));
    rank5_step(w, depth + 1, target);
}

// XY + YX = a + b X + c Y + d X^2 read from YX in basis {1,X,Y,X^2,XY}.
Eigen::VectorXd anticommutator_relation(const Work& w) {
    const Eigen::VectorXd v = fit(w.M(), kYX, {kOne, kX, kY, kXX, kXY}, w.cfg, "YX relation");
    if (std::abs(v(kXY) + 1.0) > w.cfg.coef_tol) {
        throw InconsistentInputError("YX relation has XY coefficient " + fmt(v(kXY)) +
                                     " instead of -1");
    }
    return v;
}

void rank5_step(Work& w, int depth, std::string& target) {
    const ToleranceConfig& cfg = w.cfg;
    if (depth > kMaxDepth) throw InconsistentInputError("rank-5 reduction did not terminate");
    const Eigen::MatrixXd M = w.M();
    require_independent_core(M, cfg);
    if (kernel_has(M, anticommutator_vector(), cfg)) {
        finish_anticommuting(w, depth, target);
        return;
    }
    const bool x2_low = in_span(M, kXX, {kOne, kX, kY}, cfg);
    const bool y2_low = in_span(M, kYY, {kOne, kX, kY}, cfg);
    if (x2_low && y2_low) {
        w.note("X^2 and Y^2 of degree <= 1: basis {1,X,Y,XY,YX}");
        const Eigen::VectorXd x2 = fit(M, kXX, {kOne, kX, kY}, cfg, "X^2 relation");
        const Eigen::VectorXd y2 = fit(M, kYY, {kOne, kX, kY}, cfg, "Y^2 relation");
        if (!near_zero(x2(kY), cfg) || !near_zero(y2(kX), cfg)) {
            throw NoMeasureError("X^2 and Y^2 of degree <= 1 require c1 = b2 = 0 (c1 = " + fmt(x2(kY)) +
                                 ", b2 = " + fmt(y2(kX)) + ")");
        }
        w.apply(AffineMap::shift(-x2(kX) / 2, -y2(kY) / 2));
        const Eigen::MatrixXd M1 = w.M();
        const double ax = require_positive(fit(M1, kXX, {kOne, kX, kY}, cfg, "X^2")(kOne),
                                           "a1 + b1^2/4", cfg);
        const double ay = require_positive(fit(M1, kYY, {kOne, kX, kY}, cfg, "Y^2")(kOne),
                                           "a2 + c2^2/4", cfg);
        w.apply(AffineMap::scale(1 / std::sqrt(ax), 1 / std::sqrt(ay)));
        w.apply(AffineMap::general(0, 0.5, 0.5, 0, -0.5, 0.5, "phi3"));
        rank5_step(w, depth + 1, target);
        return;
    }
    if (x2_low) {
        w.note("only X^2 of degree <= 1: swap X and Y");
        w.apply(AffineMap::swap());
        rank5_step(w, depth + 1, target);
        return;
    }
    w.note("basis {1,X,Y,X^2,XY}");
    if (greedy_basis(M, {kOne, kX, kY, kXX, kXY}, cfg).size() < 5) {
        throw InconsistentInputError("columns 1, X, Y, X^2, XY are dependent");
    }
    const std::string shape = y2_normalize(w, false);
    if (shape == "Y2=1") {
        w.note("Y^2 = 1");
        Eigen::VectorXd v = anticommutator_relation(w);
        w.apply(AffineMap::shift(-v(kY) / 2, 0));
        v = anticommutator_relation(w);
        const double a4 = v(kOne), b4 = v(kX), d4 = v(kXX);
        if (!near_zero(b4, cfg)) {
            throw NoMeasureError("Y^2 = 1 requires b4 = 0 (b4 = " + fmt(b4) + ")");
        }
        if (near_zero(d4, cfg)) {
            w.note("Y^2 = 1, anticommutator without X^2 term");
            w.apply(AffineMap::general(0, 1, -a4 / 2, 0, 0, 1, "phi6"));
        } else {
            w.note("Y^2 = 1, anticommutator with X^2 term");
            w.apply(AffineMap::general(0, -1, 1 / d4, 0, 0, 1, "phi7"));
        }
        rank5_step(w, depth + 1, target);
        return;
    }
    const Eigen::VectorXd v = anticommutator_relation(w);
    const double a3 = v(kOne), b3 = v(kX), c3 = v(kY), d3 = v(kXX);
    if (!near_zero(b3, cfg) || !near_zero(c3, cfg)) {
        throw NoMeasureError("relation XY + YX = a3 + b3 X + c3 Y + d3 X^2 requires b3 = c3 = 0 (b3 = " +
                             fmt(b3) + ", c3 = " + fmt(c3) + ")");
    }
    if (shape == "Y2=1-X2") {
        w.note("Y^2 = 1 - X^2");
        const double alpha = 0.5 * std::sqrt(4 + d3 * d3) + d3 / 2;
        w.constant("alpha", alpha);
        (void)a3;
        w.apply(AffineMap::general(0, 1, 0, 0, std::sqrt(alpha - d3), std::sqrt(alpha), "phi8"));
        rank5_step(w, depth + 1, target);
        return;
    }
    if (shape == "Y2=X2") {
        w.note("Y^2 = X^2");
        w.apply(AffineMap::general(0, 1, 1, 0, -1, 1, "phi9"));
        rank5_step(w, depth + 1, target);
        return;
    }
    w.note("Y^2 = 1 + X^2");
    w.apply(AffineMap::general(0, 1, 1, 0, -1, 1, "phi9"));
    const Eigen::MatrixXd M2 = w.M();
    const double kappa = 2.0 * w.seq.get("XY") / w.seq.get("");
    Eigen::VectorXd rel = anticommutator_vector();
    rel(kOne) = -kappa;
    if (!kernel_has(M2, rel, cfg)) {
        throw InconsistentInputError("Y^2 = 1 + X^2: XY + YX is not constant after phi9");
    }
    constant_anticommutator(w, depth, target);
}

}  // namespace

// ------------------------------------------------------------ AffineMap

AffineMap AffineMap::identity() { return general(0, 1, 0, 0, 0, 1, "identity"); }

AffineMap AffineMap::swap() { return general(0, 0, 1, 0, 1, 0, "swap"); }

AffineMap AffineMap::shift(double dx, double dy) { return general(dx, 1, 0, dy, 0, 1, "shift"); }

AffineMap AffineMap::scale(double sx, double sy) { return general(0, sx, 0, 0, 0, sy, "scale"); }

AffineMap AffineMap::general(double a, double b, double c, double d, double e, double f,
                             std::string name) {
    AffineMap m;
    m.a = a;
    m.b = b;
    m.c = c;
    m.d = d;
    m.e = e;
    m.f = f;
    m.name = std::move(name);
    return m;
}

AffineMap AffineMap::inverse() const {
    const double D = det();
    if (D == 0.0) throw std::invalid_argument("affine map is singular (bf - ce = 0)");
    AffineMap m;
    m.b = f / D;
    m.c = -c / D;
    m.e = -e / D;
    m.f = b / D;
    m.a = -(m.b * a + m.c * d);
    m.d = -(m.e * a + m.f * d);
    m.name = name.empty() ? "inverse" : name + "^-1";
    return m;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> AffineMap::apply(const Eigen::MatrixXd& A,
                                                             const Eigen::MatrixXd& B) const {
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(A.rows(), A.cols());
    return {a * I + b * A + c * B, d * I + e * A + f * B};
}

AffineMap compose(const AffineMap& outer, const AffineMap& inner) {
    AffineMap m;
    m.b = outer.b * inner.b + outer.c * inner.e;
    m.c = outer.b * inner.c + outer.c * inner.f;
    m.e = outer.e * inner.b + outer.f * inner.e;
    m.f = outer.e * inner.c + outer.f * inner.f;
    m.a = outer.a + outer.b * inner.a + outer.c * inner.d;
    m.d = outer.d + outer.e * inner.a + outer.f * inner.d;
    m.name = "composed";
    return m;
}

void TransformChain::append(const TransformChain& o) {
    maps.insert(maps.end(), o.maps.begin(), o.maps.end());
}

AffineMap TransformChain::composed() const {
    AffineMap total = AffineMap::identity();
    for (const auto& m : maps) total = compose(m, total);
    total.name = "composed";
    return total;
}

MomentSequence apply_affine(const MomentSequence& seq, const AffineMap& phi) {
    if (phi.det() == 0.0) throw std::invalid_argument("affine map is singular (bf - ce = 0)");
    const NcPoly px = phi.first();
    const NcPoly py = phi.second();
    MomentSequence out(seq.degree());
    for (const auto& w : canonical_words(seq.degree())) {
        NcPoly p = NcPoly::constant(1.0);
        for (char ch : w) p = p * (ch == 'X' ? px : py);
        out.assign(w, riesz_apply(seq, p));
    }
    return out;
}

MomentSequence apply_chain(const MomentSequence& seq, const TransformChain& chain) {
    MomentSequence s = seq;
    for (const auto& m : chain.maps) s = apply_affine(s, m);
    return s;
}

namespace {

Measure map_measure(const Measure& mu, const AffineMap& m) {
    Measure out;
    for (const auto& atom : mu.atoms) {
        Atom a = atom;
        std::tie(a.A, a.B) = m.apply(atom.A, atom.B);
        out.atoms.push_back(a);
    }
    return out;
}

}  // namespace

Measure push_forward_measure(const Measure& mu, const TransformChain& chain) {
    return map_measure(mu, chain.composed());
}

Measure pull_back_measure(const Measure& mu, const TransformChain& chain) {
    return map_measure(mu, chain.composed().inverse());
}

// ------------------------------------------------------------ reductions

std::vector<Eigen::VectorXd> canonical_kernel(const std::string& target, double param) {
    auto vec = [](std::initializer_list<double> xs) {
        Eigen::VectorXd r(7);
        int i = 0;
        for (double x : xs) r(i++) = x;
        return r;
    };
    const Eigen::VectorXd ac = vec({0, 0, 0, 0, 1, 1, 0});
    if (target == "rank4") {
        return {vec({-1, 0, 0, 1, 0, 0, 0}), vec({-param, 0, 0, 0, 1, 1, 0}),
                vec({-1, 0, 0, 0, 0, 0, 1})};
    }
    if (target == "BC1") return {ac, relation_vector("X2+Y2=1")};
    if (target == "BC2") return {ac, relation_vector("Y2=1")};
    if (target == "BC3") return {ac, relation_vector("Y2-X2=1")};
    if (target == "BC4") return {ac, relation_vector("Y2=X2")};
    if (target == "REL1") return {relation_vector("Y2=1-X2")};
    if (target == "REL2") return {relation_vector("Y2=1+X2")};
    if (target == "REL3") return {relation_vector("XY+YX=0")};
    if (target == "REL4") return {relation_vector("Y2=1")};
    throw std::invalid_argument("unknown canonical target " + target);
}

namespace {

void check_landing(const Work& w, const std::string& target, double param) {
    const Eigen::MatrixXd M = w.M();
    for (const auto& v : canonical_kernel(target, param)) {
        const double res = relation_residual(M, v);
        if (res > w.cfg.span_tol) {
            throw InconsistentInputError("reduction to " + target +
                                         " left a canonical relation with residual " + fmt(res));
        }
    }
}

}  // namespace

Reduction reduce_rank4(const MomentSequence& seq, const ToleranceConfig& cfg) {
    Work w(seq, cfg);
    const Eigen::MatrixXd M = w.M();
    require_independent_core(M, cfg);
    const std::vector<int> B{kOne, kX, kY, kXY};
    const Eigen::VectorXd x2 = fit(M, kXX, B, cfg, "X^2 relation");
    const Eigen::VectorXd yx = fit(M, kYX, B, cfg, "YX relation");
    const Eigen::VectorXd y2 = fit(M, kYY, B, cfg, "Y^2 relation");
    const double a1 = x2(kOne), b1 = x2(kX), c1 = x2(kY), d1 = x2(kXY);
    const double a2 = yx(kOne), b2 = yx(kX), c2 = yx(kY), d2 = yx(kXY);
    const double a3 = y2(kOne), b3 = y2(kX), c3 = y2(kY), d3 = y2(kXY);
    if (!near_zero(d1, cfg) || !near_zero(d3, cfg) || std::abs(d2 + 1.0) > cfg.coef_tol) {
        throw InconsistentInputError("rank-4 relations have unexpected XY coefficients (d1 = " +
                                     fmt(d1) + ", d2 = " + fmt(d2) + ", d3 = " + fmt(d3) + ")");
    }
    auto obstruct = [&](const std::string& cond, double lhs, double rhs) {
        if (std::abs(lhs - rhs) > cfg.coef_tol) {
            throw NoMeasureError("rank-4 obstruction: condition " + cond + " fails (" + fmt(lhs) +
                                 " vs " + fmt(rhs) + ")");
        }
    };
    obstruct("c1 = 0", c1, 0.0);
    obstruct("b3 = 0", b3, 0.0);
    obstruct("b2 = c3", b2, c3);
    obstruct("c2 = b1", c2, b1);
    for (auto [k, v] : {std::pair<const char*, double>{"a1", a1}, {"b1", b1}, {"a2", a2},
                        {"a3", a3}, {"c3", c3}}) {
        w.constant(k, v);
    }
    w.apply(AffineMap::shift(-b1 / 2, -c3 / 2));
    const Eigen::MatrixXd M1 = w.M();
    const double ax = require_positive(fit(M1, kXX, B, cfg, "X^2")(kOne), "a1 + b1^2/4", cfg);
    const double ay = require_positive(fit(M1, kYY, B, cfg, "Y^2")(kOne), "a3 + c3^2/4", cfg);
    w.apply(AffineMap::scale(1 / std::sqrt(ax), 1 / std::sqrt(ay)));
    const double a = 2.0 * w.seq.get("XY") / w.seq.get("");
    if (!(std::abs(a) < 2.0)) {
        throw InconsistentInputError("canonical rank-4 parameter a = " + fmt(a) +
                                     " lies outside (-2,2); M_2 is not PSD");
    }
    w.constant("a", a);
    check_landing(w, "rank4", a);
    return w.finish("rank4", a);
}

std::vector<double> extract_Y2_relation(const MomentSequence& seq, const ToleranceConfig& cfg) {
    return y2_relation(seq, cfg);
}

Reduction reduce_Y2(const MomentSequence& seq, const ToleranceConfig& cfg, bool to_anticommuting) {
    Work w(seq, cfg);
    const std::string target = y2_normalize(w, to_anticommuting);
    return w.finish(target);
}

Reduction reduce_rank5(const MomentSequence& seq, const ToleranceConfig& cfg) {
    Work w(seq, cfg);
    std::string target;
    rank5_step(w, 0, target);
    check_landing(w, target, 0.0);
    return w.finish(target);
}

Reduction reduce_rank6(const MomentSequence& seq, const ToleranceConfig& cfg) {
    Work w(seq, cfg);
    for (int depth = 0; depth < 4; ++depth) {
        const Eigen::MatrixXd M = w.M();
        require_independent_core(M, cfg);
        if (in_span(M, kYY, greedy_basis(M, {kOne, kX, kY, kXX, kXY, kYX}, cfg), cfg)) {
            w.note("Y^2 relation");
        } else if (in_span(M, kXX, greedy_basis(M, {kOne, kX, kY, kYY, kXY, kYX}, cfg), cfg)) {
            w.note("X^2 relation: swap");
            w.apply(AffineMap::swap());
        } else {
            w.note("no square relation: apply (X + Y, Y)");
            w.apply(AffineMap::general(0, 1, 1, 0, 0, 1, "phi1"));
            continue;
        }
        const std::string shape = y2_normalize(w, true);
        std::string target;
        if (shape == "Y2=1-X2") target = "REL1";
        else if (shape == "Y2=1+X2") target = "REL2";
        else if (shape == "XY+YX=0") target = "REL3";
        else target = "REL4";
        check_landing(w, target, 0.0);
        return w.finish(target);
    }
    throw InconsistentInputError("rank-6 reduction did not reach a Y^2 relation");
}

}  // namespace tracial
