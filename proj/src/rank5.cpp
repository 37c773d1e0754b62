#include "tracial/rank5.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "tracial/rank4.hpp"
#include "tracial/transforms.hpp"

namespace tracial {

namespace {

struct Values {
    double bx, by, b2, b3, b4;
};

Values read_values(const MomentSequence& s) {
    return {s.get("X"), s.get("Y"), s.get("XX"), s.get("XXX"), s.get("XXXX")};
}

Condition cond(std::string label, double lhs, double rhs, bool holds) {
    return {std::move(label), lhs, rhs, holds};
}
Condition lt(std::string label, double lhs, double rhs) {
    return cond(std::move(label), lhs, rhs, lhs < rhs);
}
Condition le(std::string label, double lhs, double rhs, double tol) {
    return cond(std::move(label), lhs, rhs, lhs <= rhs + tol);
}
Condition eq(std::string label, double lhs, double rhs, double tol) {
    return cond(std::move(label), lhs, rhs, std::abs(lhs - rhs) <= tol);
}

bool all_hold(const std::vector<Condition>& cs) {
    for (const auto& c : cs) {
        if (!c.holds) return false;
    }
    return true;
}

std::string first_failure(const std::vector<Condition>& cs) {
    for (const auto& c : cs) {
        if (!c.holds) {
            std::ostringstream os;
            os << "condition " << c.label << " fails (lhs = " << c.lhs << ", rhs = " << c.rhs << ")";
            return os.str();
        }
    }
    return "";
}

void check_case(const std::string& bc) {
    if (bc != "BC1" && bc != "BC2" && bc != "BC3" && bc != "BC4") {
        throw std::invalid_argument("unknown rank-5 case " + bc);
    }
}

double bc1_psd_c(const Values& v) {
    const double b2 = v.b2, bx = v.bx, by = v.by;
    const double num = -b2 * b2 * b2 + b2 * b2 * b2 * b2 - bx * bx + by * by * bx * bx +
                       3 * b2 * bx * bx - 2 * b2 * b2 * bx * bx;
    const double den = -b2 + by * by * b2 + b2 * b2 + bx * bx - b2 * bx * bx;
    return num / den;
}

double bc1_exist_c(const Values& v) {
    const double b2 = v.b2, ax = std::abs(v.bx), ay = std::abs(v.by);
    return (-b2 * b2 - ax + 2 * b2 * ax + ay * ax) / (-1 + ay + ax);
}

double bc3_psd_d(const Values& v) {
    const double b2 = v.b2, bx = v.bx, by = v.by;
    const double num = b2 * b2 * b2 + b2 * b2 * b2 * b2 + bx * bx - by * by * bx * bx +
                       3 * b2 * bx * bx + 2 * b2 * b2 * bx * bx;
    const double den = (1 + b2) * (b2 - bx * bx) - by * by * b2;
    return num / den;
}

// A weighted size-1 atom in canonical coordinates.
struct PointMass {
    double x, y, w;
};

Eigen::MatrixXd points_matrix(const std::vector<PointMass>& pts) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(7, 7);
    for (const auto& p : pts) A += p.w * point_moment_matrix(p.x, p.y);
    return A;
}

// Adds (x,y,w) to the list, merging with an existing point at the same location.
void add_point(std::vector<PointMass>& pts, double x, double y, double w) {
    if (w <= 0.0) return;
    for (auto& p : pts) {
        if (p.x == x && p.y == y) {
            p.w += w;
            return;
        }
    }
    pts.push_back({x, y, w});
}

struct PairChoice {
    std::vector<std::pair<double, double>> points;  // each receives alpha
    std::string label;
};

const PairChoice kXPair{{{1.0, 0.0}, {-1.0, 0.0}}, "(1,0),(-1,0) pair"};
const PairChoice kYPair{{{0.0, 1.0}, {0.0, -1.0}}, "(0,1),(0,-1) pair"};
const PairChoice kOrigin{{{0.0, 0.0}}, "(0,0) atom"};

Eigen::MatrixXd pair_matrix(const PairChoice& pc) {
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(7, 7);
    for (auto [x, y] : pc.points) D += point_moment_matrix(x, y);
    return D;
}

struct Built {
    bool ok = false;
    std::string message;
    Measure measure;
    double alpha = 0.0;
};

// Subtracts the forced points, then (optionally) the smallest admissible
// multiple of the pair, and solves the rank-4 remainder.
Built build_measure(const Eigen::MatrixXd& M, std::vector<PointMass> forced, const PairChoice* pc,
                    const ToleranceConfig& cfg) {
    Built out;
    Eigen::MatrixXd R = M - points_matrix(forced);
    if (pc != nullptr) {
        const AlphaDrop drop = smallest_rank_drop_alpha(R, pair_matrix(*pc), cfg);
        if (!drop.ok) {
            out.message = "no admissible alpha for the " + pc->label + ": " + drop.message;
            return out;
        }
        out.alpha = drop.alpha;
        R -= drop.alpha * pair_matrix(*pc);
        for (auto [x, y] : pc->points) add_point(forced, x, y, drop.alpha);
    }
    try {
        out.measure = solve_rank4_matrix(R, cfg);
    } catch (const std::exception& e) {
        out.message = std::string("rank-4 remainder not solvable: ") + e.what();
        return out;
    }
    for (const auto& p : forced) out.measure.atoms.push_back(Atom::point(p.x, p.y, p.w));
    out.ok = true;
    return out;
}

}  // namespace

PsdConditions psd_conditions_rank5(const std::string& bc, const MomentSequence& seq) {
    check_case(bc);
    const Values v = read_values(seq);
    PsdConditions out;
    auto& c = out.conditions;
    if (bc == "BC1") {
        c.push_back(lt("|beta_X| < beta_X2", std::abs(v.bx), v.b2));
        c.push_back(lt("beta_X2 < 1", v.b2, 1.0));
        c.push_back(lt("|beta_Y| < 1 - beta_X2", std::abs(v.by), 1.0 - v.b2));
        c.push_back(lt("c < beta_X4", bc1_psd_c(v), v.b4));
        c.push_back(lt("beta_X4 < beta_X2", v.b4, v.b2));
    } else if (bc == "BC2") {
        c.push_back(lt("0 < beta_X2", 0.0, v.b2));
        c.push_back(lt("|beta_Y| < 1", std::abs(v.by), 1.0));
        const double by2 = v.by * v.by;
        const double bound =
            (v.b2 * v.b2 * v.b2 + v.b3 * v.b3 - by2 * v.b3 * v.b3) / ((1.0 - by2) * v.b2);
        c.push_back(lt("(b2^3 + b3^2 - bY^2 b3^2) / ((1 - bY^2) b2) < beta_X4", bound, v.b4));
    } else if (bc == "BC3") {
        c.push_back(lt("0 < beta_X2", 0.0, v.b2));
        c.push_back(lt("|beta_X| < sqrt(beta_X2)", std::abs(v.bx), std::sqrt(std::max(0.0, v.b2))));
        const double ybound =
            std::sqrt(std::max(0.0, (1 + v.b2) * (v.b2 - v.bx * v.bx) / v.b2));
        c.push_back(lt("|beta_Y| < sqrt((1 + b2)(b2 - bX^2) / b2)", std::abs(v.by), ybound));
        c.push_back(lt("d < beta_X4", bc3_psd_d(v), v.b4));
    } else {
        c.push_back(lt("0 < beta_X2", 0.0, v.b2));
        c.push_back(lt("|beta_X| < sqrt(beta_X2)", std::abs(v.bx), std::sqrt(std::max(0.0, v.b2))));
        c.push_back(lt("|beta_Y| < sqrt(beta_X2 - beta_X^2)", std::abs(v.by),
                       std::sqrt(std::max(0.0, v.b2 - v.bx * v.bx))));
        const double den = v.b2 - v.by * v.by - v.bx * v.bx;
        c.push_back(lt("b2^3 / (b2 - bY^2 - bX^2) < beta_X4", v.b2 * v.b2 * v.b2 / den, v.b4));
    }
    out.holds = all_hold(c);
    return out;
}

double rank5_alpha0_closed_form(const std::string& bc, const MomentSequence& seq) {
    check_case(bc);
    const Values v = read_values(seq);
    if (bc == "BC1") return (v.b2 * v.b2 - v.b4) / (2.0 * (-1.0 + 2.0 * v.b2 - v.b4));
    if (bc == "BC4") return (v.b4 - v.b2 * v.b2) / v.b4;
    return 0.5 - v.b2 * v.b2 / (2.0 * v.b4);
}

Rank5Report solve_rank5(const std::string& bc, const MomentSequence& seq, const ToleranceConfig& cfg) {
    check_case(bc);
    Rank5Report rep;
    rep.bc = bc;
    const Values v = read_values(seq);
    const double tol = cfg.match_tol;

    const PsdConditions pc = psd_conditions_rank5(bc, seq);
    rep.psd_conditions = pc.conditions;
    rep.psd = pc.holds;
    if (!rep.psd) {
        rep.reason = "moment matrix is not positive semidefinite of rank 5: " + first_failure(pc.conditions);
        return rep;
    }

    const bool x0 = std::abs(v.bx) <= tol;
    const bool y0 = std::abs(v.by) <= tol;
    const double sx = v.bx >= 0 ? 1.0 : -1.0;
    const double sy = v.by >= 0 ? 1.0 : -1.0;

    std::vector<PointMass> forced;
    const PairChoice* primary = nullptr;
    const PairChoice* alternative = nullptr;
    std::vector<int> predicted;
    auto& ec = rep.existence_conditions;

    if (bc == "BC1") {
        if (x0 && y0) {
            primary = &kXPair;
            alternative = &kYPair;
            predicted = {2, 1};
            rep.uniqueness = "two-measures";
        } else {
            const double ax = std::abs(v.bx), ay = std::abs(v.by);
            const double c = bc1_exist_c(v);
            ec.push_back(lt("|beta_Y| < 1 - |beta_X|", ay, 1.0 - ax));
            ec.push_back(lt("|beta_X| < beta_X2", ax, v.b2));
            ec.push_back(lt("beta_X2 < 1 - |beta_Y|", v.b2, 1.0 - ay));
            ec.push_back(le("c <= beta_X4", c, v.b4, tol));
            ec.push_back(lt("beta_X4 < beta_X2", v.b4, v.b2));
            add_point(forced, sx, 0.0, ax);
            add_point(forced, 0.0, sy, ay);
            const bool at_c = std::abs(v.b4 - c) <= tol;
            rep.boundary = at_c;
            const bool one_zero = x0 || y0;
            if (at_c) {
                predicted = one_zero ? std::vector<int>{1, 1} : std::vector<int>{2, 1};
                rep.uniqueness = "unique";
            } else if (one_zero) {
                primary = y0 ? &kXPair : &kYPair;
                predicted = {2, 1};
                rep.uniqueness = "unique";
            } else {
                primary = &kXPair;
                alternative = &kYPair;
                predicted = {3, 1};
                rep.uniqueness = "two-measures";
            }
        }
    } else if (bc == "BC2" || bc == "BC3") {
        // beta_X3 plays in BC2 the role that beta_X plays in BC3.
        const double odd = bc == "BC2" ? v.b3 : v.bx;
        const std::string odd_name = bc == "BC2" ? "beta_X3" : "beta_X";
        ec.push_back(eq(odd_name + " = 0", odd, 0.0, tol));
        if (!y0) {
            const double thr = v.b2 * v.b2 / (1.0 - std::abs(v.by));
            ec.push_back(lt("0 < beta_X2", 0.0, v.b2));
            ec.push_back(lt("0 < |beta_Y| < 1", std::abs(v.by), 1.0));
            ec.push_back(le("beta_X2^2 / (1 - |beta_Y|) <= beta_X4", thr, v.b4, tol));
            add_point(forced, 0.0, sy, std::abs(v.by));
            rep.boundary = std::abs(v.b4 - thr) <= tol;
            if (rep.boundary) {
                predicted = {1, 1};
            } else {
                primary = &kYPair;
                predicted = {2, 1};
            }
        } else {
            primary = &kYPair;
            predicted = {2, 1};
        }
        rep.uniqueness = "unique";
    } else {
        ec.push_back(eq("beta_X = 0", v.bx, 0.0, tol));
        ec.push_back(eq("beta_Y = 0", v.by, 0.0, tol));
        primary = &kOrigin;
        predicted = {1, 1};
        rep.uniqueness = "unique";
    }

    if (!all_hold(ec)) {
        rep.reason = "no measure: " + first_failure(ec);
        rep.uniqueness.clear();
        return rep;
    }

    const Eigen::MatrixXd M = moment_matrix(seq);
    Built main = build_measure(M, forced, primary, cfg);
    if (!main.ok && alternative != nullptr) {
        rep.notes.push_back("primary construction failed (" + main.message + "); used the alternative");
        main = build_measure(M, forced, alternative, cfg);
        alternative = nullptr;
    }
    if (!main.ok) {
        rep.reason = "existence conditions hold but the construction failed: " + main.message;
        rep.notes.push_back(rep.reason);
        return rep;
    }
    rep.exists = true;
    rep.measure = main.measure;
    rep.alpha0 = main.alpha;
    rep.minimal_type = rep.measure.type();
    if (rep.minimal_type != predicted) {
        rep.notes.push_back("constructed measure has type " + type_string(rep.minimal_type) +
                            ", expected " + type_string(predicted));
    }
    if (alternative != nullptr) {
        Built alt = build_measure(M, forced, alternative, cfg);
        if (alt.ok) {
            rep.alternatives.push_back(alt.measure);
        } else {
            rep.notes.push_back("alternative minimal measure not constructed: " + alt.message);
        }
    }
    if (rep.boundary) rep.notes.push_back("beta_X4 lies on the type boundary within match_tol");
    return rep;
}

}  // namespace tracial
