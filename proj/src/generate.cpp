#include "tracial/generate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace tracial {

namespace {

constexpr double kPi = std::numbers::pi;

struct Rng {
    std::mt19937_64 eng;
    explicit Rng(std::uint64_t seed) : eng(seed) {}
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng); }
    double sign() { return integer(0, 1) == 0 ? -1.0 : 1.0; }
};

// Anticommuting reflections diag(1,-1) and [[0,1],[1,0]], conjugated by a rotation.
struct Reflections {
    Eigen::Matrix2d P, Q;
};

Reflections reflections(Rng& rng) {
    const double phi = rng.uniform(0.0, kPi);
    Eigen::Matrix2d R;
    R << std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi);
    Eigen::Matrix2d P, Q;
    P << 1, 0, 0, -1;
    Q << 0, 1, 1, 0;
    return {R * P * R.transpose(), R * Q * R.transpose()};
}

Atom atom(const Eigen::Matrix2d& A, const Eigen::Matrix2d& B, double density) {
    Atom a;
    a.A = A;
    a.B = B;
    a.density = density;
    return a;
}

// n parameters in [lo, hi] with pairwise distance at least sep.
std::vector<double> separated(Rng& rng, int n, double lo, double hi, double sep) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
        std::vector<double> v(n);
        for (auto& x : v) x = rng.uniform(lo, hi);
        std::vector<double> s = v;
        std::sort(s.begin(), s.end());
        bool ok = true;
        for (int i = 1; i < n; ++i) ok = ok && s[i] - s[i - 1] >= sep;
        if (ok) return v;
    }
    throw std::runtime_error("gen_random: could not place separated parameters");
}

// Trace-zero angle between the two reflections, kept away from commuting pairs.
double mixing_angle(Rng& rng) { return rng.sign() * rng.uniform(0.35, kPi / 2); }

void add_points(Measure& mu, const std::vector<std::pair<double, double>>& pts, Rng& rng) {
    for (const auto& [x, y] : pts) mu.atoms.push_back(Atom::point(x, y, rng.uniform(0.2, 1.0)));
}

// Antipodal pairs with a shared density, so every odd moment of the points vanishes.
void add_symmetric_points(Measure& mu, const std::vector<std::pair<double, double>>& pts, Rng& rng) {
    for (const auto& [x, y] : pts) {
        const double w = rng.uniform(0.2, 1.0);
        mu.atoms.push_back(Atom::point(x, y, w));
        mu.atoms.push_back(Atom::point(-x, -y, w));
    }
}

std::vector<std::pair<double, double>> pick(Rng& rng, std::vector<std::pair<double, double>> pool, int n) {
    std::shuffle(pool.begin(), pool.end(), rng.eng);
    pool.resize(n);
    return pool;
}

Measure make(const std::string& label, Rng& rng) {
    Measure mu;
    if (label == "rank4") {
        for (;;) {
            Eigen::Matrix2d A, B;
            A << rng.uniform(-1, 1), rng.uniform(-1, 1), 0, rng.uniform(-1, 1);
            B << rng.uniform(-1, 1), rng.uniform(-1, 1), 0, rng.uniform(-1, 1);
            A(1, 0) = A(0, 1);
            B(1, 0) = B(0, 1);
            if ((A * B - B * A).norm() > 0.2) {
                mu.atoms.push_back(atom(A, B, 1.0));
                break;
            }
        }
        return mu;
    }
    const Reflections r = reflections(rng);
    const double w = rng.uniform(0.2, 1.0);
    if (label == "BC1") {
        const double t = rng.uniform(0.25, kPi / 2 - 0.25);
        mu.atoms.push_back(atom(std::cos(t) * r.P, std::sin(t) * r.Q, w));
        add_points(mu, pick(rng, {{1, 0}, {-1, 0}, {0, 1}, {0, -1}}, rng.integer(1, 2)), rng);
    } else if (label == "BC2") {
        mu.atoms.push_back(atom(rng.uniform(0.3, 1.5) * r.P, r.Q, w));
        add_points(mu, pick(rng, {{0, 1}, {0, -1}}, rng.integer(1, 2)), rng);
    } else if (label == "BC3") {
        const double t = rng.uniform(0.2, 1.2);
        mu.atoms.push_back(atom(std::sinh(t) * r.P, std::cosh(t) * r.Q, w));
        add_points(mu, pick(rng, {{0, 1}, {0, -1}}, rng.integer(1, 2)), rng);
    } else if (label == "BC4") {
        const double g = rng.uniform(0.3, 1.5);
        mu.atoms.push_back(atom(g * r.P, g * r.Q, w));
        add_points(mu, {{0, 0}}, rng);
    } else if (label == "REL1" || label == "REL1-sym") {
        const double t = rng.uniform(0.25, kPi / 2 - 0.25);
        const double psi = mixing_angle(rng);
        mu.atoms.push_back(atom(std::cos(t) * r.P, std::sin(t) * (std::cos(psi) * r.P + std::sin(psi) * r.Q), w));
        if (label == "REL1") {
            std::vector<std::pair<double, double>> pts;
            for (double th : separated(rng, 3, -kPi, kPi, 0.4)) pts.emplace_back(std::cos(th), std::sin(th));
            add_points(mu, pts, rng);
        } else {
            std::vector<std::pair<double, double>> pts;
            for (double th : separated(rng, 2, 0, kPi - 0.4, 0.4)) pts.emplace_back(std::cos(th), std::sin(th));
            add_symmetric_points(mu, pts, rng);
        }
    } else if (label == "REL2") {
        const double t = rng.uniform(0.2, 1.2);
        const double psi = mixing_angle(rng);
        mu.atoms.push_back(atom(std::sinh(t) * r.P, std::cosh(t) * (std::cos(psi) * r.P + std::sin(psi) * r.Q), w));
        std::vector<std::pair<double, double>> pts;
        for (double s : separated(rng, 3, -1.2, 1.2, 0.3)) pts.emplace_back(std::sinh(s), rng.sign() * std::cosh(s));
        add_points(mu, pts, rng);
    } else if (label == "REL3" || label == "REL3-sym") {
        mu.atoms.push_back(atom(rng.uniform(0.4, 1.5) * r.P, rng.uniform(0.4, 1.5) * r.Q, w));
        if (label == "REL3") {
            std::vector<std::pair<double, double>> pts;
            for (double s : separated(rng, 3, -1.5, 1.5, 0.3)) {
                if (std::abs(s) < 0.15) s += 0.3;
                pts.push_back(rng.integer(0, 1) == 0 ? std::pair{s, 0.0} : std::pair{0.0, s});
            }
            add_points(mu, pts, rng);
        } else {
            add_symmetric_points(mu, {{rng.uniform(0.3, 1.5), 0.0}, {0.0, rng.uniform(0.3, 1.5)}}, rng);
        }
    } else if (label == "REL4") {
        Eigen::Matrix2d A;
        A << rng.uniform(-1, 1), rng.uniform(0.3, 1), 0, rng.uniform(-1, 1);
        A(1, 0) = A(0, 1);
        mu.atoms.push_back(atom(A, r.P, w));
        std::vector<std::pair<double, double>> pts;
        for (double s : separated(rng, 3, -1.5, 1.5, 0.3)) pts.emplace_back(s, rng.sign());
        add_points(mu, pts, rng);
    } else {
        throw std::invalid_argument("unknown generator label '" + label + "'");
    }
    return mu;
}

}  // namespace

const std::vector<std::string>& generator_labels() {
    static const std::vector<std::string> labels = {"rank4", "BC1",  "BC2",  "BC3",      "BC4",  "REL1",
                                                    "REL2",  "REL3", "REL4", "REL1-sym", "REL3-sym"};
    return labels;
}

Generated gen_random(const std::string& label, std::uint64_t seed) {
    if (std::find(generator_labels().begin(), generator_labels().end(), label) == generator_labels().end()) {
        throw std::invalid_argument("unknown generator label '" + label + "'");
    }
    Rng rng(seed);
    Generated g;
    g.label = label;
    const Measure mu = make(label, rng);
    g.measure = mu.scaled(1.0 / mu.total_density());
    g.moments = moments_from_measure(g.measure);
    return g;
}

}  // namespace tracial
