#include "delaystab/extremal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>

#include "json.hpp"

#include "delaystab/criteria.hpp"
#include "delaystab/detail/numeric.hpp"

namespace delaystab {

namespace {

constexpr double kPi = std::numbers::pi;

struct Chord {
    double theta;
    double c;
};

const Chord& chord() {
    static const Chord ch = [] {
        // Tangency of the line 1 - c*theta with cos: both values and slopes
        // match, giving 1 - theta*sin(theta) = cos(theta) with c = sin(theta).
        auto g = [](double t) { return 1.0 - t * std::sin(t) - std::cos(t); };
        double t = detail::bisect(g, 0.5 * kPi, kPi, 1e-15);
        for (int i = 0; i < 4; ++i) {
            const double dg = -t * std::cos(t);
            if (dg != 0.0) t -= g(t) / dg;
        }
        return Chord{t, std::sin(t)};
    }();
    return ch;
}

// Roots of h(theta) = 1 - d*theta - cos(theta) on (0, pi). h dips negative
// right of 0, peaks at pi - asin(d), then falls; so there are at most two
// roots: one on each side of the peak. No roots when d exceeds the chord
// slope (the peak stays negative).
struct ThetaRoots {
    std::optional<double> first;
    std::optional<double> second;
};

ThetaRoots solve_theta(double d) {
    ThetaRoots out;
    if (!(d > 0.0) || d >= 1.0) return out;
    auto h = [&](double t) { return 1.0 - d * t - std::cos(t); };
    auto polish = [&](double t) {
        for (int i = 0; i < 3; ++i) {
            const double dh = std::sin(t) - d;
            if (dh != 0.0) t -= h(t) / dh;
        }
        return t;
    };
    const double peak = kPi - std::asin(d);
    const double h_peak = h(peak);
    if (h_peak < 0.0) return out;
    if (h_peak == 0.0) {
        out.first = out.second = peak;
        return out;
    }
    out.first = polish(detail::bisect(h, std::asin(d), peak, 1e-15));
    if (h(kPi) < 0.0) out.second = polish(detail::bisect(h, peak, kPi, 1e-15));
    return out;
}

ExtremalPair make_pair(double theta, double omega_s, double E, double clamp_c) {
    ExtremalPair pr;
    pr.omega_s = omega_s;
    pr.preserved_mean = E;
    if (theta <= 0.0) {  // single-Dirac clamp
        pr.tau2 = E;
        pr.p2 = 1.0;
        pr.p1 = 0.0;
        pr.clamped = clamp_c != 0.0;
    } else {
        pr.tau2 = theta / omega_s;
        pr.p2 = std::min(1.0, E / pr.tau2);
        pr.p1 = 1.0 - pr.p2;
    }
    pr.preserved_c = pr.p1 + pr.p2 * std::cos(omega_s * pr.tau2);
    pr.s_star = pr.p2 * std::sin(omega_s * pr.tau2);
    return pr;
}

// Smallest theta-root with theta >= omega_s*E (so that p2 <= 1); nullopt when
// none exists below pi.
std::optional<double> admissible_theta(double c_target, double omega_s, double E) {
    const double te = omega_s * E;
    if (std::abs(c_target - std::cos(te)) <= 1e-12) return te;  // pair is a Dirac
    const double d = (1.0 - c_target) / te;
    const ThetaRoots roots = solve_theta(d);
    const double lo = te * (1.0 - 1e-12);
    if (roots.first && *roots.first >= lo) return roots.first;
    if (roots.second && *roots.second >= lo && *roots.second < kPi * (1.0 - 1e-15))
        return roots.second;
    return std::nullopt;
}

double mixture_c(const DiscreteMixture& mix, double omega) {
    double c = 0.0;
    for (const Atom& at : mix.atoms) c += at.weight * std::cos(omega * at.delay);
    return c;
}

double mixture_s(const DiscreteMixture& mix, double omega) {
    double s = 0.0;
    for (const Atom& at : mix.atoms) s += at.weight * std::sin(omega * at.delay);
    return s;
}

double mixture_mean(const DiscreteMixture& mix) {
    double m = 0.0;
    for (const Atom& at : mix.atoms) m += at.weight * at.delay;
    return m;
}

std::vector<Atom> drop_null_atoms(std::vector<Atom> atoms) {
    std::erase_if(atoms, [](const Atom& at) { return at.weight <= 1e-15; });
    return atoms;
}

}  // namespace

double chord_constant() { return chord().c; }
double chord_angle() { return chord().theta; }

ExtremalPair extremal_two_delay(double c_target, double omega_s, double E) {
    if (!std::isfinite(c_target) || std::abs(c_target) > 1.0)
        throw std::invalid_argument("extremal_two_delay: c_target must lie in [-1, 1]");
    if (!(omega_s > 0.0) || !(E > 0.0))
        throw std::invalid_argument("extremal_two_delay: omega_s and E must be > 0");

    const double te = omega_s * E;
    if (std::abs(c_target - std::cos(te)) <= 1e-12)
        return make_pair(te, omega_s, E, 0.0);  // degenerate: the Dirac itself

    const double d = (1.0 - c_target) / te;
    if (d > chord_constant() + 1e-12)
        throw std::domain_error(
            "extremal_two_delay: no pair with tau2 < pi/omega_s exists "
            "(c_target is below the chord line 1 - c*omega_s*E)");

    const ThetaRoots roots = solve_theta(std::min(d, chord_constant()));
    if (!roots.first)
        throw std::domain_error("extremal_two_delay: no pair with tau2 < pi/omega_s exists");
    const double theta = *roots.first;
    if (theta < te * (1.0 - 1e-12)) {
        // Smallest root sits left of omega_s*E, so the exact pair would need
        // p1 < 0; fall back to the single Dirac at the mean.
        return make_pair(0.0, omega_s, E, 1.0);
    }
    return make_pair(theta, omega_s, E, 0.0);
}

bool s_star_bound_check(double a, double p, double r) {
    const double arg = -(a + 1.0 - p) / p;
    if (std::abs(arg) > 1.0) return true;  // no crossing frequency at all
    const double omega_s = std::acos(arg) / r;
    const double s2 = p * p - (a + 1.0 - p) * (a + 1.0 - p);
    return std::sqrt(std::max(0.0, s2)) < omega_s;
}

ReductionOutcome reduce_to_extremal_logged(const DiscreteMixture& mix, double omega_s,
                                           double a) {
    if (!(omega_s > 0.0))
        throw std::invalid_argument("reduce_to_extremal: omega_s must be > 0");
    if (!(std::abs(a) < 1.0))
        throw std::invalid_argument("reduce_to_extremal: requires |a| < 1");
    DelayDistribution dist = DelayDistribution::discrete(mix.atoms);
    const DiscreteMixture& norm = std::get<DiscreteMixture>(dist.kind());
    const double E = mixture_mean(norm);
    if (!(E > 0.0))
        throw std::invalid_argument("reduce_to_extremal: mixture mean must be > 0");
    const double c0 = mixture_c(norm, omega_s);
    if (std::abs(c0 + a) > 1e-3)
        throw std::invalid_argument(
            "reduce_to_extremal: C(omega_s) + a != 0 (omega_s is not a crossing)");
    if (!(E < universal_bound(a, 1.0) + 1e-12))
        throw std::invalid_argument(
            "reduce_to_extremal: mean exceeds the universal delay bound");

    ReductionOutcome out;
    std::vector<Atom> atoms = norm.atoms;
    const std::size_t n = atoms.size();
    const std::size_t cap = 10 * n * n + 10;
    std::size_t iterations = 0;

    // Stage 1: rewrite qualifying pairs (largest delays first) until none
    // qualifies. Each rewrite keeps the pair's mass, mean and cosine moment
    // and must not decrease its sine moment.
    for (;;) {
        if (++iterations > cap)
            throw detail::NumericalError("reduce_to_extremal: pair rewriting did not settle");
        bool applied = false;
        std::sort(atoms.begin(), atoms.end(),
                  [](const Atom& x, const Atom& y) { return x.delay < y.delay; });
        for (std::size_t j = atoms.size(); j-- > 0 && !applied;) {
            for (std::size_t i = j; i-- > 0 && !applied;) {
                const Atom &ai = atoms[i], &aj = atoms[j];
                const double P = ai.weight + aj.weight;
                const double M = ai.weight * ai.delay + aj.weight * aj.delay;
                const double G = ai.weight * std::cos(omega_s * ai.delay) +
                                 aj.weight * std::cos(omega_s * aj.delay);
                if (M <= 0.0) continue;
                if (G > std::cos(omega_s * M) + 1e-12) continue;  // pair keeps its delays
                const auto theta = admissible_theta(G / P, omega_s, M / P);
                if (!theta) continue;
                const double tau2 = *theta / omega_s;
                if (tau2 > aj.delay * (1.0 + 1e-12)) continue;  // must shrink
                const double p2 = std::min(1.0, (M / P) / tau2);
                const double s_new = P * p2 * std::sin(omega_s * tau2);
                const double s_old = ai.weight * std::sin(omega_s * ai.delay) +
                                     aj.weight * std::sin(omega_s * aj.delay);
                if (s_new < s_old - 1e-12) continue;
                if (ai.delay == 0.0 && std::abs(tau2 - aj.delay) <= 1e-12 * (1.0 + aj.delay))
                    continue;  // already in extremal form

                ReductionStep step;
                step.action = "pair";
                step.tau_i = ai.delay;
                step.tau_j = aj.delay;
                std::vector<Atom> next;
                next.reserve(atoms.size());
                for (std::size_t k = 0; k < atoms.size(); ++k)
                    if (k != i && k != j) next.push_back(atoms[k]);
                next.push_back({0.0, P * (1.0 - p2)});
                next.push_back({tau2, P * p2});
                next = drop_null_atoms(std::move(next));
                atoms = std::get<DiscreteMixture>(
                            DelayDistribution::discrete(std::move(next)).kind())
                            .atoms;
                step.state = DiscreteMixture{atoms};
                step.mean_after = mixture_mean(step.state);
                step.c_after = mixture_c(step.state, omega_s);
                step.s_after = mixture_s(step.state, omega_s);
                out.steps.push_back(std::move(step));
                applied = true;
            }
        }
        if (!applied) break;
    }

    // Stage 2: merge what is left into a single positive delay, then shrink
    // it back onto C(omega_s) = c0 at the same mean. Both sub-moves raise the
    // sine moment, and their composition is exactly the extremal pair.
    out.pair = extremal_two_delay(c0, omega_s, E);
    out.pair.preserved_mean = E;

    ReductionStep final_step;
    final_step.action = "merge+shrink";
    std::vector<Atom> final_atoms;
    if (out.pair.p1 > 1e-15) final_atoms.push_back({0.0, out.pair.p1});
    final_atoms.push_back({out.pair.tau2, out.pair.p2});
    final_step.state = DiscreteMixture{std::move(final_atoms)};
    final_step.mean_after = mixture_mean(final_step.state);
    final_step.c_after = mixture_c(final_step.state, omega_s);
    final_step.s_after = mixture_s(final_step.state, omega_s);
    out.steps.push_back(std::move(final_step));
    return out;
}

ExtremalPair reduce_to_extremal(const DiscreteMixture& mix, double omega_s, double a) {
    return reduce_to_extremal_logged(mix, omega_s, a).pair;
}

std::string to_json(const ExtremalPair& pair) {
    nlohmann::json j;
    j["tau2_star"] = pair.tau2;
    j["p1_star"] = pair.p1;
    j["p2_star"] = pair.p2;
    j["s_star"] = pair.s_star;
    j["omega_s"] = pair.omega_s;
    j["mean"] = pair.preserved_mean;
    j["c_preserved"] = pair.preserved_c;
    if (pair.clamped) j["clamped"] = true;
    return j.dump();
}

}  // namespace delaystab
