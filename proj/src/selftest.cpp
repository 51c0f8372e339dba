#include "delaystab/selftest.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <mutex>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "delaystab/boundary.hpp"
#include "delaystab/charfun.hpp"
#include "delaystab/criteria.hpp"
#include "delaystab/detail/numeric.hpp"
#include "delaystab/distribution.hpp"
#include "delaystab/extremal.hpp"
#include "delaystab/simulator.hpp"

namespace delaystab {

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
    bool pass = false;
    std::string note;
};

std::string fmt(const char* pattern, ...) {
    char buf[256];
    va_list args;
    va_start(args, pattern);
    std::vsnprintf(buf, sizeof buf, pattern, args);
    va_end(args);
    return buf;
}

std::vector<const BoundaryBranch*> hopf_branches(const TraceResult& tr) {
    std::vector<const BoundaryBranch*> out;
    for (const BoundaryBranch& br : tr.branches)
        if (br.kind == BranchKind::HopfCurve) out.push_back(&br);
    return out;
}

// 1. Order-2 gamma kernel: boundary curve in closed form, peak location.
Outcome c1_gamma_boundary(int) {
    const TraceResult tr = trace_boundary(DelayDistribution::gamma(2, 1.0), {});
    const auto branches = hopf_branches(tr);
    if (branches.size() != 1) return {false, fmt("expected 1 branch, got %zu", branches.size())};
    double worst_dev = 0.0, max_a = -2.0;
    for (const BoundaryPoint& p : branches[0]->points) {
        const double pred = (std::sqrt(p.E) - 2.0) / p.E;
        worst_dev = std::max(worst_dev, std::abs(p.a - pred));
        max_a = std::max(max_a, p.a);
    }
    const bool curve_ok = worst_dev < 1e-6;
    const bool peak_ok = std::abs(max_a - 0.1216) < 1e-3;
    return {curve_ok && peak_ok,
            fmt("curve dev %.2e; peak a = %.6f vs target 0.1216 +/- 1e-3", worst_dev, max_a)};
}

// 2. Exponential kernel: E = -1/a on the traced boundary.
Outcome c2_exponential_boundary(int) {
    const TraceResult tr = trace_boundary(DelayDistribution::exponential(1.0), {});
    const auto branches = hopf_branches(tr);
    if (branches.empty()) return {false, "no branch traced"};
    double worst = 0.0;
    int checked = 0;
    for (const BoundaryBranch* br : branches)
        for (const BoundaryPoint& p : br->points)
            if (p.a >= -0.9 && p.a <= -0.1) {
                ++checked;
                worst = std::max(worst, std::abs(p.E - (-1.0 / p.a)) / (1.0 / -p.a));
            }
    if (checked < 100) return {false, fmt("only %d points in the a-window", checked)};
    return {worst < 1e-6, fmt("max relative deviation %.2e over %d points", worst, checked)};
}

// 3. Two-delay worked example: reduction output and preserved mean.
Outcome c3_worked_example(int) {
    DiscreteMixture mix{{{0.2, 0.37}, {2.0, 0.63}}};
    const ExtremalPair pr = reduce_to_extremal(mix, 1.0, -0.1);
    const bool ok = std::abs(pr.tau2 - 1.76) <= 0.01 && std::abs(pr.p1 - 0.24) <= 0.01 &&
                    std::abs(pr.p2 - 0.76) <= 0.01 &&
                    std::abs(pr.p2 * pr.tau2 - 1.334) <= 1e-10;
    return {ok, fmt("tau2 = %.4f, p1 = %.4f, p2 = %.4f, p2*tau2 = %.12f", pr.tau2, pr.p1,
                    pr.p2, pr.p2 * pr.tau2)};
}

// 4. Single-delay boundary sharpness just below/above the critical delay.
Outcome c4_sharpness(int) {
    for (double a : {-0.9, -0.5, 0.0, 0.5, 0.9}) {
        const double bound = universal_bound(a, 1.0);
        for (double factor : {0.999, 1.001}) {
            const double E = factor * bound;
            const DelayDistribution dist = DelayDistribution::dirac(E);
            const std::complex<double> lead = leading_root(a, dist);
            const double residual = std::abs(char_value(a, dist, lead).value);
            if (residual >= 1e-10)
                return {false, fmt("residual %.2e at a=%g factor=%g", residual, a, factor)};
            if (factor < 1.0 && !(lead.real() < 0.0))
                return {false, fmt("Re = %.3e not negative at a=%g below bound", lead.real(), a)};
            if (factor > 1.0 && !(lead.real() > 0.0))
                return {false, fmt("Re = %.3e not positive at a=%g above bound", lead.real(), a)};
        }
    }
    return {true, ""};
}

// 5. Random distributions pushed to 0.99x the universal mean bound stay
// free of unstable roots.
Outcome c5_universal_bound(int jobs, unsigned long long seed) {
    detail::Rng rng(seed != 0 ? seed : 20250815ULL);
    struct Case {
        DelayDistribution dist;
        double a;
    };
    std::vector<Case> cases;
    cases.reserve(1000);
    for (int i = 0; i < 1000; ++i) {
        const double a = rng.uniform(-0.95, 0.95);
        const double target = 0.99 * universal_bound(a, 1.0);
        const int kind = static_cast<int>(rng.uniform_int(0, 3));
        DelayDistribution base = [&]() -> DelayDistribution {
            switch (kind) {
                case 0: {
                    const long n = rng.uniform_int(1, 10);
                    std::vector<Atom> atoms;
                    for (long k = 0; k < n; ++k)
                        atoms.push_back({rng.uniform(0.01, 3.0), rng.uniform(0.05, 1.0)});
                    return DelayDistribution::discrete(std::move(atoms));
                }
                case 1:
                    return DelayDistribution::exponential(1.0);
                case 2:
                    return DelayDistribution::gamma(static_cast<int>(rng.uniform_int(1, 10)),
                                                    1.0);
                default: {
                    const double lo = rng.uniform(0.0, 1.0);
                    return DelayDistribution::uniform(lo, lo + rng.uniform(0.1, 2.0));
                }
            }
        }();
        cases.push_back({scale_to_mean(base, target), a});
    }

    std::atomic<int> bad{0};
    std::mutex note_mutex;
    std::string first_bad;
    detail::parallel_for(
        cases.size(),
        [&](std::size_t i) {
            std::string what;
            try {
                const RootReport r = count_unstable_roots(cases[i].a, cases[i].dist);
                if (r.unstable_count == 0) return;
                what = fmt("case %zu: count = %d (a=%g)", i, r.unstable_count, cases[i].a);
            } catch (const std::exception& e) {
                what = fmt("case %zu: %s", i, e.what());
            }
            bad.fetch_add(1);
            std::lock_guard<std::mutex> lock(note_mutex);
            if (first_bad.empty()) first_bad = what;
        },
        jobs);
    return {bad.load() == 0,
            bad.load() == 0 ? "1000 cases clean" : fmt("%d bad; first: %s", bad.load(),
                                                       first_bad.c_str())};
}

// 6. Two-delay boundary approaches its vertical asymptote a = 2p - 1.
Outcome c6_asymptote(int) {
    const double p = 0.6;
    const double r = 1.0 / p;  // mean 1
    const DelayDistribution dist =
        DelayDistribution::discrete({{0.0, 1.0 - p}, {r, p}});
    const TraceResult tr = trace_boundary(dist, {});
    const auto branches = hopf_branches(tr);
    if (branches.empty()) return {false, "no branch traced"};
    const double target = asymptote_two_delay(p);
    double worst = 0.0;
    int checked = 0;
    for (const BoundaryPoint& pt : branches[0]->points)
        if (pt.E > 1e3) {
            ++checked;
            worst = std::max(worst, std::abs(pt.a - target));
        }
    if (checked == 0) return {false, "no points with E > 1e3 on the first branch"};
    return {worst < 0.01, fmt("max |a - %.1f| = %.4f over %d tail points", target, worst,
                              checked)};
}

// 7. Leading root of the unit-delay case against the frozen oracle.
Outcome c7_leading_oracle(int) {
    const std::complex<double> oracle{-0.3181315052047641, 1.3372357014306895};
    const std::complex<double> lead = leading_root(0.0, DelayDistribution::dirac(1.0));
    const double err = std::abs(lead - oracle);
    return {err < 1e-4, fmt("lead = %.6f%+.6fi, |err| = %.2e", lead.real(), lead.imag(), err)};
}

// 8. Simulated decay rates track the leading root's real part.
Outcome c8_simulator_agreement(int jobs, unsigned long long seed) {
    detail::Rng rng(seed != 0 ? seed * 2654435761ULL + 1ULL : 823543ULL);
    struct Triple {
        DelayDistribution dist;
        double a, E, re;
    };
    std::vector<Triple> triples;
    int attempts = 0;
    while (triples.size() < 20 && ++attempts < 2000) {
        const double a = rng.uniform(-0.9, 0.9);
        const double E = rng.uniform(0.3, 2.5);
        const int kind = static_cast<int>(rng.uniform_int(0, 4));
        try {
            DelayDistribution base = [&]() -> DelayDistribution {
                switch (kind) {
                    case 0: {
                        const long n = rng.uniform_int(1, 5);
                        std::vector<Atom> atoms;
                        for (long k = 0; k < n; ++k)
                            atoms.push_back({rng.uniform(0.05, 2.0), rng.uniform(0.05, 1.0)});
                        return DelayDistribution::discrete(std::move(atoms));
                    }
                    case 1:
                        return DelayDistribution::exponential(1.0);
                    case 2:
                        return DelayDistribution::gamma(
                            static_cast<int>(rng.uniform_int(1, 6)), 1.0);
                    case 3: {
                        const double lo = rng.uniform(0.0, 1.0);
                        return DelayDistribution::uniform(lo, lo + rng.uniform(0.1, 2.0));
                    }
                    default:
                        return DelayDistribution::dirac(1.0);
                }
            }();
            const DelayDistribution dist = scale_to_mean(base, E);
            const std::complex<double> lead = leading_root(a, dist);
            if (std::abs(lead.real()) > 0.05 && std::abs(lead.real()) < 2.5)
                triples.push_back({dist, a, E, lead.real()});
        } catch (const std::exception&) {
            // skip awkward candidates
        }
    }
    if (triples.size() < 20) return {false, fmt("only %zu usable triples", triples.size())};

    std::atomic<int> bad{0};
    std::mutex note_mutex;
    std::string first_bad;
    detail::parallel_for(
        triples.size(),
        [&](std::size_t i) {
            const Triple& tr = triples[i];
            std::string what;
            bool ok = false;
            for (int attempt = 0; attempt < 3 && !ok; ++attempt) {
                const double T_cap = 600.0 / std::max(std::abs(tr.re), 0.05);
                const double T =
                    std::max(10.1 * tr.E, std::min(40.0 * tr.E * (1 << attempt), T_cap));
                SimOptions opts;
                opts.T = T;
                try {
                    const SimulationTrace trace = simulate(tr.a, 1.0, tr.dist, opts);
                    const double rate = decay_rate(trace);
                    ok = std::abs(rate - tr.re) <= 0.05 * std::abs(tr.re);
                    if (!ok) what = fmt("triple %zu: rate %.4f vs root %.4f", i, rate, tr.re);
                } catch (const std::exception& e) {
                    // a short tail window is retried with a longer horizon
                    what = fmt("triple %zu: %s", i, e.what());
                }
            }
            if (ok) return;
            bad.fetch_add(1);
            std::lock_guard<std::mutex> lock(note_mutex);
            if (first_bad.empty()) first_bad = what;
        },
        jobs);
    return {bad.load() == 0,
            bad.load() == 0 ? "20 triples within 5%" : fmt("%d bad; first: %s", bad.load(),
                                                           first_bad.c_str())};
}

// 9. Order-2 gamma kernel at a = 0.05: stable, then unstable, then stable
// again as the mean grows; transitions sit within one cell of the traced
// boundary.
Outcome c9_reversion(int jobs) {
    const DelayDistribution dist = DelayDistribution::gamma(2, 1.0);
    const double a = 0.05;

    const TraceResult tr = trace_boundary(dist, {});
    const auto branches = hopf_branches(tr);
    if (branches.empty()) return {false, "no branch traced"};
    std::vector<double> crossings;
    const auto& pts = branches[0]->points;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const double f0 = pts[i - 1].a - a, f1 = pts[i].a - a;
        if (f0 == 0.0) crossings.push_back(pts[i - 1].E);
        if ((f0 < 0.0) != (f1 < 0.0)) {
            const double w = f0 / (f0 - f1);
            crossings.push_back(pts[i - 1].E + w * (pts[i].E - pts[i - 1].E));
        }
    }
    if (crossings.size() != 2)
        return {false, fmt("expected 2 boundary crossings at a=%.2f, got %zu", a,
                           crossings.size())};

    const double cell = 2.0;
    std::vector<double> e_axis;
    for (double E = 1.0; E <= 401.0 + 1e-9; E += cell) e_axis.push_back(E);
    const ChartGrid grid = chart(dist, {a}, e_axis, jobs);

    // locate the unstable run
    std::size_t first_u = grid.e_axis.size(), last_u = 0;
    for (std::size_t i = 0; i < grid.e_axis.size(); ++i) {
        if (grid.status[i] == CellStatus::Failed || grid.status[i] == CellStatus::Marginal)
            return {false, fmt("cell E=%g is %s", grid.e_axis[i], to_string(grid.status[i]))};
        if (grid.status[i] == CellStatus::Unstable) {
            first_u = std::min(first_u, i);
            last_u = std::max(last_u, i);
        }
    }
    if (first_u == grid.e_axis.size() || first_u == 0 || last_u + 1 == grid.e_axis.size())
        return {false, "no interior unstable band found"};
    for (std::size_t i = 0; i < grid.e_axis.size(); ++i) {
        const bool inside = i >= first_u && i <= last_u;
        const bool unstable = grid.status[i] == CellStatus::Unstable;
        if (inside != unstable) return {false, fmt("ragged band at cell E=%g", grid.e_axis[i])};
    }
    const double t1 = grid.e_axis[first_u] - 0.5 * cell;  // between the straddling cells
    const double t2 = grid.e_axis[last_u] + 0.5 * cell;
    const bool ok = std::abs(t1 - crossings[0]) <= cell && std::abs(t2 - crossings[1]) <= cell;
    return {ok, fmt("transitions at E ~ %.2f, %.2f vs boundary %.4f, %.4f", t1, t2,
                    crossings[0], crossings[1])};
}

// 10. Scalar inequalities behind the construction: sign of the level-curve
// expression, the chord constant, and the global chord bound on cos.
Outcome c10_inequalities(int) {
    // z*(2 - 2cos z - z sin z) > 0 on (0, pi], evaluated in the factored form
    // 2*z*sin(z/2)*(2 sin(z/2) - z cos(z/2)) to survive the z -> 0 cancellation.
    for (int k = 1; k <= 100000; ++k) {
        const double z = kPi * k / 100000.0;
        const double s = std::sin(0.5 * z), c = std::cos(0.5 * z);
        const double value = 2.0 * z * s * (2.0 * s - z * c);
        if (!(value > 0.0)) return {false, fmt("expression not positive at z = %.8f", z)};
    }
    const double c = chord_constant();
    if (std::abs(c - 0.725) > 0.001) return {false, fmt("chord constant %.6f", c)};
    for (int k = 0; k <= 100000; ++k) {
        const double theta = 20.0 * k / 100000.0;
        if (std::cos(theta) < 1.0 - c * theta - 1e-12)
            return {false, fmt("chord bound fails at theta = %.6f", theta)};
    }
    return {true, fmt("chord constant %.6f, angle %.6f", c, chord_angle())};
}

}  // namespace

int run_acceptance(std::ostream& os, int jobs, unsigned long long seed) {
    struct Item {
        const char* name;
        double budget_s;  // 0 = no runtime requirement
        std::function<Outcome(int)> fn;
    };
    const std::vector<Item> items = {
        {"gamma kernel boundary curve and peak", 5.0, c1_gamma_boundary},
        {"exponential kernel boundary E = -1/a", 5.0, c2_exponential_boundary},
        {"two-delay worked example reduction", 0.0, c3_worked_example},
        {"single-delay boundary sharpness", 10.0, c4_sharpness},
        {"random distributions under the universal bound", 120.0,
         [seed](int j) { return c5_universal_bound(j, seed); }},
        {"two-delay boundary asymptote", 0.0, c6_asymptote},
        {"unit-delay leading root oracle", 0.0, c7_leading_oracle},
        {"simulated decay rates vs leading roots", 120.0,
         [seed](int j) { return c8_simulator_agreement(j, seed); }},
        {"reversion to stability for the gamma kernel", 0.0, c9_reversion},
        {"chord and level-curve inequalities", 0.0, c10_inequalities},
    };

    int failures = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome oc;
        try {
            oc = items[i].fn(jobs);
        } catch (const std::exception& e) {
            oc = {false, e.what()};
        }
        const double sec =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (items[i].budget_s > 0.0 && sec >= items[i].budget_s) {
            oc.pass = false;
            oc.note = fmt("over %.0f s budget; %s", items[i].budget_s, oc.note.c_str());
        }
        if (!oc.pass) ++failures;
        char line[512];
        std::snprintf(line, sizeof line, "[%s] %02zu %s (%.2f s)%s%s",
                      oc.pass ? "PASS" : "FAIL", i + 1, items[i].name, sec,
                      oc.note.empty() ? "" : " -- ", oc.note.c_str());
        os << line << '\n';
    }
    return failures;
}

}  // namespace delaystab
