#include "delaystab/charfun.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include "json.hpp"

#include "delaystab/detail/numeric.hpp"

namespace delaystab {

namespace {

using detail::NumericalError;
using std::complex;

constexpr double kPi = std::numbers::pi;
constexpr double kRadiusCap = 1e4;    // abort descent when the capture window blows up
constexpr double kNearRootAbs = 1e-11;  // min |F| on a contour before a retry

// A contour edge passed so close to a root that the winding is meaningless.
// The bisection treats this as information: the probe line pins the root.
class ContourGrazeError : public NumericalError {
  public:
    ContourGrazeError() : NumericalError("contour passes through a root") {}
};

complex<double> F(double a, const DelayDistribution& dist, complex<double> lambda) {
    return lambda + a + detail::laplace_continued(dist, lambda);
}

complex<double> dF(const DelayDistribution& dist, complex<double> lambda) {
    return 1.0 + detail::laplace_derivative(dist, lambda);
}

// Any root with Re(lambda) >= sigma satisfies |Im| <= |a| + sup|L| on that
// half-plane; the sup is 1 for sigma >= 0 and grows left of the axis.
double capture_radius(double a, const DelayDistribution& dist, double sigma) {
    const double base = std::abs(a) + 1.5;
    if (sigma >= 0.0) return base;
    if (const auto* g = std::get_if<GammaKernel>(&dist.kind())) {
        const double beta = g->order / g->mean;
        if (sigma <= -beta * (1.0 - 1e-9)) return std::numeric_limits<double>::infinity();
        return base + std::pow(1.0 + sigma / beta, -g->order);
    }
    if (const auto* e = std::get_if<Exponential>(&dist.kind())) {
        const double beta = 1.0 / e->mean;
        if (sigma <= -beta * (1.0 - 1e-9)) return std::numeric_limits<double>::infinity();
        return base + 1.0 / (1.0 + sigma / beta);
    }
    const double tau_max = max_delay(dist);
    const double expo = -sigma * tau_max;
    if (expo > 30.0) return std::numeric_limits<double>::infinity();
    return base + std::exp(expo);
}

// Phase-oscillation scale of L along a vertical contour edge (how many
// initial samples the edge needs before adaptive refinement takes over).
double oscillation_scale(const DelayDistribution& dist) {
    // For the rational kinds the transform varies on the pole scale
    // 1/beta = mean/order, which can dwarf the order itself.
    if (const auto* g = std::get_if<GammaKernel>(&dist.kind()))
        return std::max(0.5 * g->order, g->mean / g->order);
    if (const auto* e = std::get_if<Exponential>(&dist.kind()))
        return std::max(0.5, e->mean);
    return max_delay(dist);
}

// Accumulated change of arg F along the polyline z(t), subdividing until each
// step turns by less than ~pi/2. Tracks the smallest |F| seen.
double arg_change_edge(double a, const DelayDistribution& dist, complex<double> z0,
                       complex<double> z1, int seeds, double& min_abs) {
    struct Seg {
        double t0, t1;
        complex<double> f0, f1;
    };
    auto at = [&](double t) { return z0 + t * (z1 - z0); };

    std::vector<Seg> stack;
    std::vector<complex<double>> seed_vals(seeds + 1);
    for (int i = 0; i <= seeds; ++i) {
        seed_vals[i] = F(a, dist, at(static_cast<double>(i) / seeds));
        min_abs = std::min(min_abs, std::abs(seed_vals[i]));
    }
    stack.reserve(seeds + 16);
    for (int i = seeds; i > 0; --i)
        stack.push_back({(i - 1.0) / seeds, static_cast<double>(i) / seeds,
                         seed_vals[i - 1], seed_vals[i]});

    double total = 0.0;
    while (!stack.empty()) {
        Seg s = stack.back();
        stack.pop_back();
        if (std::abs(s.f0) < kNearRootAbs || std::abs(s.f1) < kNearRootAbs)
            throw ContourGrazeError();
        const double delta = std::arg(s.f1 / s.f0);
        if (std::abs(delta) <= 0.5 * kPi * 0.999) {
            total += delta;
            continue;
        }
        if (s.t1 - s.t0 < 1e-14)
            throw NumericalError("cannot resolve the phase along the contour");
        const double tm = 0.5 * (s.t0 + s.t1);
        const complex<double> fm = F(a, dist, at(tm));
        min_abs = std::min(min_abs, std::abs(fm));
        stack.push_back({s.t0, tm, s.f0, fm});
        stack.push_back({tm, s.t1, fm, s.f1});
    }
    return total;
}

int winding_count(double a, const DelayDistribution& dist, double sigma, double R) {
    const complex<double> c0{sigma, -R}, c1{R, -R}, c2{R, R}, c3{sigma, R};
    const double osc = oscillation_scale(dist);
    const int side_seeds = 32;
    const int left_seeds = static_cast<int>(
        std::clamp(2.0 * R * osc / 1.2 + 33.0, 33.0, 40000.0));

    double min_abs = std::numeric_limits<double>::infinity();
    double total = 0.0;
    total += arg_change_edge(a, dist, c0, c1, side_seeds, min_abs);
    total += arg_change_edge(a, dist, c1, c2, side_seeds, min_abs);
    total += arg_change_edge(a, dist, c2, c3, side_seeds, min_abs);
    total += arg_change_edge(a, dist, c3, c0, left_seeds, min_abs);

    const double w = total / (2.0 * kPi);
    const long n = std::lround(w);
    if (std::abs(w - n) > 0.2)
        throw NumericalError("winding number did not settle on an integer");
    if (n < 0) throw NumericalError("negative winding count (contour error)");
    return static_cast<int>(n);
}

int count_right_with_retries(double a, const DelayDistribution& dist, double sigma,
                             const CharfunOptions& opts, double* bound_used = nullptr) {
    const double R0 = capture_radius(a, dist, sigma);
    if (!(R0 < kRadiusCap))
        throw NumericalError("root-capture window exceeds the search cap");
    for (int attempt = 0;; ++attempt) {
        const double R = R0 * (1.0 + 0.0137 * attempt);
        try {
            const int n = winding_count(a, dist, sigma, R);
            if (bound_used) *bound_used = R;
            return n;
        } catch (const NumericalError&) {
            if (attempt >= opts.max_retries) throw;
        }
    }
}

// Like count_right_with_retries but additionally jitters sigma as a last
// resort (used from the bisection where a root can sit on the probe line).
// sigma_used reports the probe line the returned count belongs to.
int probe_count(double a, const DelayDistribution& dist, double sigma,
                double jitter_scale, const CharfunOptions& opts,
                double* sigma_used = nullptr) {
    const double offsets[] = {0.0, 0.031, -0.043, 0.057};
    for (std::size_t i = 0; i < std::size(offsets); ++i) {
        const double s = sigma + offsets[i] * jitter_scale;
        try {
            const int n = count_right_with_retries(a, dist, s, opts);
            if (sigma_used) *sigma_used = s;
            return n;
        } catch (const NumericalError&) {
            if (i + 1 == std::size(offsets)) throw;
        }
    }
    throw NumericalError("unreachable");
}

// --- leading root via the equivalent ODE-chain polynomial (exp/gamma) -------

// Roots of a monic real polynomial sum c[k] x^k + x^n by Durand-Kerner.
std::vector<complex<double>> monic_roots(const std::vector<double>& c) {
    const int n = static_cast<int>(c.size());
    auto eval = [&](complex<double> z) {
        complex<double> v{1.0, 0.0};
        for (int k = n - 1; k >= 0; --k) v = v * z + c[k];
        return v;
    };
    std::vector<complex<double>> z(n);
    const complex<double> w = std::pow(complex<double>(0.4, 0.9), 1);
    z[0] = {0.4, 0.9};
    for (int i = 1; i < n; ++i) z[i] = z[i - 1] * w * complex<double>(1.01, 0.003);
    for (int iter = 0; iter < 600; ++iter) {
        double worst = 0.0;
        for (int i = 0; i < n; ++i) {
            complex<double> den{1.0, 0.0};
            for (int j = 0; j < n; ++j)
                if (j != i) den *= z[i] - z[j];
            if (std::abs(den) == 0.0) {
                z[i] += complex<double>(1e-8, 1e-8);
                worst = 1.0;
                continue;
            }
            const complex<double> step = eval(z[i]) / den;
            z[i] -= step;
            worst = std::max(worst, std::abs(step) / (1.0 + std::abs(z[i])));
        }
        if (worst < 1e-14) break;
    }
    return z;
}

// Exact root set of F for the exponential/gamma kinds via the equivalent
// ODE-chain polynomial (lambda + a)(lambda + beta)^p + beta^p = 0, which has
// the same zeros as the continued characteristic function away from -beta.
// nullopt for other kinds or orders past the polynomial solver's comfort.
std::optional<std::vector<complex<double>>> chain_roots(double a,
                                                        const DelayDistribution& dist) {
    int order = 0;
    double mean_val = 0.0;
    if (const auto* e = std::get_if<Exponential>(&dist.kind())) {
        order = 1;
        mean_val = e->mean;
    } else if (const auto* g = std::get_if<GammaKernel>(&dist.kind())) {
        order = g->order;
        mean_val = g->mean;
    } else {
        return std::nullopt;
    }
    if (order > 64) return std::nullopt;

    // Rescaled by mu = lambda/beta: (mu + a/beta)(mu + 1)^p + 1/beta = 0.
    const double beta = order / mean_val;
    std::vector<double> binom(order + 1);
    binom[0] = 1.0;
    for (int k = 1; k <= order; ++k)
        binom[k] = binom[k - 1] * (order - k + 1) / k;
    std::vector<double> c(order + 1);  // monic degree order+1
    c[0] = (a + 1.0) / beta;
    for (int j = 1; j <= order; ++j)
        c[j] = binom[j - 1] + (a / beta) * binom[j];

    std::vector<complex<double>> out = monic_roots(c);
    for (complex<double>& z : out) z *= beta;
    return out;
}

std::optional<complex<double>> chain_leading_root(double a, const DelayDistribution& dist,
                                                  const CharfunOptions& opts) {
    const auto roots = chain_roots(a, dist);
    if (!roots) return std::nullopt;
    const double beta = std::holds_alternative<Exponential>(dist.kind())
                            ? 1.0 / std::get<Exponential>(dist.kind()).mean
                            : std::get<GammaKernel>(dist.kind()).order /
                                  std::get<GammaKernel>(dist.kind()).mean;
    complex<double> best{-std::numeric_limits<double>::infinity(), 0.0};
    for (const complex<double>& lam : *roots)
        if (lam.real() > best.real()) best = lam;
    // Polish on the analytically continued characteristic function (identical
    // zero set away from lambda = -beta).
    complex<double> z = best;
    if (std::abs(z + beta) > 1e-6 * beta) {
        auto Ff = [&](complex<double> l) { return F(a, dist, l); };
        auto Fd = [&](complex<double> l) { return dF(dist, l); };
        complex<double> zz = z;
        if (detail::newton_complex(Ff, Fd, zz, opts.newton_tol) &&
            std::abs(zz - z) < 1e-3 * (1.0 + std::abs(z)))
            z = zz;
    }
    if (z.imag() < 0.0) z = std::conj(z);
    if (std::abs(z.imag()) < 1e-11) z = {z.real(), 0.0};
    return z;
}

// --- leading root via contour bisection --------------------------------------

double descent_scale(const DelayDistribution& dist) {
    double tau = max_delay(dist);
    if (!std::isfinite(tau)) tau = 4.0 * mean(dist);
    return 0.05 / std::max(1.0, tau);
}

complex<double> lead_by_contour(double a, const DelayDistribution& dist,
                                const CharfunOptions& opts) {
    const double tol = opts.marginal_tol;
    double lo = 0.0, hi = 2.0 * tol;  // fallback bracket when the first probe grazes
    int first = -1;                   // -1 marks a graze at sigma = tol (marginal root)
    try {
        first = probe_count(a, dist, tol, 0.0, opts);
    } catch (const ContourGrazeError&) {
    }
    if (first >= 1) {
        lo = tol;
        hi = capture_radius(a, dist, tol);
    } else if (first == 0) {
        // March left until the window contains a root. The probes are
        // jittered slightly (and tracked) so a root sitting on the dyadic
        // grid cannot stall the march.
        const double s0 = descent_scale(dist);
        double prev = tol;
        int k = 0;
        for (;; ++k) {
            const double sigma = -s0 * std::pow(2.0, k);
            if (!(capture_radius(a, dist, sigma) < kRadiusCap))
                throw NumericalError("leading root lies left of the searchable window");
            double used = sigma;
            int n;
            try {
                n = probe_count(a, dist, sigma, 0.02 * std::abs(sigma), opts, &used);
            } catch (const ContourGrazeError&) {
                // Every jittered line grazes a root: its real part is pinned
                // near sigma, which brackets tighter than another halving.
                lo = sigma * 1.1;
                hi = prev;
                break;
            }
            if (n >= 1) {
                lo = used;
                hi = prev;
                break;
            }
            prev = used;
        }
    }

    while (hi - lo > opts.bisect_width) {
        const double mid = 0.5 * (lo + hi);
        const double width = hi - lo;
        double used = mid;
        int n;
        try {
            n = probe_count(a, dist, mid, width, opts, &used);
        } catch (const ContourGrazeError&) {
            // The root sits within the jitter span of mid; the Newton stage
            // below locates it from there, so stop shrinking the bracket.
            lo = std::max(lo, mid - 0.1 * width);
            hi = std::min(hi, mid + 0.1 * width);
            break;
        }
        if (n >= 1)
            lo = used;
        else
            hi = used;
    }

    // The rightmost roots have Re in (lo, hi]; scan |F| along Re = lo for
    // their imaginary parts and polish each candidate by Newton.
    auto Ff = [&](complex<double> l) { return F(a, dist, l); };
    auto Fd = [&](complex<double> l) { return dF(dist, l); };
    const double R_line = capture_radius(a, dist, lo);

    for (int pass = 0; pass < 2; ++pass) {
        const int N = pass == 0 ? 4096 : 16384;
        std::vector<double> mags(N + 1);
        for (int i = 0; i <= N; ++i)
            mags[i] = std::abs(F(a, dist, {lo, R_line * i / N}));
        // Collect local minima (plus the y = 0 endpoint for real roots).
        std::vector<std::pair<double, double>> minima;  // (|F|, y)
        if (mags[0] <= mags[1]) minima.push_back({mags[0], 0.0});
        for (int i = 1; i < N; ++i)
            if (mags[i] <= mags[i - 1] && mags[i] <= mags[i + 1])
                minima.push_back({mags[i], R_line * i / N});
        std::sort(minima.begin(), minima.end());
        if (minima.size() > 16) minima.resize(16);

        complex<double> best{-std::numeric_limits<double>::infinity(), 0.0};
        for (const auto& [mag, y] : minima) {
            complex<double> z{lo, y};
            if (!detail::newton_complex(Ff, Fd, z, opts.newton_tol, 120)) continue;
            if (z.real() < lo - 1e-7 || z.real() > hi + 1e-7) continue;
            if (z.real() > best.real()) best = z;
        }
        if (std::isfinite(best.real())) {
            if (best.imag() < 0.0) best = std::conj(best);
            if (std::abs(best.imag()) < 1e-11) best = {best.real(), 0.0};
            return best;
        }
    }
    throw NumericalError("leading-root refinement did not converge");
}

}  // namespace

CharacteristicSample char_value(double a, const DelayDistribution& dist,
                                complex<double> lambda) {
    return CharacteristicSample{lambda, lambda + a + laplace(dist, lambda), a};
}

complex<double> char_derivative(double a, const DelayDistribution& dist,
                                complex<double> lambda) {
    (void)a;
    return dF(dist, lambda);
}

double omega_cap(double a) {
    if (std::abs(a) > 1.0)
        throw std::domain_error("omega_cap: |a| must be <= 1 (no imaginary crossing otherwise)");
    return std::sqrt(std::max(0.0, 1.0 - a * a));
}

std::complex<double> leading_root(double a, const DelayDistribution& dist,
                                  const CharfunOptions& opts) {
    if (std::abs(a) > 10.0)
        throw std::invalid_argument("leading_root: |a| <= 10 required for contour sizing");
    if (auto z = chain_leading_root(a, dist, opts)) return *z;
    return lead_by_contour(a, dist, opts);
}

RootReport count_unstable_roots(double a, const DelayDistribution& dist,
                                const CharfunOptions& opts) {
    if (std::abs(a) > 10.0)
        throw std::invalid_argument("count_unstable_roots: |a| <= 10 required for contour sizing");
    RootReport report;
    if (const auto roots = chain_roots(a, dist)) {
        // Exact census: every root right of the margin appears among the
        // polynomial's roots, so no contour is needed.
        int n = 0;
        double reach = 1.0;
        for (const complex<double>& z : *roots) {
            if (z.real() > opts.marginal_tol) ++n;
            reach = std::max(reach, 2.0 * std::abs(z));
        }
        report.unstable_count = n;
        report.contour_bound = reach;
    } else {
        double bound = 0.0;
        report.unstable_count =
            count_right_with_retries(a, dist, opts.marginal_tol, opts, &bound);
        report.contour_bound = bound;
    }
    report.leading_root = leading_root(a, dist, opts);
    report.marginal = std::abs(report.leading_root.real()) <= opts.marginal_tol;
    if (!report.marginal &&
        (report.unstable_count > 0) != (report.leading_root.real() > 0.0))
        throw NumericalError("count/leading-root disagreement");
    return report;
}

std::string to_json(const RootReport& report) {
    nlohmann::json j;
    j["unstable_count"] = report.unstable_count;
    j["leading_root"] = {report.leading_root.real(), report.leading_root.imag()};
    j["contour_bound"] = report.contour_bound;
    j["marginal"] = report.marginal;
    return j.dump();
}

namespace detail {

int roots_right_of(double a, const DelayDistribution& dist, double sigma,
                   const CharfunOptions& opts) {
    return count_right_with_retries(a, dist, sigma, opts);
}

}  // namespace detail

}  // namespace delaystab
