#include "delaystab/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "delaystab/detail/numeric.hpp"

namespace delaystab {

namespace {

using detail::NumericalError;

DelayDistribution to_steps_form(const DelayDistribution& dist) {
    if (const auto* d = std::get_if<DiracMass>(&dist.kind()))
        return DelayDistribution::discrete({{d->location, 1.0}});
    if (dist.is_discrete()) return dist;
    return discretize(dist, 64);
}

double hermite(double x0, double f0, double x1, double f1, double theta, double dt) {
    const double t2 = theta * theta, t3 = t2 * theta;
    return (2 * t3 - 3 * t2 + 1) * x0 + (t3 - 2 * t2 + theta) * dt * f0 +
           (-2 * t3 + 3 * t2) * x1 + (t3 - t2) * dt * f1;
}

std::size_t step_count(double T, double dt) {
    const double n = std::ceil(T / dt - 1e-9);
    if (!(n >= 1.0) || n > 5e7)
        throw std::invalid_argument("simulate: T/dt out of range");
    return static_cast<std::size_t>(n);
}

void sample_history(SimulationTrace& trace, const HistoryFn& h, double cover, double dt) {
    const std::size_t n = cover > 0.0 ? static_cast<std::size_t>(std::ceil(cover / dt)) : 0;
    trace.hist_times.resize(n + 1);
    trace.hist_values.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        const double t = -static_cast<double>(n - i) * dt;
        trace.hist_times[i] = t;
        trace.hist_values[i] = h(t);
    }
}

SimulationTrace run_steps(double a, double b, const DelayDistribution& mix,
                          const HistoryFn& h, double T, double dt) {
    double a_eff = a + b * weight_at_zero(mix);
    std::vector<Atom> delayed;
    for (const Atom& at : std::get<DiscreteMixture>(mix.kind()).atoms)
        if (at.delay > 0.0) delayed.push_back(at);

    double tau_min = 0.0, tau_max = 0.0;
    for (const Atom& at : delayed) {
        tau_min = tau_min == 0.0 ? at.delay : std::min(tau_min, at.delay);
        tau_max = std::max(tau_max, at.delay);
    }
    if (!delayed.empty() && dt > tau_min / 4.0)
        throw std::invalid_argument(
            "simulate: dt must not exceed a quarter of the smallest positive delay");

    const std::size_t n_steps = step_count(T, dt);
    std::vector<double> x(n_steps + 1), f(n_steps + 1);

    // Delayed reads at t <= 0 come straight from the initial function; past
    // that they interpolate the stored nodes (dt <= tau_min/4 keeps every
    // read at least three nodes behind the integration front).
    auto read = [&](double s) -> double {
        if (s <= 0.0) return h(s);
        double ip;
        const double theta = std::modf(s / dt, &ip);
        const std::size_t j = static_cast<std::size_t>(ip);
        if (j >= n_steps) return x[n_steps];
        if (theta == 0.0) return x[j];
        return hermite(x[j], f[j], x[j + 1], f[j + 1], theta, dt);
    };
    auto delayed_sum = [&](double s) {
        double acc = 0.0;
        for (const Atom& at : delayed) acc += at.weight * read(s - at.delay);
        return acc;
    };

    x[0] = h(0.0);
    f[0] = -a_eff * x[0] - b * delayed_sum(0.0);
    for (std::size_t i = 0; i < n_steps; ++i) {
        const double t = i * dt;
        const double d_half = b * delayed_sum(t + 0.5 * dt);
        const double d_full = b * delayed_sum(t + dt);
        const double k1 = f[i];
        const double k2 = -a_eff * (x[i] + 0.5 * dt * k1) - d_half;
        const double k3 = -a_eff * (x[i] + 0.5 * dt * k2) - d_half;
        const double k4 = -a_eff * (x[i] + dt * k3) - d_full;
        x[i + 1] = x[i] + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        f[i + 1] = -a_eff * x[i + 1] - d_full;
    }

    SimulationTrace trace;
    trace.a = a;
    trace.b = b;
    trace.dt = dt;
    trace.times.resize(n_steps + 1);
    for (std::size_t i = 0; i <= n_steps; ++i) trace.times[i] = i * dt;
    trace.values = std::move(x);
    sample_history(trace, h, tau_max, dt);
    return trace;
}

double erlang_cut(int p, double beta) {
    double hi = (p + 10.0 * std::sqrt(static_cast<double>(p)) + 40.0) / beta;
    while (detail::gamma_p(p, beta * hi) < 1.0 - 1e-12) hi *= 1.5;
    return hi;
}

SimulationTrace run_chain(double a, double b, int p, double mean_delay,
                          const HistoryFn& h, double T, double dt) {
    const double beta = p / mean_delay;
    if (beta * dt > 2.0)
        throw std::invalid_argument("simulate: dt too large for the kernel rate");

    // y_k(0) = integral of the order-k Erlang density against the history.
    const double cut = erlang_cut(p, beta);
    std::vector<double> y(p + 1);  // y[0] unused
    for (int k = 1; k <= p; ++k) {
        auto fn = [&](double tau) {
            const double lf = k * std::log(beta) + (k - 1) * std::log(tau) -
                              beta * tau - std::lgamma(k);
            return std::exp(lf) * h(-tau);
        };
        y[k] = detail::integrate(fn, 0.0, cut, 1e-12);
    }

    const std::size_t n_steps = step_count(T, dt);
    SimulationTrace trace;
    trace.a = a;
    trace.b = b;
    trace.dt = dt;
    trace.times.resize(n_steps + 1);
    trace.values.resize(n_steps + 1);

    std::vector<double> s(p + 1), k1(p + 1), k2(p + 1), k3(p + 1), k4(p + 1),
        tmp(p + 1);
    s[0] = h(0.0);
    for (int k = 1; k <= p; ++k) s[k] = y[k];
    auto rhs = [&](const std::vector<double>& st, std::vector<double>& out) {
        out[0] = -a * st[0] - b * st[p];
        out[1] = beta * (st[0] - st[1]);
        for (int k = 2; k <= p; ++k) out[k] = beta * (st[k - 1] - st[k]);
    };

    trace.values[0] = s[0];
    for (std::size_t i = 0; i < n_steps; ++i) {
        rhs(s, k1);
        for (int k = 0; k <= p; ++k) tmp[k] = s[k] + 0.5 * dt * k1[k];
        rhs(tmp, k2);
        for (int k = 0; k <= p; ++k) tmp[k] = s[k] + 0.5 * dt * k2[k];
        rhs(tmp, k3);
        for (int k = 0; k <= p; ++k) tmp[k] = s[k] + dt * k3[k];
        rhs(tmp, k4);
        for (int k = 0; k <= p; ++k)
            s[k] += dt / 6.0 * (k1[k] + 2 * k2[k] + 2 * k3[k] + k4[k]);
        trace.values[i + 1] = s[0];
        trace.times[i + 1] = (i + 1) * dt;
    }
    sample_history(trace, h, cut, dt);
    return trace;
}

// Indices of local extrema of x within [begin, end).
std::vector<std::size_t> extrema_indices(const std::vector<double>& x, std::size_t begin,
                                         std::size_t end) {
    std::vector<std::size_t> idx;
    for (std::size_t i = std::max<std::size_t>(begin, 1) ; i + 1 < end; ++i) {
        const double dl = x[i] - x[i - 1], dr = x[i + 1] - x[i];
        if (dl == 0.0 && dr == 0.0) continue;
        if (dl * dr <= 0.0) idx.push_back(i);
    }
    return idx;
}

double ls_slope(const std::vector<double>& t, const std::vector<double>& v) {
    const std::size_t n = t.size();
    double mt = 0.0, mv = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mt += t[i];
        mv += v[i];
    }
    mt /= n;
    mv /= n;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        num += (t[i] - mt) * (v[i] - mv);
        den += (t[i] - mt) * (t[i] - mt);
    }
    if (den == 0.0) throw NumericalError("decay_rate: degenerate time window");
    return num / den;
}

}  // namespace

double default_dt(const DelayDistribution& dist) {
    if (const auto* g = std::get_if<GammaKernel>(&dist.kind()))
        return std::min(g->mean / 200.0, g->mean / (2.0 * g->order));
    if (const auto* e = std::get_if<Exponential>(&dist.kind())) return e->mean / 200.0;
    const DelayDistribution form = to_steps_form(dist);
    const double m = mean(form);
    const double tmin = min_positive_delay(form);
    double dt = 0.0;
    if (m > 0.0) dt = m / 200.0;
    if (tmin > 0.0) dt = dt > 0.0 ? std::min(dt, tmin / 8.0) : tmin / 8.0;
    return dt > 0.0 ? dt : 0.01;
}

double default_T(const DelayDistribution& dist) {
    const double m = mean(dist);
    return m > 0.0 ? 40.0 * m : 10.0;
}

SimulationTrace simulate(double a, double b, const DelayDistribution& dist,
                         const HistoryFn& history, double T, double dt) {
    if (!std::isfinite(a) || !std::isfinite(b))
        throw std::invalid_argument("simulate: a, b must be finite");
    if (!history) throw std::invalid_argument("simulate: history function required");
    if (!(dt > 0.0)) throw std::invalid_argument("simulate: dt must be > 0");
    const double m = mean(dist);
    if (!(T > 0.0) || T < 10.0 * m * (1.0 - 1e-9))
        throw std::invalid_argument("simulate: T must exceed 10x the mean delay");

    if (const auto* g = std::get_if<GammaKernel>(&dist.kind()))
        return run_chain(a, b, g->order, g->mean, history, T, dt);
    if (const auto* e = std::get_if<Exponential>(&dist.kind()))
        return run_chain(a, b, 1, e->mean, history, T, dt);
    return run_steps(a, b, to_steps_form(dist), history, T, dt);
}

SimulationTrace simulate(double a, double b, const DelayDistribution& dist,
                         const SimOptions& opts) {
    const double T = opts.T > 0.0 ? opts.T : default_T(dist);
    const double dt = opts.dt > 0.0 ? opts.dt : default_dt(dist);
    return simulate(a, b, dist, [](double) { return 1.0; }, T, dt);
}

double decay_rate(const SimulationTrace& trace) {
    const std::vector<double>& x = trace.values;
    if (x.size() < 16) throw std::invalid_argument("decay_rate: trace too short");
    const std::size_t begin = (2 * x.size()) / 3;

    std::vector<double> te, le;
    for (std::size_t i : extrema_indices(x, begin, x.size())) {
        const double ax = std::abs(x[i]);
        if (ax > 1e-280) {
            te.push_back(trace.times[i]);
            le.push_back(std::log(ax));
        }
    }
    if (te.size() >= 4) return ls_slope(te, le);

    // Non-oscillatory tail (near-real leading root): regress log |x| directly.
    bool sign_change = false;
    for (std::size_t i = begin + 1; i < x.size(); ++i)
        if ((x[i] > 0.0) != (x[i - 1] > 0.0)) sign_change = true;
    if (!sign_change) {
        te.clear();
        le.clear();
        for (std::size_t i = begin; i < x.size(); ++i) {
            const double ax = std::abs(x[i]);
            if (ax > 1e-280) {
                te.push_back(trace.times[i]);
                le.push_back(std::log(ax));
            }
        }
        if (te.size() >= 8) return ls_slope(te, le);
    }
    throw NumericalError(
        "decay_rate: fewer than 4 envelope extrema in the tail; increase T");
}

double oscillation_frequency(const SimulationTrace& trace) {
    const std::vector<double>& x = trace.values;
    if (x.size() < 16) throw std::invalid_argument("oscillation_frequency: trace too short");
    const std::size_t begin = (2 * x.size()) / 3;
    const std::vector<std::size_t> idx = extrema_indices(x, begin, x.size());
    if (idx.size() < 3) return 0.0;
    const double span = trace.times[idx.back()] - trace.times[idx.front()];
    const double spacing = span / (idx.size() - 1);
    return std::numbers::pi / spacing;  // extrema sit half a period apart
}

void write_trace(std::ostream& os, const SimulationTrace& trace, char sep) {
    os << 't' << sep << "x\n";
    char buf[40];
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", trace.times[i]);
        os << buf << sep;
        std::snprintf(buf, sizeof buf, "%.17g", trace.values[i]);
        os << buf << '\n';
    }
}

HistoryFn load_history_csv(std::istream& is) {
    std::vector<double> ts, xs;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line == "\r") continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        double t, v;
        if (!(row >> t >> v)) {
            if (ts.empty()) continue;  // header
            throw std::invalid_argument("history file: malformed row: " + line);
        }
        ts.push_back(t);
        xs.push_back(v);
    }
    if (ts.empty()) throw std::invalid_argument("history file: no samples");
    if (!std::is_sorted(ts.begin(), ts.end()))
        throw std::invalid_argument("history file: times must be ascending");
    if (ts.back() > 1e-9)
        throw std::invalid_argument("history file: times must be <= 0");

    return [ts = std::move(ts), xs = std::move(xs)](double t) {
        if (t <= ts.front()) return xs.front();
        if (t >= ts.back()) return xs.back();
        const auto it = std::upper_bound(ts.begin(), ts.end(), t);
        const std::size_t j = static_cast<std::size_t>(it - ts.begin());
        const double w = (t - ts[j - 1]) / (ts[j] - ts[j - 1]);
        return xs[j - 1] + w * (xs[j] - xs[j - 1]);
    };
}

}  // namespace delaystab
