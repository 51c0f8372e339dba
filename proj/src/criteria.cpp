#include "delaystab/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

#include "delaystab/detail/numeric.hpp"

namespace delaystab {

namespace {

// Solutions of C(omega) + a = 0 on (0, sqrt(1-a^2)], the window where an
// imaginary-axis root can hide.
std::vector<double> crossing_frequencies(double a, const DelayDistribution& dist) {
    if (std::abs(a) > 1.0) return {};
    return crossing_candidates(a, dist, std::sqrt(std::max(0.0, 1.0 - a * a)));
}

}  // namespace

const char* to_string(Stability s) {
    switch (s) {
        case Stability::Stable: return "Stable";
        case Stability::Unstable: return "Unstable";
        case Stability::Marginal: return "Marginal";
        case Stability::DistributionDependent: return "DistributionDependent";
    }
    return "?";
}

Stability classify_region(double a, double b) {
    if (!std::isfinite(a) || !std::isfinite(b))
        throw std::invalid_argument("classify_region: a, b must be finite");
    if (a + b < 0.0) return Stability::Unstable;   // positive real root
    if (a + b == 0.0) return Stability::Marginal;  // root at the origin
    if (a >= std::abs(b)) return Stability::Stable;
    return Stability::DistributionDependent;  // only reachable for b > |a|
}

double universal_bound(double a, double b) {
    if (!(b > std::abs(a)))
        throw std::domain_error("universal_bound: requires b > |a|");
    return std::acos(-a / b) / std::sqrt(b * b - a * a);
}

Stability hayes_verdict(double a, double b, double tau) {
    if (!(tau >= 0.0)) throw std::invalid_argument("hayes_verdict: tau must be >= 0");
    const Stability region = classify_region(a, b);
    if (region != Stability::DistributionDependent) return region;
    const double bound = universal_bound(a, b);
    if (std::abs(tau - bound) <= 1e-14 * (1.0 + bound)) return Stability::Marginal;
    return tau < bound ? Stability::Stable : Stability::Unstable;
}

SufficientOutcome sufficient_test(double a, const DelayDistribution& dist) {
    if (!(std::abs(a) < 1.0))
        throw std::domain_error("sufficient_test: requires |a| < 1");
    for (double w : crossing_frequencies(a, dist)) {
        const double s = trig_moments(dist, w).s;
        if (s >= w - 1e-12) return {false, w};
    }
    return {true, std::nullopt};
}

std::vector<double> hopf_crossings(double a, const DelayDistribution& dist) {
    std::vector<double> out;
    for (double w : crossing_frequencies(a, dist))
        if (trig_moments(dist, w).s >= w - 1e-12) out.push_back(w);
    return out;
}

std::vector<double> crossing_candidates(double a, const DelayDistribution& dist, double w_hi) {
    std::vector<double> roots;
    // |C| <= 1, so C + a keeps one sign whenever |a| > 1.
    if (std::abs(a) > 1.0 || !(w_hi > 0.0)) return roots;

    auto g = [&](double w) { return trig_moments(dist, w).c + a; };
    const int n = 2048;
    double w_prev = w_hi / n;
    double g_prev = g(w_prev);
    if (g_prev == 0.0) roots.push_back(w_prev);
    for (int i = 2; i <= n; ++i) {
        const double w = w_hi * i / n;
        const double gv = g(w);
        if (gv == 0.0) {
            roots.push_back(w);
        } else if (g_prev != 0.0 && std::signbit(gv) != std::signbit(g_prev)) {
            roots.push_back(detail::bisect(g, w_prev, w, 1e-12));
        }
        w_prev = w;
        g_prev = gv;
    }
    roots.erase(std::unique(roots.begin(), roots.end(),
                            [](double x, double y) { return std::abs(x - y) < 1e-9; }),
                roots.end());
    return roots;
}

StabilityVerdict decide_stability(double a, double b, const DelayDistribution& dist,
                                  const CharfunOptions& opts) {
    StabilityVerdict v;
    v.status = classify_region(a, b);
    if (v.status == Stability::Marginal) {
        v.leading_root = std::complex<double>{0.0, 0.0};  // the zero root itself
        return v;
    }
    if (v.status != Stability::DistributionDependent) return v;

    // A Dirac mass has an exact closed-form verdict; consult it first so an
    // input sitting on the boundary itself reads Marginal instead of landing
    // on whichever side the frequency grid straddles.
    if (const auto* d = std::get_if<DiracMass>(&dist.kind())) {
        if (hayes_verdict(a, b, d->location) == Stability::Marginal) {
            v.status = Stability::Marginal;
            v.omega_s = std::sqrt(b * b - a * a);
            v.bound_used = universal_bound(a, b);
            return v;
        }
    }

    // b > |a| here; rescale time by b so the delayed term has unit weight.
    const double a_n = a / b;
    const DelayDistribution scaled = scale_delays(dist, b);

    const SufficientOutcome quick = sufficient_test(a_n, scaled);
    if (quick.proven_stable) {
        v.status = Stability::Stable;
        return v;
    }
    v.omega_s = *quick.omega_s * b;  // report in original time units

    const RootReport report = count_unstable_roots(a_n, scaled, opts);
    v.unstable_count = report.unstable_count;
    v.leading_root = b * report.leading_root;
    v.bound_used = report.contour_bound * b;
    if (report.marginal)
        v.status = Stability::Marginal;
    else
        v.status = report.unstable_count > 0 ? Stability::Unstable : Stability::Stable;
    return v;
}

std::string to_json(const StabilityVerdict& verdict) {
    nlohmann::json j;
    j["status"] = to_string(verdict.status);
    nlohmann::json witness;
    if (verdict.leading_root)
        witness["leading_root"] = {verdict.leading_root->real(), verdict.leading_root->imag()};
    else if (verdict.omega_s)
        witness["omega_s"] = *verdict.omega_s;
    if (!witness.empty()) j["witness"] = witness;
    if (verdict.bound_used) j["bound_used"] = *verdict.bound_used;
    if (verdict.unstable_count) j["unstable_count"] = *verdict.unstable_count;
    return j.dump();
}

}  // namespace delaystab
