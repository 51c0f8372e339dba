#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "delaystab/charfun.hpp"
#include "delaystab/distribution.hpp"

namespace delaystab {

enum class Stability {
    Stable,
    Unstable,
    Marginal,
    DistributionDependent,
};

const char* to_string(Stability s);

// Final answer for one (a, b, dist) query, with whatever witness settled it.
struct StabilityVerdict {
    Stability status = Stability::DistributionDependent;
    std::optional<double> omega_s;                        // crossing frequency
    std::optional<std::complex<double>> leading_root;     // rightmost root
    std::optional<double> bound_used;                     // contour radius
    std::optional<int> unstable_count;
};

// Delay-independent classification of x' = -a x - b x_delayed from the signs
// of a and b alone. DistributionDependent means the delay law matters.
Stability classify_region(double a, double b);

// Critical delay arccos(-a/b) / sqrt(b^2 - a^2); requires b > |a|.
double universal_bound(double a, double b);

// Exact single-delay verdict for x' = -a x - b x(t - tau).
Stability hayes_verdict(double a, double b, double tau);

// Outcome of the frequency-sweep sufficient condition (unit b, |a| < 1):
// proven_stable == true rules out roots in the closed right half-plane;
// otherwise omega_s holds the first crossing frequency that could not be
// excluded and the test is silent.
struct SufficientOutcome {
    bool proven_stable = false;
    std::optional<double> omega_s;
};

SufficientOutcome sufficient_test(double a, const DelayDistribution& dist);

// All omega in (0, sqrt(1-a^2)] with C(omega) = -a and S(omega) >= omega,
// ascending. Empty when |a| > 1.
std::vector<double> hopf_crossings(double a, const DelayDistribution& dist);

// Zeros of C(omega) + a on (0, w_hi], ascending, without the S(omega) >= omega
// filter. The extremal construction targets these frequencies, which may sit
// beyond the sqrt(1-a^2) cap used by the stability tests.
std::vector<double> crossing_candidates(double a, const DelayDistribution& dist, double w_hi);

// Full decision pipeline: region classification, then (when the region is
// distribution-dependent) the sufficient test, then the root census.
StabilityVerdict decide_stability(double a, double b, const DelayDistribution& dist,
                                  const CharfunOptions& opts = {});

std::string to_json(const StabilityVerdict& verdict);

}  // namespace delaystab
