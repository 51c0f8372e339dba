#pragma once

#include <string>
#include <vector>

#include "delaystab/distribution.hpp"

namespace delaystab {

// Two-delay distribution (mass p1 at 0, p2 at tau2) that maximizes the sine
// moment at omega_s among all delay laws with the same mean and the same
// cosine moment there.
struct ExtremalPair {
    double tau1 = 0.0;
    double tau2 = 0.0;
    double p1 = 0.0;
    double p2 = 1.0;
    double omega_s = 0.0;
    double preserved_mean = 0.0;
    double preserved_c = 1.0;
    double s_star = 0.0;
    // Single-Dirac fallback taken because p1 would have been negative
    // (inputs outside the construction's hypothesis).
    bool clamped = false;
};

// One rewrite applied during reduce_to_extremal, with the mixture state and
// its invariants right after the rewrite.
struct ReductionStep {
    std::string action;  // "pair" or "merge+shrink"
    double tau_i = 0.0;  // delays consumed by a pair rewrite
    double tau_j = 0.0;
    DiscreteMixture state;
    double mean_after = 0.0;
    double c_after = 0.0;
    double s_after = 0.0;
};

struct ReductionOutcome {
    ExtremalPair pair;
    std::vector<ReductionStep> steps;
};

// Slope c ~ 0.7246 of the steepest line 1 - c*theta still below cos(theta)
// everywhere on theta >= 0, and the tangency angle theta ~ 2.3311 behind it.
double chord_constant();
double chord_angle();

// Build the pair with mean E and cosine moment c_target at omega_s, taking
// the smallest admissible tau2. Throws std::domain_error when no pair with
// tau2 < pi/omega_s exists (c_target below the chord line 1 - c*omega_s*E).
ExtremalPair extremal_two_delay(double c_target, double omega_s, double E);

// Collapse an n-delay mixture with a crossing at omega_s (C(omega_s) ~ -a)
// to its extremal pair: qualifying delay pairs are rewritten one at a time,
// the remainder is merged and shrunk back onto the same mean and cosine
// moment. Mean and C(omega_s) are preserved by every step; S(omega_s) never
// decreases.
ExtremalPair reduce_to_extremal(const DiscreteMixture& mix, double omega_s, double a);
ReductionOutcome reduce_to_extremal_logged(const DiscreteMixture& mix, double omega_s,
                                           double a);

// For the two-atom law (1-p) at 0, p at r: true iff the crossing frequency
// (when one exists) strictly dominates the sine moment sqrt(p^2-(a+1-p)^2).
bool s_star_bound_check(double a, double p, double r);

std::string to_json(const ExtremalPair& pair);

}  // namespace delaystab
