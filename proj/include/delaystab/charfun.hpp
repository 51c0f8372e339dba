#pragma once

#include <complex>
#include <string>

#include "delaystab/distribution.hpp"

namespace delaystab {

// One evaluation of the characteristic function.
struct CharacteristicSample {
    std::complex<double> lambda;
    std::complex<double> value;  // lambda + a + laplace(dist, lambda)
    double a = 0.0;
};

// Census of the right-half-plane roots for one (a, eta) pair.
struct RootReport {
    int unstable_count = 0;                       // roots with Re > marginal tol
    std::complex<double> leading_root{0.0, 0.0};  // rightmost root
    double contour_bound = 0.0;                   // half-plane radius searched
    bool marginal = false;  // leading root within marginal_tol of the axis
};

struct CharfunOptions {
    double marginal_tol = 1e-9;   // contour indentation and marginality band
    double newton_tol = 1e-12;    // residual target for root refinement
    double bisect_width = 1e-10;  // stop width of the Re-bisection
    int max_retries = 5;          // contour perturbation attempts
};

// F(lambda) = lambda + a + integral(e^{-lambda tau} d eta); evaluated through
// the analytically continued transform so contour work is seamless.
CharacteristicSample char_value(double a, const DelayDistribution& dist,
                                std::complex<double> lambda);

// dF/dlambda = 1 - integral(tau e^{-lambda tau} d eta).
std::complex<double> char_derivative(double a, const DelayDistribution& dist,
                                     std::complex<double> lambda);

// Imaginary-axis crossing cap sqrt(1 - a^2); |a| > 1 is rejected.
double omega_cap(double a);

// Winding-number count of roots in {Re > tol, |lambda| <= R}, R = |a| + 1 +
// margin (any root with Re >= 0 has |lambda| <= |a| + 1), plus the rightmost
// root. Roots within marginal_tol of the axis are flagged marginal and not
// counted unstable.
RootReport count_unstable_roots(double a, const DelayDistribution& dist,
                                const CharfunOptions& opts = {});

// Rightmost root alone: contour bisection on Re(lambda) to width bisect_width,
// then Newton to residual < newton_tol. Returns the member with Im >= 0.
std::complex<double> leading_root(double a, const DelayDistribution& dist,
                                  const CharfunOptions& opts = {});

std::string to_json(const RootReport& report);

namespace detail {

// Number of roots of the characteristic function strictly right of sigma
// within |Im| <= R(sigma). Exposed for tests that cross-check the census.
int roots_right_of(double a, const DelayDistribution& dist, double sigma,
                   const CharfunOptions& opts = {});

}  // namespace detail

}  // namespace delaystab
