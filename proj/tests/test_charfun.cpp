#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <complex>
#include <stdexcept>

#include "delaystab/charfun.hpp"
#include "delaystab/distribution.hpp"
#include "doctest.h"

using namespace delaystab;
using cd = std::complex<double>;

TEST_CASE("characteristic function values and derivative") {
    // Unit delay, a = 0, lambda = i pi/2: F = i pi/2 + e^{-i pi/2} = i(pi/2 - 1).
    const auto d1 = DelayDistribution::dirac(1.0);
    const auto sample = char_value(0.0, d1, {0.0, M_PI_2});
    CHECK(std::abs(sample.value - cd{0.0, M_PI_2 - 1.0}) < 1e-14);

    // dF agrees with a central difference.
    const auto g = DelayDistribution::gamma(3, 1.2);
    const cd z{0.3, 0.8};
    const cd h{1e-6, 0.0};
    const cd fd = (char_value(0.4, g, z + h).value - char_value(0.4, g, z - h).value) /
                  (2.0 * h);
    CHECK(std::abs(char_derivative(0.4, g, z) - fd) < 1e-8);
}

TEST_CASE("imaginary-axis crossing cap") {
    CHECK(omega_cap(0.0) == doctest::Approx(1.0));
    CHECK(omega_cap(0.6) == doctest::Approx(0.8));
    CHECK(omega_cap(-0.6) == doctest::Approx(0.8));
    CHECK_THROWS_AS(omega_cap(1.5), std::domain_error);
}

TEST_CASE("unit-delay leading root matches the pinned value") {
    const auto lead = leading_root(0.0, DelayDistribution::dirac(1.0));
    const cd want{-0.3181315052047641, 1.3372357014306895};
    CHECK(std::abs(lead - want) < 1e-12);
}

TEST_CASE("rational kinds reduce to polynomial roots") {
    // Exponential, mean 1, a = 0.5: lambda^2 + 1.5 lambda + 1.5 = 0,
    // a critically damped-looking pair with real part exactly -3/4.
    const auto lead = leading_root(0.5, DelayDistribution::exponential(1.0));
    CHECK(lead.real() == doctest::Approx(-0.75).epsilon(1e-12));
    CHECK(lead.imag() == doctest::Approx(std::sqrt(1.5 - 0.5625)).epsilon(1e-10));

    // Long-mean order-2 gamma: slow unstable spiral far below the unit scale.
    const auto g = DelayDistribution::gamma(2, 185.0);
    const auto slow = leading_root(0.05, g);
    CHECK(slow.real() == doctest::Approx(0.002600023313991544).epsilon(1e-8));
    CHECK(slow.imag() == doctest::Approx(0.03988321510575994).epsilon(1e-8));
}

TEST_CASE("root census counts and classifies") {
    // Unit delay at a = 0 is stable: no roots right of the axis.
    auto rep = count_unstable_roots(0.0, DelayDistribution::dirac(1.0));
    CHECK(rep.unstable_count == 0);
    CHECK_FALSE(rep.marginal);
    CHECK(rep.leading_root.real() < 0.0);

    // Delay 2 at a = 0 has crossed: one unstable conjugate pair.
    rep = count_unstable_roots(0.0, DelayDistribution::dirac(2.0));
    CHECK(rep.unstable_count == 2);
    CHECK(rep.leading_root.real() == doctest::Approx(0.086408).epsilon(1e-4));
    CHECK(rep.leading_root.imag() == doctest::Approx(0.836843).epsilon(1e-4));

    // Exactly on the single-delay boundary: the pair sits on the axis.
    rep = count_unstable_roots(0.0, DelayDistribution::dirac(M_PI_2));
    CHECK(rep.marginal);
    CHECK(rep.unstable_count == 0);
    CHECK(std::abs(rep.leading_root.real()) <= 1e-9);
    CHECK(rep.leading_root.imag() == doctest::Approx(1.0).epsilon(1e-6));

    CHECK_THROWS_AS(count_unstable_roots(20.0, DelayDistribution::dirac(1.0)),
                    std::invalid_argument);
}

TEST_CASE("winding census agrees with the polynomial census") {
    const CharfunOptions opts;
    struct Case {
        double a;
        DelayDistribution dist;
        int expect;
    } cases[] = {
        {0.05, DelayDistribution::gamma(2, 185.0), 2},
        {-0.2, DelayDistribution::exponential(120.0), 2},
        {0.5, DelayDistribution::exponential(1.0), 0},
        {0.0, DelayDistribution::gamma(4, 1.0), 0},
    };
    for (const auto& c : cases) {
        CHECK(count_unstable_roots(c.a, c.dist).unstable_count == c.expect);
        CHECK(detail::roots_right_of(c.a, c.dist, opts.marginal_tol, opts) == c.expect);
    }
}

TEST_CASE("census residuals vanish at reported roots") {
    const DelayDistribution dists[] = {
        DelayDistribution::dirac(2.0),
        DelayDistribution::discrete({{0.5, 0.3}, {2.5, 0.7}}),
        DelayDistribution::uniform(1.0, 4.0),
        DelayDistribution::gamma(3, 2.2),
    };
    for (const auto& d : dists) {
        const auto rep = count_unstable_roots(-0.1, d);
        const auto residual = char_value(-0.1, d, rep.leading_root).value;
        CHECK(std::abs(residual) < 1e-9);
        // The leading root is reported with nonnegative imaginary part.
        CHECK(rep.leading_root.imag() >= 0.0);
    }
}
