#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "delaystab/charfun.hpp"
#include "delaystab/distribution.hpp"
#include "delaystab/simulator.hpp"
#include "doctest.h"

using namespace delaystab;

TEST_CASE("unit delay: decay rate and frequency track the leading root") {
    SimOptions opts;
    opts.T = 60.0;
    const auto trace = simulate(0.0, 1.0, DelayDistribution::dirac(1.0), opts);
    CHECK(decay_rate(trace) == doctest::Approx(-0.3181315052047641).epsilon(2e-3));
    CHECK(oscillation_frequency(trace) == doctest::Approx(1.3372357014306895).epsilon(2e-3));
}

TEST_CASE("unstable delay grows at the root's rate") {
    const auto lead = leading_root(0.0, DelayDistribution::dirac(2.0));
    SimOptions opts;
    opts.T = 400.0;
    const auto trace = simulate(0.0, 1.0, DelayDistribution::dirac(2.0), opts);
    CHECK(decay_rate(trace) == doctest::Approx(lead.real()).epsilon(2e-2));
    CHECK(decay_rate(trace) > 0.0);
}

TEST_CASE("rational kernels use the chain form and match exact roots") {
    SimOptions opts;
    opts.T = 50.0;
    const auto exp_trace = simulate(0.5, 1.0, DelayDistribution::exponential(1.0), opts);
    CHECK(decay_rate(exp_trace) == doctest::Approx(-0.75).epsilon(2e-3));

    const auto g = DelayDistribution::gamma(2, 1.0);
    const auto lead = leading_root(0.0, g);
    const auto gamma_trace = simulate(0.0, 1.0, g, opts);
    CHECK(decay_rate(gamma_trace) == doctest::Approx(lead.real()).epsilon(2e-2));
}

TEST_CASE("continuous laws without a chain form are discretized") {
    const auto u = DelayDistribution::uniform(0.0, 2.0);
    const auto lead = leading_root(0.0, u);
    SimOptions opts;
    opts.T = 80.0;
    const auto trace = simulate(0.0, 1.0, u, opts);
    CHECK(decay_rate(trace) == doctest::Approx(lead.real()).epsilon(5e-2));
}

TEST_CASE("input validation") {
    const auto d = DelayDistribution::dirac(1.0);
    CHECK_THROWS_AS(simulate(0.0, 1.0, d, [](double) { return 1.0; }, 5.0, 0.01),
                    std::invalid_argument);  // T below 10x mean
    CHECK_THROWS_AS(simulate(0.0, 1.0, d, [](double) { return 1.0; }, 40.0, 0.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(simulate(0.0, 1.0, d, HistoryFn{}, 40.0, 0.01),
                    std::invalid_argument);

    SimulationTrace tiny;
    tiny.times = {0.0, 1.0};
    tiny.values = {1.0, 0.5};
    CHECK_THROWS_AS(decay_rate(tiny), std::invalid_argument);
}

TEST_CASE("defaults scale with the distribution") {
    const auto d = DelayDistribution::dirac(1.0);
    CHECK(default_T(d) == doctest::Approx(40.0));
    CHECK(default_dt(d) == doctest::Approx(0.005));
    const auto g = DelayDistribution::gamma(8, 2.0);
    CHECK(default_T(g) == doctest::Approx(80.0));
    CHECK(default_dt(g) == doctest::Approx(std::min(2.0 / 200.0, 2.0 / 16.0)));
}

TEST_CASE("history function reaches the integrator") {
    // x' = -x(t-1) with history exactly on the leading mode decays cleanly;
    // a sign-flipped history flips the trace.
    SimOptions opts;
    opts.T = 40.0;
    const auto up = simulate(0.0, 1.0, DelayDistribution::dirac(1.0),
                             [](double) { return 1.0; }, 40.0, 0.005);
    const auto down = simulate(0.0, 1.0, DelayDistribution::dirac(1.0),
                               [](double) { return -1.0; }, 40.0, 0.005);
    REQUIRE(up.values.size() == down.values.size());
    for (std::size_t i = 0; i < up.values.size(); i += 100)
        CHECK(up.values[i] == doctest::Approx(-down.values[i]).epsilon(1e-12));
    CHECK(up.values[0] == doctest::Approx(1.0));
}

TEST_CASE("trace writer and history reader round-trip") {
    SimOptions opts;
    opts.T = 40.0;
    const auto trace = simulate(0.0, 1.0, DelayDistribution::dirac(1.0), opts);
    std::ostringstream os;
    write_trace(os, trace);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "t,x");
    std::size_t rows = 0;
    while (std::getline(is, line))
        if (!line.empty()) ++rows;
    CHECK(rows == trace.times.size());

    std::istringstream hist("t,x\n-1,2\n0,3\n");
    const auto h = load_history_csv(hist);
    CHECK(h(-0.5) == doctest::Approx(2.5));
    CHECK(h(-3.0) == doctest::Approx(2.0));  // clamped
    CHECK(h(0.0) == doctest::Approx(3.0));

    std::istringstream bad("t,x\n0.5,1\n");
    CHECK_THROWS_AS(load_history_csv(bad), std::invalid_argument);
}
