#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <sstream>
#include <vector>

#include "delaystab/boundary.hpp"
#include "delaystab/distribution.hpp"
#include "doctest.h"

using namespace delaystab;

namespace {

std::vector<const BoundaryBranch*> hopf_branches(const TraceResult& tr) {
    std::vector<const BoundaryBranch*> out;
    for (const auto& br : tr.branches)
        if (br.kind == BranchKind::HopfCurve) out.push_back(&br);
    return out;
}

// E values where the first Hopf branch crosses a given coefficient level.
std::vector<double> level_crossings(const BoundaryBranch& br, double a) {
    std::vector<double> es;
    for (std::size_t i = 1; i < br.points.size(); ++i) {
        const double f0 = br.points[i - 1].a - a;
        const double f1 = br.points[i].a - a;
        if ((f0 > 0.0) == (f1 > 0.0)) continue;
        const double t = f0 / (f0 - f1);
        es.push_back(br.points[i - 1].E + t * (br.points[i].E - br.points[i - 1].E));
    }
    return es;
}

}  // namespace

TEST_CASE("exponential kernel boundary is the hyperbola E = -1/a") {
    const auto tr = trace_boundary(DelayDistribution::exponential(1.0), {});
    const auto hopf = hopf_branches(tr);
    REQUIRE(!hopf.empty());
    double worst = 0.0;
    std::size_t n = 0;
    for (const auto* br : hopf)
        for (const auto& p : br->points) {
            if (!(p.E > 0.0) || p.a >= -1e-6) continue;
            worst = std::max(worst, std::abs(p.E + 1.0 / p.a) / p.E);
            ++n;
        }
    CHECK(n > 100);
    CHECK(worst < 1e-10);
}

TEST_CASE("order-2 gamma boundary peaks at a = 1/8, E = 16") {
    const auto tr = trace_boundary(DelayDistribution::gamma(2, 1.0), {});
    const auto hopf = hopf_branches(tr);
    REQUIRE(!hopf.empty());
    double peak_a = -2.0, peak_e = 0.0;
    for (const auto* br : hopf)
        for (const auto& p : br->points)
            if (p.a > peak_a) {
                peak_a = p.a;
                peak_e = p.E;
            }
    CHECK(peak_a == doctest::Approx(0.125).epsilon(1e-6));
    CHECK(peak_e == doctest::Approx(16.0).epsilon(1e-2));

    // Level a = 0.05 is crossed twice: entering and leaving instability.
    // Closed form: E = (1+x)^2 at the roots of x^2 - 18x + 21 = 0.
    const auto es = level_crossings(*hopf.front(), 0.05);
    REQUIRE(es.size() >= 2);
    CHECK(es.front() == doctest::Approx(5.0806662).epsilon(1e-3));
    CHECK(es.back() == doctest::Approx(314.91933).epsilon(1e-3));
}

TEST_CASE("trace emits the zero-root line") {
    const auto tr = trace_boundary(DelayDistribution::gamma(2, 1.0), {});
    bool found = false;
    for (const auto& br : tr.branches)
        if (br.kind == BranchKind::ZeroRootLine) {
            found = true;
            for (const auto& p : br.points) CHECK(p.a == doctest::Approx(-1.0));
        }
    CHECK(found);

    TraceOptions opts;
    opts.zero_root_line = false;
    const auto bare = trace_boundary(DelayDistribution::gamma(2, 1.0), opts);
    for (const auto& br : bare.branches) CHECK(br.kind == BranchKind::HopfCurve);
}

TEST_CASE("trace rejects distributions whose mean is not 1") {
    CHECK_THROWS_AS(trace_boundary(DelayDistribution::dirac(2.0), {}),
                    std::invalid_argument);
}

TEST_CASE("two-delay boundary asymptote") {
    CHECK(asymptote_two_delay(0.6) == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(asymptote_two_delay(0.5) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("chart raster matches the closed-form transition") {
    // Order-2 gamma at a = 0 destabilizes exactly at E = 4 and, since the
    // boundary only tends to a = 0 from above, never restabilizes there.
    auto grid = chart(DelayDistribution::gamma(2, 1.0), {0.0}, {3.9, 4.1, 400.0});
    REQUIRE(grid.status.size() == 3);
    CHECK(grid.status[grid.index(0, 0)] == CellStatus::Stable);
    CHECK(grid.status[grid.index(0, 1)] == CellStatus::Unstable);
    CHECK(grid.unstable_count[grid.index(0, 1)] == 2);
    CHECK(grid.status[grid.index(0, 2)] == CellStatus::Unstable);

    // At a = 0.05 the unstable window is E in (5.0807, 314.92).
    grid = chart(DelayDistribution::gamma(2, 1.0), {0.05}, {4.9, 6.0, 400.0});
    CHECK(grid.status[grid.index(0, 0)] == CellStatus::Stable);
    CHECK(grid.status[grid.index(0, 1)] == CellStatus::Unstable);
    CHECK(grid.status[grid.index(0, 2)] == CellStatus::Stable);
}

TEST_CASE("writers emit one row per point plus a header") {
    const auto tr = trace_boundary(DelayDistribution::exponential(1.0), 10.0, 200);
    std::ostringstream os;
    write_boundary(os, tr.branches);
    std::size_t rows = 0, points = 0;
    for (const auto& br : tr.branches) points += br.points.size();
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "u,a,E,branch_id,kind");
    while (std::getline(is, line))
        if (!line.empty()) ++rows;
    CHECK(rows == points);

    const auto grid = chart(DelayDistribution::dirac(1.0), {0.0, 0.5}, {1.0, 2.0});
    std::ostringstream cs;
    write_chart(cs, grid);
    std::istringstream cis(cs.str());
    std::getline(cis, line);
    CHECK(line == "a,E,status,unstable_count");
    rows = 0;
    while (std::getline(cis, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 4);
}
