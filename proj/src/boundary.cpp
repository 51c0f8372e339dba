#include "delaystab/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "delaystab/detail/numeric.hpp"

namespace delaystab {

namespace {

struct Sample {
    double u, a, E, s;
    bool in_window;   // E in (0, e_max], |a| <= 1
    bool at_pole;     // out of window because E blew up (S -> 0+ or E > cap)
};

Sample eval_point(const DelayDistribution& dist, double u, const TraceOptions& opts) {
    const TrigMoments tm = trig_moments(dist, u);
    Sample p{u, -tm.c, 0.0, tm.s, false, false};
    if (tm.s > opts.pole_tol) {
        p.E = u / tm.s;
        p.in_window = p.E <= opts.e_max && std::abs(p.a) <= 1.0 + 1e-12;
        p.at_pole = p.E > opts.e_max;
    } else {
        p.at_pole = true;  // S crossed (or sits on) zero: E pole in between
    }
    return p;
}

// Walk from the last in-window u toward an adjacent out-of-window u and
// return intermediate points approaching the window edge (E cap / pole).
std::vector<BoundaryPoint> refine_edge(const DelayDistribution& dist, double u_good,
                                       double u_bad, double e_from,
                                       const TraceOptions& opts) {
    std::vector<BoundaryPoint> extra;
    double lo = u_good, e_last = e_from;
    double hi = u_bad;
    for (int iter = 0; iter < 80 && std::abs(hi - lo) > 1e-14 * (1.0 + std::abs(lo));
         ++iter) {
        const double mid = 0.5 * (lo + hi);
        const Sample s = eval_point(dist, mid, opts);
        if (s.in_window) {
            lo = mid;
            if (s.E >= 1.3 * e_last) {  // keep a few points on the way up
                extra.push_back({s.u, s.a, s.E});
                e_last = s.E;
            }
        } else {
            hi = mid;
        }
    }
    const Sample s = eval_point(dist, lo, opts);
    if (s.in_window && (extra.empty() || extra.back().u != s.u) && s.E > e_from)
        extra.push_back({s.u, s.a, s.E});
    return extra;
}

}  // namespace

const char* to_string(BranchKind kind) {
    return kind == BranchKind::HopfCurve ? "HopfCurve" : "ZeroRootLine";
}

const char* to_string(CellStatus status) {
    switch (status) {
        case CellStatus::Stable: return "Stable";
        case CellStatus::Unstable: return "Unstable";
        case CellStatus::Marginal: return "Marginal";
        case CellStatus::Failed: return "Failed";
    }
    return "?";
}

TraceResult trace_boundary(const DelayDistribution& dist, const TraceOptions& opts) {
    const double m = mean(dist);
    if (m > 0.0 && std::abs(m - 1.0) > 1e-9)
        throw std::invalid_argument("trace_boundary: distribution must have mean 1");
    if (!(opts.u_max > opts.u_min) || opts.n_points < 2)
        throw std::invalid_argument("trace_boundary: bad u-grid parameters");

    // Geometric u-grid, midpoint-refined while |da| between neighbors is
    // large (curvature piles up near u -> 0 and next to sine-moment zeros).
    const double ratio = std::log(opts.u_max / opts.u_min);
    std::vector<Sample> samples;
    samples.reserve(opts.n_points * 2);
    Sample prev = eval_point(dist, opts.u_min, opts);
    samples.push_back(prev);
    for (int i = 1; i < opts.n_points; ++i) {
        const double u = opts.u_min * std::exp(ratio * i / (opts.n_points - 1));
        Sample next = eval_point(dist, u, opts);
        std::vector<Sample> pending{next};
        int depth = 0;
        while (!pending.empty()) {
            const Sample& top = pending.back();
            const bool split = top.in_window && samples.back().in_window &&
                               std::abs(top.a - samples.back().a) > opts.refine_da &&
                               top.u - samples.back().u > 1e-12 * top.u && depth < 24;
            if (split) {
                pending.push_back(
                    eval_point(dist, std::sqrt(top.u * samples.back().u), opts));
                ++depth;
            } else {
                samples.push_back(top);
                pending.pop_back();
            }
        }
    }

    TraceResult result;
    bool any_signal = false;
    for (const Sample& s : samples)
        if (std::abs(s.s) > opts.pole_tol) any_signal = true;
    if (!any_signal) {
        result.degenerate = true;
        return result;
    }

    // Cut the sample sequence into in-window runs; refine run ends that abut
    // an E blow-up so each branch reaches the cap instead of stopping early.
    int next_id = 0;
    std::size_t i = 0;
    while (i < samples.size()) {
        if (!samples[i].in_window) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < samples.size() && samples[j + 1].in_window) ++j;

        BoundaryBranch branch;
        branch.id = next_id++;
        branch.kind = BranchKind::HopfCurve;
        if (i > 0 && samples[i - 1].at_pole) {
            auto head = refine_edge(dist, samples[i].u, samples[i - 1].u, samples[i].E, opts);
            std::reverse(head.begin(), head.end());
            for (const auto& p : head) branch.points.push_back(p);
        }
        for (std::size_t k = i; k <= j; ++k)
            branch.points.push_back({samples[k].u, samples[k].a, samples[k].E});
        if (j + 1 < samples.size() && samples[j + 1].at_pole) {
            for (const auto& p :
                 refine_edge(dist, samples[j].u, samples[j + 1].u, samples[j].E, opts))
                branch.points.push_back(p);
        }
        result.branches.push_back(std::move(branch));
        i = j + 1;
    }

    if (opts.zero_root_line) {
        BoundaryBranch line;
        line.id = next_id;
        line.kind = BranchKind::ZeroRootLine;
        const int n = 64;
        for (int k = 0; k < n; ++k) {
            const double E =
                1e-2 * std::exp(std::log(opts.e_max / 1e-2) * k / (n - 1));
            line.points.push_back({0.0, -1.0, E});
        }
        result.branches.push_back(std::move(line));
    }
    return result;
}

TraceResult trace_boundary(const DelayDistribution& dist, double u_max, int n_points) {
    TraceOptions opts;
    opts.u_max = u_max;
    opts.n_points = n_points;
    return trace_boundary(dist, opts);
}

ChartGrid chart(const DelayDistribution& dist, std::vector<double> a_axis,
                std::vector<double> e_axis, int jobs, const CharfunOptions& opts) {
    if (!std::is_sorted(a_axis.begin(), a_axis.end()) ||
        !std::is_sorted(e_axis.begin(), e_axis.end()))
        throw std::invalid_argument("chart: axes must be monotone increasing");
    ChartGrid grid;
    grid.a_axis = std::move(a_axis);
    grid.e_axis = std::move(e_axis);
    const std::size_t total = grid.a_axis.size() * grid.e_axis.size();
    grid.status.assign(total, CellStatus::Failed);
    grid.unstable_count.assign(total, -1);

    detail::parallel_for(
        total,
        [&](std::size_t idx) {
            const double a = grid.a_axis[idx / grid.e_axis.size()];
            const double E = grid.e_axis[idx % grid.e_axis.size()];
            try {
                const DelayDistribution cell = scale_to_mean(dist, E);
                const RootReport report = count_unstable_roots(a, cell, opts);
                grid.unstable_count[idx] = report.unstable_count;
                if (report.marginal)
                    grid.status[idx] = CellStatus::Marginal;
                else
                    grid.status[idx] = report.unstable_count > 0 ? CellStatus::Unstable
                                                                 : CellStatus::Stable;
            } catch (const std::exception&) {
                // leave the cell marked Failed
            }
        },
        jobs);
    return grid;
}

double asymptote_two_delay(double p) {
    if (!(p > 0.0) || p > 1.0)
        throw std::invalid_argument("asymptote_two_delay: p must be in (0, 1]");
    return 2.0 * p - 1.0;
}

namespace {

void put(std::ostream& os, double x, char sep, bool last) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    os << buf;
    if (!last) os << sep;
}

}  // namespace

void write_boundary(std::ostream& os, const std::vector<BoundaryBranch>& branches,
                    char sep) {
    os << "u" << sep << "a" << sep << "E" << sep << "branch_id" << sep << "kind\n";
    for (const BoundaryBranch& br : branches)
        for (const BoundaryPoint& p : br.points) {
            put(os, p.u, sep, false);
            put(os, p.a, sep, false);
            put(os, p.E, sep, false);
            os << br.id << sep << to_string(br.kind) << '\n';
        }
}

void write_chart(std::ostream& os, const ChartGrid& grid, char sep) {
    os << "a" << sep << "E" << sep << "status" << sep << "unstable_count\n";
    for (std::size_t ia = 0; ia < grid.a_axis.size(); ++ia)
        for (std::size_t ie = 0; ie < grid.e_axis.size(); ++ie) {
            const std::size_t idx = grid.index(ia, ie);
            put(os, grid.a_axis[ia], sep, false);
            put(os, grid.e_axis[ie], sep, false);
            os << to_string(grid.status[idx]) << sep << grid.unstable_count[idx] << '\n';
        }
}

}  // namespace delaystab
