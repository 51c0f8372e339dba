#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "delaystab/charfun.hpp"
#include "delaystab/distribution.hpp"

namespace delaystab {

enum class BranchKind { HopfCurve, ZeroRootLine };

const char* to_string(BranchKind kind);

struct BoundaryPoint {
    double u = 0.0;  // boundary parameter (crossing frequency times mean)
    double a = 0.0;
    double E = 0.0;
};

struct BoundaryBranch {
    int id = 0;
    BranchKind kind = BranchKind::HopfCurve;
    std::vector<BoundaryPoint> points;  // ordered by u
};

struct TraceOptions {
    double u_min = 1e-4;
    double u_max = 100.0;
    int n_points = 4000;
    double e_max = 1e4;        // cap when E blows up at a sine-moment zero
    double pole_tol = 1e-10;   // |S| below this ends a branch
    double refine_da = 5e-3;   // insert u-midpoints while |da| exceeds this
    bool zero_root_line = true;
};

struct TraceResult {
    std::vector<BoundaryBranch> branches;
    bool degenerate = false;  // sine moment vanished on the whole grid
};

// Sweep u over a geometric grid and map it through (a, E) = (-C(u), u/S(u)),
// keeping points inside the physical window E > 0, |a| <= 1, E <= e_max.
// Branches split where S changes sign (E pole) or the window is left; the
// ends adjacent to a pole are refined toward it. dist must have mean 1.
TraceResult trace_boundary(const DelayDistribution& dist, const TraceOptions& opts = {});
TraceResult trace_boundary(const DelayDistribution& dist, double u_max, int n_points);

enum class CellStatus { Stable, Unstable, Marginal, Failed };

const char* to_string(CellStatus status);

// Row-major stability raster: cell (i_a, i_e) holds the verdict for
// coefficient a_axis[i_a] and the distribution rescaled to mean e_axis[i_e].
struct ChartGrid {
    std::vector<double> a_axis;
    std::vector<double> e_axis;
    std::vector<CellStatus> status;    // size a*e
    std::vector<int> unstable_count;   // -1 where the cell failed

    std::size_t index(std::size_t i_a, std::size_t i_e) const {
        return i_a * e_axis.size() + i_e;
    }
};

// Exact per-cell root census over the grid; cells run concurrently and
// numerical failures are recorded in the cell instead of aborting the sweep.
ChartGrid chart(const DelayDistribution& dist, std::vector<double> a_axis,
                std::vector<double> e_axis, int jobs = 0,
                const CharfunOptions& opts = {});

// Vertical asymptote a = 2p - 1 of the boundary for (1-p) mass at 0, p at r.
double asymptote_two_delay(double p);

// "u,a,E,branch_id,kind" rows; sep = ',' for CSV, ' ' for gnuplot .dat.
void write_boundary(std::ostream& os, const std::vector<BoundaryBranch>& branches,
                    char sep = ',');
// "a,E,status,unstable_count" rows.
void write_chart(std::ostream& os, const ChartGrid& grid, char sep = ',');

}  // namespace delaystab
