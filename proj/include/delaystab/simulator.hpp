#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "delaystab/distribution.hpp"

namespace delaystab {

using HistoryFn = std::function<double(double)>;

struct SimulationTrace {
    double a = 0.0;
    double b = 0.0;
    double dt = 0.0;
    std::vector<double> times;   // uniform grid from 0 to T
    std::vector<double> values;  // x(t)
    // Sampled initial function on the delay span actually consumed.
    std::vector<double> hist_times;   // uniform, <= 0
    std::vector<double> hist_values;
};

// T == 0 / dt == 0 pick the defaults below.
struct SimOptions {
    double T = 0.0;
    double dt = 0.0;
};

double default_dt(const DelayDistribution& dist);
double default_T(const DelayDistribution& dist);

// Integrate x' = -a x - b * integral of x(t - tau) d eta(tau) from the given
// initial function. Discrete laws use the method of steps (one-step 4th-order
// with cubic read-back interpolation); exponential/gamma kernels use the
// equivalent ODE chain; anything else is discretized to 64 atoms first.
SimulationTrace simulate(double a, double b, const DelayDistribution& dist,
                         const HistoryFn& history, double T, double dt);

// Constant initial function x = 1.
SimulationTrace simulate(double a, double b, const DelayDistribution& dist,
                         const SimOptions& opts = {});

// Envelope decay exponent over the last third of the trace: least-squares
// slope of log |x| at the oscillation extrema, or a plain log-regression when
// the tail does not oscillate.
double decay_rate(const SimulationTrace& trace);

// Mean angular frequency from extrema spacing in the last third; 0 when the
// tail does not oscillate.
double oscillation_frequency(const SimulationTrace& trace);

// "t,x" rows for t >= 0; sep = ',' for CSV, ' ' for gnuplot.
void write_trace(std::ostream& os, const SimulationTrace& trace, char sep = ',');

// "t,x" samples with t <= 0; linear interpolation, clamped at the ends.
HistoryFn load_history_csv(std::istream& is);

}  // namespace delaystab
