// delaystab — command-line front end for the delay-stability library.
//
// Subcommands: check, boundary, chart, extremal, simulate, selftest.
// Exit codes: 0 stable/success, 1 unstable, 2 distribution-dependent or
// marginal, 3 runtime error, 64 malformed distribution spec.

#include <cmath>
#include <complex>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "delaystab/boundary.hpp"
#include "delaystab/charfun.hpp"
#include "delaystab/criteria.hpp"
#include "delaystab/detail/numeric.hpp"
#include "delaystab/distribution.hpp"
#include "delaystab/extremal.hpp"
#include "delaystab/selftest.hpp"
#include "delaystab/simulator.hpp"
#include "delaystab/spec_io.hpp"

namespace ds = delaystab;
using nlohmann::ordered_json;

namespace {

constexpr int kExitStable = 0;
constexpr int kExitUnstable = 1;
constexpr int kExitDependent = 2;
constexpr int kExitError = 3;
constexpr int kExitSpec = 64;

// DELAYSTAB_LOG=info|debug enables progress notes on stderr.
int log_level() {
    static const int level = [] {
        const char* env = std::getenv("DELAYSTAB_LOG");
        if (env == nullptr || *env == '\0') return 0;
        std::string s(env);
        for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (s == "0" || s == "off" || s == "none" || s == "quiet" || s == "error") return 0;
        if (s == "debug" || s == "trace" || s == "2") return 2;
        return 1;
    }();
    return level;
}

void log_info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << "[delaystab] " << msg << '\n';
}

int verdict_exit(ds::Stability s) {
    switch (s) {
        case ds::Stability::Stable: return kExitStable;
        case ds::Stability::Unstable: return kExitUnstable;
        default: return kExitDependent;
    }
}

void print_json(const ordered_json& j) { std::cout << j.dump() << '\n'; }

// Inclusive linspace parsed from "lo:hi:n".
std::vector<double> parse_range(const std::string& text, const char* flag) {
    double lo = 0.0, hi = 0.0;
    int n = 0;
    char tail = '\0';
    if (std::sscanf(text.c_str(), "%lf:%lf:%d%c", &lo, &hi, &n, &tail) != 3 || n < 1 ||
        !std::isfinite(lo) || !std::isfinite(hi) || hi < lo)
        throw CLI::ValidationError(std::string(flag) + ": expected lo:hi:n with hi >= lo, n >= 1");
    std::vector<double> axis(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        axis[static_cast<std::size_t>(i)] =
            n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return axis;
}

// Space-separated .dat or comma-separated otherwise.
char sep_for(const std::string& out_path) {
    return out_path.size() >= 4 && out_path.compare(out_path.size() - 4, 4, ".dat") == 0 ? ' '
                                                                                         : ',';
}

void write_text(const std::string& out_path, const std::function<void(std::ostream&)>& body) {
    if (out_path.empty()) {
        body(std::cout);
        return;
    }
    std::ofstream os(out_path);
    if (!os) throw std::runtime_error("cannot open output file: " + out_path);
    body(os);
    log_info("wrote " + out_path);
}

// ---------------------------------------------------------------------------

struct CheckArgs {
    double a = 0.0;
    double b = 1.0;
    std::optional<double> E;
    std::string dist_path;
    double tol_root = 1e-12;
    bool emit_spec = false;
};

int cmd_check(const CheckArgs& args) {
    ordered_json out;
    out["command"] = "check";
    out["a"] = args.a;
    out["b"] = args.b;
    const ds::Stability region = ds::classify_region(args.a, args.b);
    out["region"] = ds::to_string(region);

    std::optional<ds::DelayDistribution> dist;
    if (!args.dist_path.empty()) {
        dist = ds::parse_distribution_file(args.dist_path);
        if (args.E) dist = ds::scale_to_mean(*dist, *args.E);
        if (args.emit_spec) std::cout << ds::emit_distribution_json(*dist) << '\n';
        out["mean"] = ds::mean(*dist);
    } else if (args.E) {
        out["mean"] = *args.E;
    }

    ds::Stability status = region;
    if (region != ds::Stability::DistributionDependent) {
        out["status"] = ds::to_string(status);
    } else if (dist) {
        ds::CharfunOptions opts;
        opts.newton_tol = args.tol_root;
        const ds::StabilityVerdict verdict = ds::decide_stability(args.a, args.b, *dist, opts);
        status = verdict.status;
        const ordered_json vj = ordered_json::parse(ds::to_json(verdict));
        for (const auto& item : vj.items()) out[item.key()] = item.value();
    } else if (args.E) {
        const double bound = ds::universal_bound(args.a, args.b);
        out["bound_used"] = bound;
        if (*args.E < bound) {
            status = ds::Stability::Stable;
            out["status"] = ds::to_string(status);
            out["note"] =
                "mean delay below the critical value: stable for every delay "
                "distribution with this mean";
        } else {
            out["status"] = ds::to_string(status);
            out["note"] =
                "mean delay at or above the critical value: the verdict depends on "
                "the shape of the distribution; pass --dist to decide";
        }
    } else {
        out["status"] = ds::to_string(status);
        out["note"] = "the verdict depends on the delay distribution; pass --E or --dist";
    }
    print_json(out);
    return verdict_exit(status);
}

// ---------------------------------------------------------------------------

struct BoundaryArgs {
    std::string dist_path;
    std::string out_path;
    double u_max = 100.0;
    int points = 4000;
    double tol_boundary = 1e-10;
    bool emit_spec = false;
};

int cmd_boundary(const BoundaryArgs& args) {
    ds::DelayDistribution dist = ds::parse_distribution_file(args.dist_path);
    const double m = ds::mean(dist);
    if (m > 0.0 && std::abs(m - 1.0) > 1e-12) {
        dist = ds::scale_to_mean(dist, 1.0);
        log_info("rescaled the distribution to mean 1 before tracing");
    }
    if (args.emit_spec) std::cout << ds::emit_distribution_json(dist) << '\n';

    ds::TraceOptions opts;
    opts.u_max = args.u_max;
    opts.n_points = args.points;
    opts.pole_tol = args.tol_boundary;
    const ds::TraceResult result = ds::trace_boundary(dist, opts);
    if (result.degenerate)
        log_info("distribution has zero mean: no boundary curve to trace");
    write_text(args.out_path, [&](std::ostream& os) {
        ds::write_boundary(os, result.branches, sep_for(args.out_path));
    });
    return 0;
}

// ---------------------------------------------------------------------------

struct ChartArgs {
    std::string dist_path;
    std::string out_path;
    std::string a_range;
    std::string e_range;
    int jobs = 0;
    double tol_root = 1e-12;
    bool emit_spec = false;
};

int cmd_chart(const ChartArgs& args) {
    const std::vector<double> a_axis = parse_range(args.a_range, "--a-range");
    const std::vector<double> e_axis = parse_range(args.e_range, "--E-range");
    const ds::DelayDistribution dist = ds::parse_distribution_file(args.dist_path);
    if (args.emit_spec) std::cout << ds::emit_distribution_json(dist) << '\n';

    ds::CharfunOptions opts;
    opts.newton_tol = args.tol_root;
    const ds::ChartGrid grid = ds::chart(dist, a_axis, e_axis, args.jobs, opts);

    std::size_t failed = 0;
    for (ds::CellStatus s : grid.status)
        if (s == ds::CellStatus::Failed) ++failed;
    if (failed > 0)
        std::cerr << "warning: " << failed << " of " << grid.status.size()
                  << " cells failed and are marked in the output\n";
    write_text(args.out_path,
               [&](std::ostream& os) { ds::write_chart(os, grid, sep_for(args.out_path)); });
    return 0;
}

// ---------------------------------------------------------------------------

struct ExtremalArgs {
    std::string dist_path;
    double a = 0.0;
    bool emit_spec = false;
};

int cmd_extremal(const ExtremalArgs& args) {
    const ds::DelayDistribution dist = ds::parse_distribution_file(args.dist_path);
    if (args.emit_spec) std::cout << ds::emit_distribution_json(dist) << '\n';
    if (!dist.is_discrete())
        throw std::runtime_error(
            "extremal requires a discrete delay mixture; discretize continuous "
            "kernels first");
    ds::DiscreteMixture mix;
    if (const auto* d = std::get_if<ds::DiracMass>(&dist.kind()))
        mix.atoms.push_back({d->location, 1.0});
    else
        mix = std::get<ds::DiscreteMixture>(dist.kind());

    ordered_json out;
    out["command"] = "extremal";
    out["a"] = args.a;

    const ds::Stability region = ds::classify_region(args.a, 1.0);
    if (region == ds::Stability::Stable) {
        out["no_crossing"] = true;
        out["note"] =
            "a >= 1: the system is asymptotically stable for every delay "
            "distribution, so there is no extremal pair to construct";
        print_json(out);
        return 0;
    }
    if (region != ds::Stability::DistributionDependent)
        throw std::runtime_error("extremal requires a > -1 (unit feedback gain)");

    // Target frequencies are the zeros of C(omega) + a. The construction needs
    // omega_s * mean < pi, so sweep up to that limit as well as the cap below
    // which an imaginary-axis root could exist.
    const double E = ds::mean(dist);
    const double w_hi = std::max(ds::omega_cap(args.a), E > 0.0 ? M_PI / E : 1.0);
    const std::vector<double> candidates = ds::crossing_candidates(args.a, dist, w_hi);
    if (candidates.empty()) {
        out["no_crossing"] = true;
        out["note"] =
            "C(omega) + a has no zero on the searched frequency window, so with "
            "unit feedback gain this distribution is asymptotically stable at the "
            "given a; there is no extremal pair to construct";
        print_json(out);
        return 0;
    }

    const double omega_s = candidates.front();
    const ds::ReductionOutcome outcome = ds::reduce_to_extremal_logged(mix, omega_s, args.a);
    const ordered_json pj = ordered_json::parse(ds::to_json(outcome.pair));
    for (const auto& item : pj.items()) out[item.key()] = item.value();
    ordered_json steps = ordered_json::array();
    for (const ds::ReductionStep& step : outcome.steps) {
        ordered_json sj;
        sj["action"] = step.action;
        sj["tau_i"] = step.tau_i;
        sj["tau_j"] = step.tau_j;
        sj["atoms"] = step.state.atoms.size();
        sj["mean"] = step.mean_after;
        sj["c"] = step.c_after;
        sj["s"] = step.s_after;
        steps.push_back(sj);
    }
    out["steps"] = steps;
    print_json(out);
    return 0;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
    double a = 0.0;
    double b = 1.0;
    std::optional<double> E;
    std::string dist_path;
    std::string history_path;
    std::string out_path;
    double T = 0.0;
    double dt = 0.0;
    bool emit_spec = false;
};

int cmd_simulate(const SimulateArgs& args) {
    ds::DelayDistribution dist = ds::parse_distribution_file(args.dist_path);
    if (args.E) dist = ds::scale_to_mean(dist, *args.E);
    if (args.emit_spec) std::cout << ds::emit_distribution_json(dist) << '\n';

    const double T = args.T > 0.0 ? args.T : ds::default_T(dist);
    const double dt = args.dt > 0.0 ? args.dt : ds::default_dt(dist);

    ds::SimulationTrace trace = [&] {
        if (args.history_path.empty())
            return ds::simulate(args.a, args.b, dist, ds::SimOptions{T, dt});
        std::ifstream is(args.history_path);
        if (!is) throw std::runtime_error("cannot open history file: " + args.history_path);
        return ds::simulate(args.a, args.b, dist, ds::load_history_csv(is), T, dt);
    }();
    write_text(args.out_path, [&](std::ostream& os) {
        ds::write_trace(os, trace, sep_for(args.out_path));
    });

    ordered_json out;
    out["command"] = "simulate";
    out["a"] = args.a;
    out["b"] = args.b;
    out["T"] = T;
    out["dt"] = trace.dt;
    out["samples"] = trace.times.size();
    int code = 0;
    try {
        out["decay_rate"] = ds::decay_rate(trace);
        out["oscillation_frequency"] = ds::oscillation_frequency(trace);
    } catch (const ds::detail::NumericalError& e) {
        out["error"] = e.what();
        code = kExitError;
    }
    print_json(out);
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "delaystab: asymptotic stability of x'(t) = -a x(t) - b Int x(t - tau) d eta(tau)"};
    app.require_subcommand(1);
    app.get_formatter()->column_width(30);

    CheckArgs check_args;
    CLI::App* check = app.add_subcommand(
        "check", "Decide stability for given coefficients and an optional distribution");
    check->add_option("--a", check_args.a, "Instantaneous coefficient a")->required();
    check->add_option("--b", check_args.b, "Delayed-feedback gain b")->required();
    check->add_option("--E", check_args.E, "Mean delay (rescales --dist when both are given)");
    check->add_option("--dist", check_args.dist_path, "Distribution spec file (.json/.toml)");
    check->add_option("--tol-root", check_args.tol_root, "Root residual tolerance")
        ->capture_default_str();
    check->add_flag("--emit-spec", check_args.emit_spec,
                    "Print the canonical spec of the distribution used");

    BoundaryArgs boundary_args;
    CLI::App* boundary =
        app.add_subcommand("boundary", "Trace the stability boundary in the (a, E) plane");
    boundary->add_option("--dist", boundary_args.dist_path, "Distribution spec file")
        ->required();
    boundary->add_option("--u-max", boundary_args.u_max, "Upper end of the frequency sweep")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    boundary->add_option("--points", boundary_args.points, "Grid points along the sweep")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    boundary
        ->add_option("--tol-boundary", boundary_args.tol_boundary,
                     "Pole detection tolerance for |S(omega)|")
        ->capture_default_str();
    boundary->add_option("--out", boundary_args.out_path,
                         "Output file (.csv or .dat; stdout when omitted)");
    boundary->add_flag("--emit-spec", boundary_args.emit_spec,
                       "Print the canonical spec of the distribution used");

    ChartArgs chart_args;
    CLI::App* chart = app.add_subcommand(
        "chart", "Classify every cell of an (a, E) grid by its root census");
    chart->add_option("--dist", chart_args.dist_path, "Distribution spec file")->required();
    chart->add_option("--a-range", chart_args.a_range, "a grid as lo:hi:n")->required();
    chart->add_option("--E-range", chart_args.e_range, "Mean-delay grid as lo:hi:n")
        ->required();
    chart->add_option("--jobs", chart_args.jobs, "Worker threads (0 = all cores)")
        ->capture_default_str();
    chart->add_option("--tol-root", chart_args.tol_root, "Root residual tolerance")
        ->capture_default_str();
    chart->add_option("--out", chart_args.out_path,
                      "Output file (.csv or .dat; stdout when omitted)");
    chart->add_flag("--emit-spec", chart_args.emit_spec,
                    "Print the canonical spec of the distribution used");

    ExtremalArgs extremal_args;
    CLI::App* extremal = app.add_subcommand(
        "extremal", "Reduce a discrete mixture to its least-stable two-delay form");
    extremal->add_option("--dist", extremal_args.dist_path, "Distribution spec file")
        ->required();
    extremal->add_option("--a", extremal_args.a, "Instantaneous coefficient a (unit gain b = 1)")
        ->required();
    extremal->add_flag("--emit-spec", extremal_args.emit_spec,
                       "Print the canonical spec of the distribution used");

    SimulateArgs simulate_args;
    CLI::App* simulate =
        app.add_subcommand("simulate", "Integrate the equation and estimate the decay rate");
    simulate->add_option("--a", simulate_args.a, "Instantaneous coefficient a")->required();
    simulate->add_option("--b", simulate_args.b, "Delayed-feedback gain b")->required();
    simulate->add_option("--dist", simulate_args.dist_path, "Distribution spec file")
        ->required();
    simulate->add_option("--E", simulate_args.E,
                         "Rescale the distribution to this mean before integrating");
    simulate->add_option("--T", simulate_args.T, "Horizon (default 40x the mean delay)");
    simulate->add_option("--dt", simulate_args.dt, "Step size (default from the distribution)");
    simulate->add_option("--history", simulate_args.history_path,
                         "CSV of (t, x) on t <= 0 used as the initial history (default x = 1)");
    simulate->add_option("--out", simulate_args.out_path,
                         "Trace file (.csv or .dat; stdout when omitted)");
    simulate->add_flag("--emit-spec", simulate_args.emit_spec,
                       "Print the canonical spec of the distribution used");

    int selftest_jobs = 0;
    unsigned long long selftest_seed = 0;
    CLI::App* selftest =
        app.add_subcommand("selftest", "Run the acceptance suite and report pass/fail lines");
    selftest->add_option("--jobs", selftest_jobs, "Worker threads (0 = all cores)")
        ->capture_default_str();
    selftest->add_option("--seed", selftest_seed,
                         "Re-seed the randomized suites (0 keeps the pinned seeds)")
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (check->parsed()) return cmd_check(check_args);
        if (boundary->parsed()) return cmd_boundary(boundary_args);
        if (chart->parsed()) return cmd_chart(chart_args);
        if (extremal->parsed()) return cmd_extremal(extremal_args);
        if (simulate->parsed()) return cmd_simulate(simulate_args);
        if (selftest->parsed()) {
            const int failures = ds::run_acceptance(std::cout, selftest_jobs, selftest_seed);
            return failures == 0 ? 0 : kExitError;
        }
    } catch (const ds::SpecError& e) {
        std::cerr << "spec error: " << e.what() << '\n';
        return kExitSpec;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}
