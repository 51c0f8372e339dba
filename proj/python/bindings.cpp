#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <complex>
#include <utility>
#include <vector>

#include "delaystab/boundary.hpp"
#include "delaystab/charfun.hpp"
#include "delaystab/criteria.hpp"
#include "delaystab/distribution.hpp"
#include "delaystab/extremal.hpp"
#include "delaystab/simulator.hpp"
#include "delaystab/spec_io.hpp"

namespace py = pybind11;
namespace ds = delaystab;

namespace {

ds::DiscreteMixture as_mixture(const ds::DelayDistribution& dist) {
    if (const auto* d = std::get_if<ds::DiracMass>(&dist.kind()))
        return ds::DiscreteMixture{{{d->location, 1.0}}};
    if (const auto* m = std::get_if<ds::DiscreteMixture>(&dist.kind())) return *m;
    throw std::invalid_argument("expected a discrete distribution");
}

py::dict pair_dict(const ds::ExtremalPair& pair) {
    py::dict out;
    out["tau1"] = pair.tau1;
    out["tau2"] = pair.tau2;
    out["p1"] = pair.p1;
    out["p2"] = pair.p2;
    out["omega_s"] = pair.omega_s;
    out["mean"] = pair.preserved_mean;
    out["c_preserved"] = pair.preserved_c;
    out["s_star"] = pair.s_star;
    out["clamped"] = pair.clamped;
    return out;
}

py::dict report_dict(const ds::RootReport& report) {
    py::dict out;
    out["unstable_count"] = report.unstable_count;
    out["leading_root"] = report.leading_root;
    out["contour_bound"] = report.contour_bound;
    out["marginal"] = report.marginal;
    return out;
}

const char* cell_name(ds::CellStatus s) {
    switch (s) {
        case ds::CellStatus::Stable: return "Stable";
        case ds::CellStatus::Unstable: return "Unstable";
        case ds::CellStatus::Marginal: return "Marginal";
        default: return "Failed";
    }
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Asymptotic stability of x'(t) = -a x(t) - b Int x(t - tau) d eta(tau)";

    py::class_<ds::DelayDistribution>(m, "DelayDistribution")
        .def_static("dirac", &ds::DelayDistribution::dirac, py::arg("location"))
        .def_static(
            "discrete",
            [](const std::vector<std::pair<double, double>>& atoms) {
                std::vector<ds::Atom> a;
                a.reserve(atoms.size());
                for (const auto& [delay, weight] : atoms) a.push_back({delay, weight});
                return ds::DelayDistribution::discrete(std::move(a));
            },
            py::arg("atoms"), "Mixture from (delay, weight) pairs; weights are normalized")
        .def_static("exponential", &ds::DelayDistribution::exponential, py::arg("mean"))
        .def_static("gamma", &ds::DelayDistribution::gamma, py::arg("order"), py::arg("mean"))
        .def_static("uniform", &ds::DelayDistribution::uniform, py::arg("lower"),
                    py::arg("upper"))
        .def_static("from_json", &ds::parse_distribution_json, py::arg("text"))
        .def_static("from_file", &ds::parse_distribution_file, py::arg("path"))
        .def_property_readonly("kind", &ds::DelayDistribution::kind_name)
        .def_property_readonly("mean", [](const ds::DelayDistribution& d) { return ds::mean(d); })
        .def_property_readonly("max_delay",
                               [](const ds::DelayDistribution& d) { return ds::max_delay(d); })
        .def("atoms",
             [](const ds::DelayDistribution& d) {
                 std::vector<std::pair<double, double>> out;
                 for (const ds::Atom& a : as_mixture(d).atoms)
                     out.emplace_back(a.delay, a.weight);
                 return out;
             },
             "The (delay, weight) pairs of a discrete distribution")
        .def("to_json",
             [](const ds::DelayDistribution& d) { return ds::emit_distribution_json(d); })
        .def("__repr__",
             [](const ds::DelayDistribution& d) { return ds::emit_distribution_json(d); });

    m.def("scale_delays", &ds::scale_delays, py::arg("dist"), py::arg("factor"));
    m.def("scale_to_mean", &ds::scale_to_mean, py::arg("dist"), py::arg("target_mean"));
    m.def("discretize", &ds::discretize, py::arg("dist"), py::arg("n"));
    m.def(
        "trig_moments",
        [](const ds::DelayDistribution& d, double omega) {
            const ds::TrigMoments tm = ds::trig_moments(d, omega);
            return py::make_tuple(tm.c, tm.s);
        },
        py::arg("dist"), py::arg("omega"), "Returns (C(omega), S(omega))");
    m.def("laplace", &ds::laplace, py::arg("dist"), py::arg("lam"));

    m.def(
        "char_value",
        [](double a, const ds::DelayDistribution& d, std::complex<double> lam) {
            return ds::char_value(a, d, lam).value;
        },
        py::arg("a"), py::arg("dist"), py::arg("lam"),
        "F(lambda) = lambda + a + Laplace transform of the distribution");
    m.def("omega_cap", &ds::omega_cap, py::arg("a"));
    m.def(
        "leading_root",
        [](double a, const ds::DelayDistribution& d) { return ds::leading_root(a, d); },
        py::arg("a"), py::arg("dist"), "Rightmost characteristic root (Im >= 0 member)");
    m.def(
        "count_unstable_roots",
        [](double a, const ds::DelayDistribution& d) {
            return report_dict(ds::count_unstable_roots(a, d));
        },
        py::arg("a"), py::arg("dist"));

    m.def(
        "classify_region",
        [](double a, double b) { return std::string(ds::to_string(ds::classify_region(a, b))); },
        py::arg("a"), py::arg("b"));
    m.def("universal_bound", &ds::universal_bound, py::arg("a"), py::arg("b"));
    m.def(
        "hayes_verdict",
        [](double a, double b, double tau) {
            return std::string(ds::to_string(ds::hayes_verdict(a, b, tau)));
        },
        py::arg("a"), py::arg("b"), py::arg("tau"));
    m.def("hopf_crossings", &ds::hopf_crossings, py::arg("a"), py::arg("dist"));
    m.def("crossing_candidates", &ds::crossing_candidates, py::arg("a"), py::arg("dist"),
          py::arg("w_hi"));
    m.def(
        "decide_stability",
        [](double a, double b, const ds::DelayDistribution& d) {
            const ds::StabilityVerdict v = ds::decide_stability(a, b, d);
            py::dict out;
            out["status"] = ds::to_string(v.status);
            if (v.omega_s) out["omega_s"] = *v.omega_s;
            if (v.leading_root) out["leading_root"] = *v.leading_root;
            if (v.bound_used) out["bound_used"] = *v.bound_used;
            if (v.unstable_count) out["unstable_count"] = *v.unstable_count;
            return out;
        },
        py::arg("a"), py::arg("b"), py::arg("dist"));

    m.def("chord_constant", &ds::chord_constant);
    m.def("chord_angle", &ds::chord_angle);
    m.def(
        "extremal_two_delay",
        [](double c_target, double omega_s, double E) {
            return pair_dict(ds::extremal_two_delay(c_target, omega_s, E));
        },
        py::arg("c_target"), py::arg("omega_s"), py::arg("E"));
    m.def(
        "reduce_to_extremal",
        [](const ds::DelayDistribution& dist, double omega_s, double a) {
            return pair_dict(ds::reduce_to_extremal(as_mixture(dist), omega_s, a));
        },
        py::arg("dist"), py::arg("omega_s"), py::arg("a"));
    m.def("s_star_bound_check", &ds::s_star_bound_check, py::arg("a"), py::arg("p"),
          py::arg("r"));

    m.def(
        "trace_boundary",
        [](const ds::DelayDistribution& dist, double u_max, int n_points) {
            const ds::TraceResult result = ds::trace_boundary(dist, u_max, n_points);
            py::list branches;
            for (const ds::BoundaryBranch& br : result.branches) {
                py::dict bd;
                bd["id"] = br.id;
                bd["kind"] =
                    br.kind == ds::BranchKind::HopfCurve ? "HopfCurve" : "ZeroRootLine";
                py::list pts;
                for (const ds::BoundaryPoint& p : br.points)
                    pts.append(py::make_tuple(p.u, p.a, p.E));
                bd["points"] = pts;
                branches.append(bd);
            }
            py::dict out;
            out["branches"] = branches;
            out["degenerate"] = result.degenerate;
            return out;
        },
        py::arg("dist"), py::arg("u_max") = 100.0, py::arg("n_points") = 4000);
    m.def("asymptote_two_delay", &ds::asymptote_two_delay, py::arg("p"));
    m.def(
        "chart",
        [](const ds::DelayDistribution& dist, std::vector<double> a_axis,
           std::vector<double> e_axis, int jobs) {
            const ds::ChartGrid grid =
                ds::chart(dist, std::move(a_axis), std::move(e_axis), jobs);
            py::list status;
            for (ds::CellStatus s : grid.status) status.append(cell_name(s));
            py::dict out;
            out["a_axis"] = grid.a_axis;
            out["E_axis"] = grid.e_axis;
            out["status"] = status;  // row-major: a outer, E inner
            out["unstable_count"] = grid.unstable_count;
            return out;
        },
        py::arg("dist"), py::arg("a_axis"), py::arg("e_axis"), py::arg("jobs") = 0);

    py::class_<ds::SimulationTrace>(m, "SimulationTrace")
        .def_property_readonly("times",
                               [](const ds::SimulationTrace& t) { return t.times; })
        .def_property_readonly("values",
                               [](const ds::SimulationTrace& t) { return t.values; })
        .def_property_readonly("dt", [](const ds::SimulationTrace& t) { return t.dt; });
    m.def(
        "simulate",
        [](double a, double b, const ds::DelayDistribution& dist, double T, double dt) {
            return ds::simulate(a, b, dist, ds::SimOptions{T, dt});
        },
        py::arg("a"), py::arg("b"), py::arg("dist"), py::arg("T") = 0.0, py::arg("dt") = 0.0,
        "Method-of-steps integration from constant history x = 1; T, dt <= 0 pick defaults");
    m.def("decay_rate", &ds::decay_rate, py::arg("trace"));
    m.def("oscillation_frequency", &ds::oscillation_frequency, py::arg("trace"));
}
