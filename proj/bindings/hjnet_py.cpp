#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hjnet/common.hpp"
#include "hjnet/scenario.hpp"
#include "hjnet/semidiscrete.hpp"
#include "hjnet/solver.hpp"

namespace py = pybind11;
using namespace hjnet;

namespace {

// Bundles the pieces a solve needs so python callers keep one object alive.
struct PyModel {
    Network net;
    std::unique_ptr<HamiltonianFamily> family;
    std::unique_ptr<Conjugator> conj;
    FluxLimiter limiter;

    PyModel(const std::string& network_json, double horizon, const std::string& kind,
            const std::string& potential, double exponent, double scale)
        : net(Network::from_json(network_json)) {
        auto rep = net.validate();
        if (!rep.valid()) throw Error("network validation failed:\n" + rep.to_string());
        family = std::make_unique<HamiltonianFamily>(&net, horizon);
        Expr pot = Expr::parse(potential, {"s", "t"});
        for (int a = 0; a < net.num_arcs(); ++a)
            family->set_arc(a, make_builtin(builtin_kind_from_string(kind), pot, exponent, scale,
                                            net.arc(a).length, horizon));
        conj = std::make_unique<Conjugator>(family.get());
        limiter = FluxLimiter::maximal(*conj);
    }

    void set_constant_limiter(const std::map<std::string, double>& values, double fallback) {
        std::vector<std::function<double(double)>> fns;
        for (int v = 0; v < net.num_vertices(); ++v) {
            auto it = values.find(net.vertex_id(v));
            double c = it != values.end() ? it->second : fallback;
            fns.push_back([c](double) { return c; });
        }
        limiter = FluxLimiter::from_values(&net, family->horizon(), std::move(fns));
    }

    double distance(const std::string& arc_a, double sa, const std::string& arc_b, double sb) const {
        return net.distance(net.make_point(arc_a, sa), net.make_point(arc_b, sb));
    }

    double conjugate(const std::string& arc, double s, double lam, double t) const {
        return conj->conjugate({net.arc_index(arc), false}, s, lam, t).value;
    }

    double maximal_limiter_value(const std::string& vertex, double t) const {
        FluxLimiter m = FluxLimiter::maximal(*conj);
        return m.value(net.vertex_index(vertex), t);
    }

    py::dict minimal_action_py(const std::string& arc1, double s1, double t1, const std::string& arc2,
                               double s2, double t2, double ds, double dt, double kappa) {
        SpaceTimeGrid grid(&net, 0.0, family->horizon(), ds, dt, kappa);
        Lagrangian lag(conj.get(), &limiter);
        ActionResult r = minimal_action(lag, grid, net.make_point(arc1, s1), t1, net.make_point(arc2, s2), t2);
        py::dict out;
        out["reachable"] = r.reachable;
        out["value"] = r.value;
        out["excursions"] = r.admissibility.excursions;
        py::list curve;
        for (const auto& smp : r.curve.samples) {
            py::dict c;
            c["t"] = smp.t;
            c["arc"] = smp.point.arc >= 0 ? net.arc(smp.point.arc).id : "";
            c["offset"] = smp.point.offset;
            curve.append(c);
        }
        out["curve"] = curve;
        return out;
    }

    py::dict solve_py(const std::function<double(const std::string&, double)>& datum, double ds, double dt,
                      double kappa) {
        SpaceTimeGrid grid(&net, 0.0, family->horizon(), ds, dt, kappa);
        InitialDatum u0;
        u0.value = [&](const NetPoint& p) { return datum(net.arc(p.arc).id, p.offset); };
        Solution sol = solve(*conj, limiter, u0, grid);
        py::dict out;
        out["clamped"] = sol.clamped;
        out["provenance"] = to_string(sol.provenance());
        py::list rows;
        for (int a = 0; a < net.num_arcs(); ++a)
            for (int i = 0; i <= grid.cells(a); ++i)
                for (int k = 0; k <= grid.num_steps(); ++k) {
                    py::dict row;
                    row["arc"] = net.arc(a).id;
                    row["offset"] = i * grid.ds(a);
                    row["t"] = grid.time(k);
                    row["u"] = sol.field.slices[k][grid.node_at(a, i)];
                    rows.append(row);
                }
        out["values"] = rows;
        FixedPointReport fp = fixed_point_residual(*conj, sol.limiter, grid, sol.field);
        out["fixed_point_residual"] = fp.max_residual;
        return out;
    }
};

}  // namespace

PYBIND11_MODULE(_hjnet, m) {
    m.doc() = "Hamilton-Jacobi equations on embedded networks";

    py::register_exception<Error>(m, "HjnetError");

    py::class_<PyModel>(m, "Model")
        .def(py::init<const std::string&, double, const std::string&, const std::string&, double, double>(),
             py::arg("network_json"), py::arg("horizon"), py::arg("kind") = "quadratic_minus_potential",
             py::arg("potential") = "0", py::arg("exponent") = 2.0, py::arg("scale") = 1.0)
        .def("set_constant_limiter", &PyModel::set_constant_limiter, py::arg("values"),
             py::arg("fallback") = 0.0)
        .def("distance", &PyModel::distance)
        .def("conjugate", &PyModel::conjugate, py::arg("arc"), py::arg("s"), py::arg("lam"), py::arg("t"))
        .def("maximal_limiter", &PyModel::maximal_limiter_value, py::arg("vertex"), py::arg("t"))
        .def("minimal_action", &PyModel::minimal_action_py, py::arg("arc1"), py::arg("s1"), py::arg("t1"),
             py::arg("arc2"), py::arg("s2"), py::arg("t2"), py::arg("ds") = 0.05, py::arg("dt") = 0.05,
             py::arg("kappa") = 4.0)
        .def("solve", &PyModel::solve_py, py::arg("datum"), py::arg("ds") = 0.05, py::arg("dt") = 0.05,
             py::arg("kappa") = 4.0);

    m.def(
        "running_min",
        [](const std::vector<double>& psi, const std::vector<double>& cost, double dt) {
            return running_min(psi, cost, dt);
        },
        py::arg("psi"), py::arg("cost"), py::arg("dt"));

    m.def(
        "run_scenario",
        [](const std::string& scenario, const std::string& out_dir, bool quiet) {
            RunOverrides ov;
            ov.quiet = quiet;
            return run_scenario(scenario, out_dir, ov);
        },
        py::arg("scenario"), py::arg("out_dir"), py::arg("quiet") = true);
}
