// Python bindings for the main operations: system presets and serialization,
// H2-norm bounding, estimator synthesis, and spectral simulation.

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>

#include "piekit/h2.hpp"
#include "piekit/pie_system.hpp"
#include "piekit/serialize.hpp"
#include "piekit/sim.hpp"

namespace py = pybind11;
using namespace piekit;

namespace {

const char* status_name(SDPStatus s) {
    switch (s) {
        case SDPStatus::Optimal: return "optimal";
        case SDPStatus::Infeasible: return "infeasible";
        case SDPStatus::Unbounded: return "unbounded";
        case SDPStatus::IterationLimit: return "iteration-limit";
        default: return "numerical-error";
    }
}

H2Options make_options(int degree, int max_degree, double eps, double tolerance) {
    H2Options opts;
    opts.degree = degree;
    opts.max_degree = max_degree;
    opts.eps = eps;
    opts.sdp.tolerance = tolerance;
    return opts;
}

std::vector<std::vector<double>> to_lists(const Matrix& m) {
    std::vector<std::vector<double>> out(m.rows());
    for (int i = 0; i < m.rows(); ++i) {
        out[i].resize(m.cols());
        for (int j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
    }
    return out;
}

Signal named_signal(const std::string& name, int nw) {
    if (name == "none") return [nw](double) { return Vector::Zero(nw); };
    if (name == "sin100")
        return [nw](double t) { return Vector::Constant(nw, std::sin(100.0 * t)); };
    throw std::invalid_argument("unknown disturbance preset: " + name);
}

RL2Function default_ic(const PIESystem& sys) {
    // PIE-state constant -1 in the first distributed channel (the parabolic
    // physical profile for the shipped examples); finite part ones if the
    // system is a pure ODE.
    PolyMatrix dist(sys.n(), 1, VarSet::None, sys.domain());
    Vector fin = Vector::Zero(sys.m());
    if (sys.n() > 0) {
        Matrix c = Matrix::Zero(sys.n(), 1);
        c(0, 0) = -1.0;
        dist.add_coeff(0, 0, c);
    } else {
        fin.setOnes();
    }
    return RL2Function(fin, dist);
}

py::dict trajectory_dict(const Trajectory& traj) {
    py::dict d;
    d["t"] = traj.t;
    d["stations"] = traj.stations;
    d["z"] = to_lists(traj.z);
    d["y"] = to_lists(traj.y);
    d["field"] = to_lists(traj.field);
    if (traj.has_observer) {
        d["z_hat"] = to_lists(traj.z_hat);
        d["e_z"] = to_lists(traj.e_z);
        d["error_field"] = to_lists(traj.error_field);
    }
    return d;
}

}  // namespace

PYBIND11_MODULE(_piekit, mod) {
    mod.doc() = "Certified H2 analysis, observer synthesis and spectral "
                "simulation for coupled ODE-PDE systems in PIE form";

    py::class_<PIESystem>(mod, "PIESystem")
        .def_property_readonly("m", &PIESystem::m)
        .def_property_readonly("n", &PIESystem::n)
        .def_property_readonly("nw", &PIESystem::nw)
        .def_property_readonly("nz", &PIESystem::nz)
        .def_property_readonly("ny", &PIESystem::ny)
        .def("to_json", [](const PIESystem& s) { return to_json_string(s); })
        .def_static("from_json",
                    [](const std::string& text) { return piesystem_from_json(text); });

    mod.def("preset_system", &preset_system, py::arg("name"),
            "Named example system: reaction-diffusion | beam | ode-test | "
            "ode-estimation");

    mod.def(
        "h2_norm_bound",
        [](const PIESystem& sys, int degree, int max_degree, double eps,
           double tolerance) {
            NormCertificate c = h2_bound_schur(sys, make_options(degree, max_degree,
                                                                 eps, tolerance));
            py::dict d;
            d["status"] = status_name(c.status);
            d["gamma"] = c.gamma;
            d["degree"] = c.degree;
            d["iterations"] = c.iterations;
            return d;
        },
        py::arg("system"), py::arg("degree") = 2, py::arg("max_degree") = 4,
        py::arg("eps") = 1e-4, py::arg("tolerance") = 1e-5,
        "Certified H2-norm bound via the block (Schur) program");

    mod.def(
        "synthesize_estimator",
        [](const PIESystem& sys, int degree, int max_degree, double eps,
           double tolerance) {
            SynthesisResult r = synthesize_estimator(
                sys, make_options(degree, max_degree, eps, tolerance));
            py::dict d;
            d["status"] = status_name(r.status);
            d["gamma"] = r.gamma;
            d["degree"] = r.degree;
            d["iterations"] = r.iterations;
            d["inversion_residual"] = r.inversion_residual;
            if (r.status == SDPStatus::Optimal) d["gain"] = to_json_string(r.L);
            return d;
        },
        py::arg("system"), py::arg("degree") = 2, py::arg("max_degree") = 4,
        py::arg("eps") = 1e-4, py::arg("tolerance") = 1e-5,
        "H2-optimal Luenberger observer gain; returns the gain as JSON");

    mod.def(
        "simulate",
        [](const PIESystem& sys, int order, double dt, double t_final,
           const std::string& disturbance) {
            ProjectedSystem proj = project(sys, order);
            return trajectory_dict(simulate(proj, named_signal(disturbance, sys.nw()),
                                            default_ic(sys), dt, t_final));
        },
        py::arg("system"), py::arg("order") = 8, py::arg("dt") = 0.002,
        py::arg("t_final") = 1.0, py::arg("disturbance") = "none",
        "Integrate the plant from the default initial profile");

    mod.def(
        "simulate_observer",
        [](const PIESystem& sys, const std::string& gain_json, int order, double dt,
           double t_final, const std::string& disturbance) {
            ObserverGain L = gain_json.empty()
                                 ? ObserverGain::zero(sys.m(), sys.n(), sys.ny(),
                                                      sys.domain())
                                 : observergain_from_json(gain_json);
            return trajectory_dict(simulate_observer(sys, L,
                                                     named_signal(disturbance, sys.nw()),
                                                     default_ic(sys), order, dt,
                                                     t_final));
        },
        py::arg("system"), py::arg("gain") = std::string(), py::arg("order") = 8,
        py::arg("dt") = 0.002, py::arg("t_final") = 1.0,
        py::arg("disturbance") = "none",
        "Co-integrate plant and Luenberger observer (gain as JSON; empty = zero gain)");

    mod.def(
        "emit_csv",
        [](const PIESystem& sys, const std::string& gain_json, const std::string& path,
           int order, double dt, double t_final, const std::string& disturbance) {
            ObserverGain L = gain_json.empty()
                                 ? ObserverGain::zero(sys.m(), sys.n(), sys.ny(),
                                                      sys.domain())
                                 : observergain_from_json(gain_json);
            emit_csv(simulate_observer(sys, L, named_signal(disturbance, sys.nw()),
                                       default_ic(sys), order, dt, t_final),
                     path);
        },
        py::arg("system"), py::arg("gain"), py::arg("path"), py::arg("order") = 8,
        py::arg("dt") = 0.002, py::arg("t_final") = 1.0,
        py::arg("disturbance") = "none",
        "Run an observer simulation and write the trajectory CSV");
}
