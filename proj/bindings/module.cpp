#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qpath/core.hpp"
#include "qpath/mcsim.hpp"
#include "qpath/mlp.hpp"
#include "qpath/qnd.hpp"
#include "qpath/verify.hpp"
#include "qpath/zeno.hpp"

namespace py = pybind11;
using namespace qpath;

namespace {

BlochVector to_bloch(const std::tuple<double, double, double>& t) {
    return {std::get<0>(t), std::get<1>(t), std::get<2>(t)};
}

CoState to_costate(const std::tuple<double, double, double>& t) {
    return {std::get<0>(t), std::get<1>(t), std::get<2>(t)};
}

py::tuple from_bloch(const BlochVector& q) { return py::make_tuple(q.x, q.y, q.z); }
py::tuple from_costate(const CoState& p) { return py::make_tuple(p.px, p.py, p.pz); }

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Monitored-qubit trajectories, most-likely paths and quantum-jump analysis";

    py::class_<QubitParams>(m, "QubitParams")
        .def(py::init<double, double, double>(), py::arg("epsilon") = 0.0,
             py::arg("delta") = 0.0, py::arg("tau") = 1.0)
        .def_readwrite("epsilon", &QubitParams::epsilon)
        .def_readwrite("delta", &QubitParams::delta)
        .def_readwrite("tau", &QubitParams::tau)
        .def("canonical", &QubitParams::canonical);

    py::class_<SimConfig>(m, "SimConfig")
        .def(py::init([](double dt, double horizon, std::int64_t n_traj, double lambda,
                         std::uint64_t seed) {
                 return SimConfig{dt, horizon, n_traj, lambda, seed};
             }),
             py::arg("dt") = 0.01, py::arg("horizon") = 0.6, py::arg("n_traj") = 1000,
             py::arg("lambda_") = 0.02, py::arg("seed") = 1)
        .def_readwrite("dt", &SimConfig::dt)
        .def_readwrite("horizon", &SimConfig::horizon)
        .def_readwrite("n_traj", &SimConfig::n_traj)
        .def_readwrite("lambda_", &SimConfig::lambda)
        .def_readwrite("seed", &SimConfig::seed);

    py::class_<TrajectoryRecord>(m, "TrajectoryRecord")
        .def_readonly("times", &TrajectoryRecord::times)
        .def_readonly("readouts", &TrajectoryRecord::readouts)
        .def_property_readonly("states", [](const TrajectoryRecord& t) {
            py::list out;
            for (const auto& q : t.states) out.append(from_bloch(q));
            return out;
        });

    // core
    m.def("drift",
          [](std::tuple<double, double, double> q, double r, const QubitParams& p) {
              return from_bloch(drift(to_bloch(q), r, p));
          },
          py::arg("q"), py::arg("r"), py::arg("params"));
    m.def("functional_f",
          [](std::tuple<double, double, double> q, double r, double tau) {
              return functional_f(to_bloch(q), r, tau);
          },
          py::arg("q"), py::arg("r"), py::arg("tau"));
    m.def("stochastic_hamiltonian",
          [](std::tuple<double, double, double> q, std::tuple<double, double, double> p,
             double r, const QubitParams& prm) {
              return stochastic_hamiltonian(to_bloch(q), to_costate(p), r, prm);
          },
          py::arg("q"), py::arg("p"), py::arg("r"), py::arg("params"));
    m.def("readout_log_density",
          [](double r, std::tuple<double, double, double> q, double dt, double tau) {
              return readout_log_density(r, to_bloch(q), dt, tau);
          },
          py::arg("r"), py::arg("q"), py::arg("dt"), py::arg("tau"));

    // mcsim
    py::class_<mcsim::Ensemble>(m, "Ensemble")
        .def_readonly("trajectories", &mcsim::Ensemble::trajectories);
    py::class_<mcsim::MedianPath>(m, "MedianPath")
        .def_readonly("times", &mcsim::MedianPath::times)
        .def_readonly("median_readout", &mcsim::MedianPath::median_readout)
        .def_readonly("n_selected", &mcsim::MedianPath::n_selected)
        .def_property_readonly("median", [](const mcsim::MedianPath& m_) {
            py::list out;
            for (const auto& q : m_.median) out.append(from_bloch(q));
            return out;
        })
        .def_property_readonly("p40", [](const mcsim::MedianPath& m_) {
            py::list out;
            for (const auto& q : m_.p40) out.append(from_bloch(q));
            return out;
        })
        .def_property_readonly("p60", [](const mcsim::MedianPath& m_) {
            py::list out;
            for (const auto& q : m_.p60) out.append(from_bloch(q));
            return out;
        });
    m.def("update_state_exact",
          [](std::tuple<double, double, double> q, double r, double dt, const QubitParams& p) {
              return from_bloch(mcsim::update_state_exact(to_bloch(q), r, dt, p));
          },
          py::arg("q"), py::arg("r"), py::arg("dt"), py::arg("params"));
    m.def("simulate_trajectory",
          [](std::tuple<double, double, double> q_I, const SimConfig& cfg,
             const QubitParams& p, std::uint64_t index) {
              return mcsim::simulate_trajectory(to_bloch(q_I), cfg, p, index);
          },
          py::arg("q_initial"), py::arg("config"), py::arg("params"), py::arg("traj_index") = 0);
    m.def("generate_ensemble",
          [](std::tuple<double, double, double> q_I, const SimConfig& cfg,
             const QubitParams& p, unsigned threads) {
              return mcsim::generate_ensemble(to_bloch(q_I), cfg, p, threads);
          },
          py::arg("q_initial"), py::arg("config"), py::arg("params"), py::arg("threads") = 0,
          py::call_guard<py::gil_scoped_release>());
    m.def("postselect",
          [](const mcsim::Ensemble& ens, std::tuple<double, double, double> q_F, double lambda) {
              return mcsim::postselect(ens, to_bloch(q_F), lambda);
          },
          py::arg("ensemble"), py::arg("q_final"), py::arg("lambda_"));
    m.def("median_path", &mcsim::median_path, py::arg("subset"));

    // mlp
    py::class_<mlp::MostLikelyPath>(m, "MostLikelyPath")
        .def_readonly("times", &mlp::MostLikelyPath::times)
        .def_readonly("readouts", &mlp::MostLikelyPath::readouts)
        .def_readonly("energies", &mlp::MostLikelyPath::energies)
        .def_readonly("energy", &mlp::MostLikelyPath::energy)
        .def_readonly("action", &mlp::MostLikelyPath::action)
        .def_readonly("residual", &mlp::MostLikelyPath::residual)
        .def_property_readonly("p0",
                               [](const mlp::MostLikelyPath& p) { return from_costate(p.p0); })
        .def_property_readonly("states", [](const mlp::MostLikelyPath& p) {
            py::list out;
            for (const auto& s : p.states)
                out.append(py::make_tuple(s.q.x, s.q.y, s.q.z, s.p.px, s.p.py, s.p.pz));
            return out;
        });
    py::class_<mlp::ShootResult>(m, "ShootResult")
        .def_readonly("converged", &mlp::ShootResult::converged)
        .def_readonly("path", &mlp::ShootResult::path)
        .def_readonly("best_residual", &mlp::ShootResult::best_residual);
    m.def("optimal_readout",
          [](std::tuple<double, double, double> q, std::tuple<double, double, double> p) {
              return mlp::optimal_readout({to_bloch(q), to_costate(p)});
          },
          py::arg("q"), py::arg("p"));
    m.def("integrate_path",
          [](std::tuple<double, double, double> q_I, std::tuple<double, double, double> p0,
             double horizon, double dt, const QubitParams& prm) {
              return mlp::integrate_path(to_bloch(q_I), to_costate(p0), horizon, dt, prm);
          },
          py::arg("q_initial"), py::arg("p0"), py::arg("horizon"), py::arg("dt"),
          py::arg("params"), py::call_guard<py::gil_scoped_release>());
    m.def("shoot",
          [](std::tuple<double, double, double> q_I, std::tuple<double, double, double> q_F,
             double horizon, const QubitParams& prm, double tolerance, unsigned threads) {
              mlp::ShootOptions opt;
              opt.tolerance = tolerance;
              opt.threads = threads;
              return mlp::shoot(to_bloch(q_I), to_bloch(q_F), horizon, prm, opt);
          },
          py::arg("q_initial"), py::arg("q_final"), py::arg("horizon"), py::arg("params"),
          py::arg("tolerance") = 1e-8, py::arg("threads") = 0,
          py::call_guard<py::gil_scoped_release>());

    // qnd
    m.def("qnd_readout", &qnd::qnd_readout, py::arg("z_initial"), py::arg("z_final"),
          py::arg("horizon"), py::arg("tau"));
    m.def("qnd_path",
          [](std::tuple<double, double, double> q_I, double r_bar, double epsilon, double tau,
             double t) { return from_bloch(qnd::qnd_path(to_bloch(q_I), r_bar, epsilon, tau, t)); },
          py::arg("q_initial"), py::arg("r_bar"), py::arg("epsilon"), py::arg("tau"),
          py::arg("t"));
    m.def("qnd_momenta",
          [](double p_xI, double p_yI, std::tuple<double, double, double> q_I, double r_bar,
             double epsilon, double tau, double t) {
              return from_costate(qnd::qnd_momenta(p_xI, p_yI, to_bloch(q_I), r_bar, epsilon,
                                                   tau, t));
          },
          py::arg("p_xI"), py::arg("p_yI"), py::arg("q_initial"), py::arg("r_bar"),
          py::arg("epsilon"), py::arg("tau"), py::arg("t"));
    m.def("qnd_action", &qnd::qnd_action, py::arg("z_initial"), py::arg("z_final"),
          py::arg("horizon"), py::arg("tau"));
    m.def("final_state_profile", &qnd::final_state_profile, py::arg("z_initial"),
          py::arg("horizon"), py::arg("tau"), py::arg("z_final_grid"));

    // zeno
    py::class_<zeno::ZenoParams>(m, "ZenoParams")
        .def(py::init<double, double>(), py::arg("delta") = 0.2, py::arg("tau") = 1.0)
        .def_readwrite("delta", &zeno::ZenoParams::delta)
        .def_readwrite("tau", &zeno::ZenoParams::tau);
    py::enum_<zeno::Branch>(m, "Branch")
        .value("upper", zeno::Branch::upper)
        .value("lower", zeno::Branch::lower);
    py::class_<zeno::FixedPoint>(m, "FixedPoint")
        .def_readonly("theta_s", &zeno::FixedPoint::theta_s)
        .def_readonly("p_theta_s", &zeno::FixedPoint::p_theta_s)
        .def_readonly("r_s", &zeno::FixedPoint::r_s);
    py::class_<zeno::SwitchingRate>(m, "SwitchingRate")
        .def_readonly("gamma", &zeno::SwitchingRate::gamma)
        .def_readonly("attempt_rate", &zeno::SwitchingRate::attempt_rate)
        .def_readonly("instanton_action", &zeno::SwitchingRate::instanton_action);
    m.def("quad_coeffs",
          [](double theta, const zeno::ZenoParams& zp) {
              const auto [a, b, c] = zeno::quad_coeffs(theta, zp);
              return py::make_tuple(a, b, c);
          },
          py::arg("theta"), py::arg("params"));
    m.def("p_theta_of", &zeno::p_theta_of, py::arg("theta"), py::arg("energy"),
          py::arg("branch"), py::arg("params"));
    m.def("instanton",
          [](double theta, const zeno::ZenoParams& zp, const std::string& mode) {
              return zeno::instanton(theta, zp,
                                     mode == "exact" ? zeno::InstantonMode::exact
                                                     : zeno::InstantonMode::approx);
          },
          py::arg("theta"), py::arg("params"), py::arg("mode") = "exact");
    m.def("traversal_time", &zeno::traversal_time, py::arg("theta_initial"),
          py::arg("theta_final"), py::arg("energy"), py::arg("branch"), py::arg("params"),
          py::arg("abs_tol") = 1e-9, py::call_guard<py::gil_scoped_release>());
    m.def("path_action", &zeno::path_action, py::arg("theta_initial"), py::arg("theta_final"),
          py::arg("energy"), py::arg("branch"), py::arg("params"), py::arg("abs_tol") = 1e-9,
          py::call_guard<py::gil_scoped_release>());
    m.def("fixed_point", &zeno::fixed_point, py::arg("params"));
    m.def("critical_energy", &zeno::critical_energy, py::arg("params"));
    m.def("switching_rate", &zeno::switching_rate, py::arg("params"));

    // verify
    py::class_<verify::CheckResult>(m, "CheckResult")
        .def_readonly("name", &verify::CheckResult::name)
        .def_readonly("pass_", &verify::CheckResult::pass)
        .def_readonly("details", &verify::CheckResult::details)
        .def_readonly("seconds", &verify::CheckResult::seconds);
    m.def("run_verify",
          [](bool full, unsigned threads, std::uint64_t seed) {
              verify::VerifyOptions opt;
              opt.full = full;
              opt.threads = threads;
              opt.seed = seed;
              return verify::run_verify(opt);
          },
          py::arg("full") = false, py::arg("threads") = 0, py::arg("seed") = 20240901,
          py::call_guard<py::gil_scoped_release>());
}
