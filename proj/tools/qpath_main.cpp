// qpath: batch front end for the monitored-qubit trajectory library.
// Subcommands: simulate, mlp, qnd, zeno, verify. Every run writes a
// manifest.json plus a rerun.ini that reproduces the outputs byte-for-byte.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qpath/core.hpp"
#include "qpath/io.hpp"
#include "qpath/mcsim.hpp"
#include "qpath/mlp.hpp"
#include "qpath/qnd.hpp"
#include "qpath/verify.hpp"
#include "qpath/zeno.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qpath;

namespace {

constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
    kOk = 0,
    kVerifyFailed = 1,
    kConfigError = 2,
    kEmptyPostselection = 3,
    kNoConvergence = 4,
};

// Resolved settings for one run, in a stable order: the manifest and the
// rerun config are generated from this list.
struct Resolved {
    std::vector<std::pair<std::string, std::string>> kv;

    void add(const std::string& key, const std::string& v) { kv.emplace_back(key, v); }
    void add(const std::string& key, double v) { add(key, io::fmt17(v)); }
    void add(const std::string& key, std::uint64_t v) { add(key, std::to_string(v)); }
    void add(const std::string& key, std::int64_t v) { add(key, std::to_string(v)); }
    void add(const std::string& key, unsigned v) { add(key, std::to_string(v)); }
    void add(const std::string& key, bool v) { add(key, std::string(v ? "true" : "false")); }
    void add(const std::string& key, const std::vector<double>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i)
            s += (i ? " " : "") + io::fmt17(v[i]);
        add(key, "\"" + s + "\"");
    }
};

void write_manifest(const fs::path& out_dir, const std::string& subcommand,
                    const Resolved& resolved, const std::vector<std::string>& outputs,
                    const json& summary) {
    json manifest;
    manifest["tool"] = "qpath";
    manifest["version"] = kVersion;
    manifest["subcommand"] = subcommand;
    json cfg;
    for (const auto& [k, v] : resolved.kv) cfg[k] = v;
    manifest["config"] = cfg;
    manifest["outputs"] = outputs;
    if (!summary.is_null()) manifest["summary"] = summary;
    std::ofstream(out_dir / "manifest.json") << manifest.dump(2) << '\n';

    std::ofstream ini(out_dir / "rerun.ini");
    ini << "[" << subcommand << "]\n";
    for (const auto& [k, v] : resolved.kv) ini << k << "=" << v << "\n";
}

void write_json_file(const fs::path& path, const json& j) {
    std::ofstream(path) << j.dump(2) << '\n';
}

struct CommonOpts {
    std::string out = "qpath-out";
    std::string format = "csv";
    unsigned threads = 0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--out", out, "output directory")->capture_default_str();
        cmd->add_option("--format", format, "table format: csv or json")
            ->check(CLI::IsMember({"csv", "json"}))
            ->capture_default_str();
        cmd->add_option("--threads", threads,
                        "worker thread cap (0 = all cores; never affects results)")
            ->capture_default_str();
    }

    fs::path prepare_dir() const {
        fs::path dir(out);
        fs::create_directories(dir);
        return dir;
    }
};

json params_json(const QubitParams& p) {
    return {{"epsilon", p.epsilon}, {"delta", p.delta}, {"tau", p.tau}};
}

// ---------------------------------------------------------------- simulate

struct SimulateCmd {
    CommonOpts common;
    QubitParams params{0.5, 0.0, 1.0};
    SimConfig config;
    double qi[3] = {1, 0, 0};
    double qf[3] = {0.7, 0.2, 0.7};
    std::int64_t target_selected = 0;   // 0: plain n_traj run
    std::uint64_t raw_cap = 10000000;
    bool store_ensemble = false;
    std::int64_t store_every = 1;

    void attach(CLI::App* cmd) {
        common.attach(cmd);
        cmd->add_option("--epsilon", params.epsilon, "energy asymmetry [1/time]")->capture_default_str();
        cmd->add_option("--delta", params.delta, "tunneling strength [1/time]")->capture_default_str();
        cmd->add_option("--tau", params.tau, "characteristic measurement time")->capture_default_str();
        cmd->add_option("--dt", config.dt, "time step")->capture_default_str();
        cmd->add_option("--horizon", config.horizon, "total time T")->capture_default_str();
        cmd->add_option("--n-traj", config.n_traj, "raw ensemble size")->capture_default_str();
        cmd->add_option("--lambda", config.lambda, "postselection tolerance")->capture_default_str();
        cmd->add_option("--seed", config.seed, "master RNG seed")->capture_default_str();
        cmd->add_option("--qi-x", qi[0], "initial x")->capture_default_str();
        cmd->add_option("--qi-y", qi[1], "initial y")->capture_default_str();
        cmd->add_option("--qi-z", qi[2], "initial z")->capture_default_str();
        cmd->add_option("--qf-x", qf[0], "postselection target x")->capture_default_str();
        cmd->add_option("--qf-y", qf[1], "postselection target y")->capture_default_str();
        cmd->add_option("--qf-z", qf[2], "postselection target z")->capture_default_str();
        cmd->add_option("--target-selected", target_selected,
                        "keep generating until this many trajectories survive (0 = off)")
            ->capture_default_str();
        cmd->add_option("--raw-cap", raw_cap, "raw trajectory cap for --target-selected")
            ->capture_default_str();
        cmd->add_flag("--store-ensemble", store_ensemble, "also write the trajectory table");
        cmd->add_option("--store-every", store_every, "thin stored trajectories to every m-th step")
            ->capture_default_str();
    }

    Resolved resolved() const {
        Resolved r;
        r.add("epsilon", params.epsilon);
        r.add("delta", params.delta);
        r.add("tau", params.tau);
        r.add("dt", config.dt);
        r.add("horizon", config.horizon);
        r.add("n-traj", config.n_traj);
        r.add("lambda", config.lambda);
        r.add("seed", config.seed);
        r.add("qi-x", qi[0]);
        r.add("qi-y", qi[1]);
        r.add("qi-z", qi[2]);
        r.add("qf-x", qf[0]);
        r.add("qf-y", qf[1]);
        r.add("qf-z", qf[2]);
        r.add("target-selected", target_selected);
        r.add("raw-cap", raw_cap);
        r.add("store-ensemble", store_ensemble);
        r.add("store-every", store_every);
        r.add("format", common.format);
        r.add("threads", common.threads);
        return r;
    }

    int run() const {
        params.validate();
        for (const std::string& w : config.validate(params))
            std::cerr << "warning: " << w << '\n';
        const BlochVector q_I{qi[0], qi[1], qi[2]};
        const BlochVector q_F{qf[0], qf[1], qf[2]};
        if (!q_I.is_valid())
            throw std::invalid_argument("qi-x/y/z: initial state outside the Bloch ball");

        const auto format = io::parse_format(common.format);
        const fs::path dir = common.prepare_dir();

        mcsim::Ensemble selected;
        std::vector<std::uint64_t> indices;
        std::uint64_t raw_used = 0;
        if (target_selected > 0) {
            auto run = mcsim::collect_postselected(q_I, q_F, config, params,
                                                   static_cast<std::uint64_t>(target_selected),
                                                   raw_cap, common.threads);
            selected = std::move(run.selected);
            indices = std::move(run.selected_indices);
            raw_used = run.raw_used;
        } else {
            const auto ens = mcsim::generate_ensemble(q_I, config, params, common.threads,
                                                      store_every);
            raw_used = static_cast<std::uint64_t>(config.n_traj);
            for (std::size_t i : mcsim::postselect_indices(ens, q_F, config.lambda)) {
                selected.trajectories.push_back(ens.trajectories[i]);
                indices.push_back(i);
            }
            selected.config = config;
            selected.params = params;
            selected.q_initial = q_I;
        }

        std::vector<std::string> outputs;
        json sidecar;
        sidecar["params"] = params_json(params);
        sidecar["seed"] = config.seed;
        sidecar["dt"] = config.dt;
        sidecar["horizon"] = config.horizon;
        sidecar["lambda"] = config.lambda;
        sidecar["q_initial"] = {q_I.x, q_I.y, q_I.z};
        sidecar["q_final_target"] = {q_F.x, q_F.y, q_F.z};
        sidecar["raw_used"] = raw_used;
        sidecar["n_selected"] = selected.trajectories.size();
        sidecar["selected_indices"] = indices;

        json summary = {{"raw_used", raw_used}, {"n_selected", selected.trajectories.size()}};

        if (selected.trajectories.empty()) {
            write_json_file(dir / "run.json", sidecar);
            outputs.push_back("run.json");
            write_manifest(dir, "simulate", resolved(), outputs, summary);
            std::cerr << "empty postselection: 0 of " << raw_used << " trajectories within lambda="
                      << config.lambda << " of the target; increase lambda or n-traj\n";
            return kEmptyPostselection;
        }

        const auto median = mcsim::median_path(selected);
        const std::string median_name = std::string("median") + io::extension(format);
        io::write_median((dir / median_name).string(), format, median);
        outputs.push_back(median_name);
        if (store_ensemble) {
            const std::string ens_name = std::string("ensemble") + io::extension(format);
            io::write_ensemble((dir / ens_name).string(), format, selected, &indices);
            outputs.push_back(ens_name);
        }
        write_json_file(dir / "run.json", sidecar);
        outputs.push_back("run.json");
        write_manifest(dir, "simulate", resolved(), outputs, summary);
        std::cout << "simulate: " << selected.trajectories.size() << " of " << raw_used
                  << " trajectories selected; median path in " << (dir / median_name).string()
                  << '\n';
        return kOk;
    }
};

// --------------------------------------------------------------------- mlp

struct MlpCmd {
    CommonOpts common;
    QubitParams params{0.0, -0.5, 1.0};
    double horizon = 0.6;
    double qi[3] = {1, 0, 0};
    double qf[3] = {0.9, 0.0, 0.5};
    mlp::ShootOptions shoot_opts;
    std::int64_t store_every = 1;

    void attach(CLI::App* cmd) {
        common.attach(cmd);
        cmd->add_option("--epsilon", params.epsilon, "energy asymmetry [1/time]")->capture_default_str();
        cmd->add_option("--delta", params.delta, "tunneling strength [1/time]")->capture_default_str();
        cmd->add_option("--tau", params.tau, "characteristic measurement time")->capture_default_str();
        cmd->add_option("--horizon", horizon, "total time T")->capture_default_str();
        cmd->add_option("--dt", shoot_opts.dt, "integrator step (0 = 1e-3 tau)")->capture_default_str();
        cmd->add_option("--qi-x", qi[0], "initial x")->capture_default_str();
        cmd->add_option("--qi-y", qi[1], "initial y")->capture_default_str();
        cmd->add_option("--qi-z", qi[2], "initial z")->capture_default_str();
        cmd->add_option("--qf-x", qf[0], "final x")->capture_default_str();
        cmd->add_option("--qf-y", qf[1], "final y")->capture_default_str();
        cmd->add_option("--qf-z", qf[2], "final z")->capture_default_str();
        cmd->add_option("--tolerance", shoot_opts.tolerance, "boundary residual target")
            ->capture_default_str();
        cmd->add_option("--grid-halfwidth", shoot_opts.grid_halfwidth,
                        "multi-start lattice extent")->capture_default_str();
        cmd->add_option("--max-starts", shoot_opts.max_starts, "cap on multi-start points (0 = all)")
            ->capture_default_str();
        cmd->add_option("--store-every", store_every, "thin the stored path")->capture_default_str();
    }

    Resolved resolved() const {
        Resolved r;
        r.add("epsilon", params.epsilon);
        r.add("delta", params.delta);
        r.add("tau", params.tau);
        r.add("horizon", horizon);
        r.add("dt", shoot_opts.dt);
        r.add("qi-x", qi[0]);
        r.add("qi-y", qi[1]);
        r.add("qi-z", qi[2]);
        r.add("qf-x", qf[0]);
        r.add("qf-y", qf[1]);
        r.add("qf-z", qf[2]);
        r.add("tolerance", shoot_opts.tolerance);
        r.add("grid-halfwidth", shoot_opts.grid_halfwidth);
        r.add("max-starts", static_cast<std::int64_t>(shoot_opts.max_starts));
        r.add("store-every", store_every);
        r.add("format", common.format);
        r.add("threads", common.threads);
        return r;
    }

    int run() {
        params.validate();
        const BlochVector q_I{qi[0], qi[1], qi[2]};
        const BlochVector q_F{qf[0], qf[1], qf[2]};
        if (!q_I.is_valid() || !q_F.is_valid())
            throw std::invalid_argument("boundary states must lie inside the Bloch ball");

        const auto format = io::parse_format(common.format);
        const fs::path dir = common.prepare_dir();
        shoot_opts.threads = common.threads;

        const auto result = mlp::shoot(q_I, q_F, horizon, params, shoot_opts);

        json summary;
        summary["converged"] = result.converged;
        summary["best_residual"] = result.best_residual;
        json branches = json::array();
        for (const auto& b : result.branches)
            branches.push_back({{"p0", {b.p0.px, b.p0.py, b.p0.pz}},
                                {"action", b.action},
                                {"energy", b.energy},
                                {"residual", b.residual},
                                {"start_index", b.start_index}});
        summary["branches"] = branches;

        std::vector<std::string> outputs;
        if (result.converged) {
            const auto path = store_every > 1
                ? mlp::integrate_path(q_I, result.path.p0, horizon,
                                      shoot_opts.dt > 0 ? shoot_opts.dt : 1e-3 * params.tau,
                                      params, store_every)
                : result.path;
            summary["energy"] = result.path.energy;
            summary["action"] = result.path.action;
            summary["residual"] = result.path.residual;
            summary["p0"] = {result.path.p0.px, result.path.p0.py, result.path.p0.pz};
            const std::string path_name = std::string("mlp_path") + io::extension(format);
            io::write_mlp((dir / path_name).string(), format, path);
            outputs.push_back(path_name);
        }
        write_json_file(dir / "mlp_summary.json", summary);
        outputs.push_back("mlp_summary.json");
        write_manifest(dir, "mlp", resolved(), outputs, summary);

        if (!result.converged) {
            std::cerr << "mlp: no converged boundary-value solution; best residual "
                      << result.best_residual << '\n';
            return kNoConvergence;
        }
        std::cout << "mlp: converged, S = " << result.path.action << ", E = "
                  << result.path.energy << ", residual = " << result.path.residual << '\n';
        return kOk;
    }
};

// --------------------------------------------------------------------- qnd

struct QndCmd {
    CommonOpts common;
    double epsilon = 0.5;
    double delta = 0.0;
    double tau = 1.0;
    double horizon = 0.6;
    double qi[3] = {1, 0, 0};
    double z_F = 0.7;
    std::vector<double> profile_horizons{0.01, 0.5, 2.0};
    std::int64_t profile_points = 399;
    double profile_zmax = 0.999;
    double path_dt = 0.01;

    void attach(CLI::App* cmd) {
        common.attach(cmd);
        cmd->add_option("--epsilon", epsilon, "energy asymmetry [1/time]")->capture_default_str();
        cmd->add_option("--delta", delta, "must be 0 for the QND case")->capture_default_str();
        cmd->add_option("--tau", tau, "characteristic measurement time")->capture_default_str();
        cmd->add_option("--horizon", horizon, "total time T for the path")->capture_default_str();
        cmd->add_option("--qi-x", qi[0], "initial x")->capture_default_str();
        cmd->add_option("--qi-y", qi[1], "initial y")->capture_default_str();
        cmd->add_option("--qi-z", qi[2], "initial z")->capture_default_str();
        cmd->add_option("--z-f", z_F, "final z")->capture_default_str();
        cmd->add_option("--profile-horizons", profile_horizons,
                        "T values for the exp(S) profiles")->capture_default_str();
        cmd->add_option("--profile-points", profile_points, "profile grid size")->capture_default_str();
        cmd->add_option("--profile-zmax", profile_zmax, "profile grid edge (< 1)")->capture_default_str();
        cmd->add_option("--path-dt", path_dt, "path table output step")->capture_default_str();
    }

    Resolved resolved() const {
        Resolved r;
        r.add("epsilon", epsilon);
        r.add("delta", delta);
        r.add("tau", tau);
        r.add("horizon", horizon);
        r.add("qi-x", qi[0]);
        r.add("qi-y", qi[1]);
        r.add("qi-z", qi[2]);
        r.add("z-f", z_F);
        r.add("profile-horizons", profile_horizons);
        r.add("profile-points", profile_points);
        r.add("profile-zmax", profile_zmax);
        r.add("path-dt", path_dt);
        r.add("format", common.format);
        r.add("threads", common.threads);
        return r;
    }

    int run() const {
        if (delta != 0.0)
            throw std::invalid_argument("qnd requires delta = 0 (got " + io::fmt17(delta) + ")");
        const QubitParams params{epsilon, 0.0, tau};
        params.validate();
        if (!(std::abs(z_F) < 1.0) || !(std::abs(qi[2]) < 1.0))
            throw std::invalid_argument("qnd requires |z_I| < 1 and |z_F| < 1");
        if (!(profile_zmax > 0.0) || !(profile_zmax < 1.0) || profile_points < 3)
            throw std::invalid_argument("profile grid must satisfy 0 < zmax < 1, points >= 3");

        const auto format = io::parse_format(common.format);
        const fs::path dir = common.prepare_dir();
        const BlochVector q_I{qi[0], qi[1], qi[2]};

        const Readout r_bar = qnd::qnd_readout(q_I.z, z_F, horizon, tau);
        const double action = qnd::qnd_action(q_I.z, z_F, horizon, tau);

        // Path table in the shared MLP schema; the momenta use the default
        // representative of the degenerate family, p_xI = p_yI = 0.
        mlp::MostLikelyPath path;
        const std::int64_t n = std::max<std::int64_t>(1, std::llround(horizon / path_dt));
        for (std::int64_t k = 0; k <= n; ++k) {
            const double t = horizon * static_cast<double>(k) / static_cast<double>(n);
            PhaseState s;
            s.q = qnd::qnd_path(q_I, r_bar, epsilon, tau, t);
            s.p = qnd::qnd_momenta(0.0, 0.0, q_I, r_bar, epsilon, tau, t);
            path.times.push_back(t);
            path.states.push_back(s);
            path.readouts.push_back(r_bar);
            path.energies.push_back(stochastic_hamiltonian(s.q, s.p, r_bar, params));
        }
        path.energy = path.energies.front();
        path.action = action;
        path.p0 = path.states.front().p;

        std::vector<std::string> outputs;
        const std::string path_name = std::string("qnd_path") + io::extension(format);
        io::write_mlp((dir / path_name).string(), format, path);
        outputs.push_back(path_name);

        for (double T : profile_horizons) {
            std::vector<double> grid(profile_points);
            for (std::int64_t i = 0; i < profile_points; ++i)
                grid[i] = -profile_zmax +
                          2.0 * profile_zmax * static_cast<double>(i) /
                              static_cast<double>(profile_points - 1);
            const auto profile = qnd::final_state_profile(q_I.z, T, tau, grid);
            const std::string name = "profile_T" + io::fmt17(T) + io::extension(format);
            io::write_profile((dir / name).string(), format, profile);
            outputs.push_back(name);
        }

        json summary;
        summary["r_bar"] = r_bar;
        summary["action"] = action;
        summary["z_I"] = q_I.z;
        summary["z_F"] = z_F;
        summary["energy"] = path.energy;
        write_json_file(dir / "qnd_summary.json", summary);
        outputs.push_back("qnd_summary.json");
        write_manifest(dir, "qnd", resolved(), outputs, summary);
        std::cout << "qnd: r_bar = " << r_bar << ", S = " << action << '\n';
        return kOk;
    }
};

// -------------------------------------------------------------------- zeno

struct ZenoCmd {
    CommonOpts common;
    zeno::ZenoParams params{0.2, 1.0};
    std::vector<double> energies;  // default: E_c - 0.01/tau, E_c, 0, +0.01/tau
    double theta_min = 1e-3;
    double theta_max = 0.0;        // 0: pi - theta_min
    std::int64_t n_theta = 400;
    bool with_traversal = false;
    bool rate_check = false;
    double rate_dt = 0.01;
    std::uint64_t rate_traj = 10;
    double rate_horizon = 500.0;
    double rate_debounce = 5.0;
    std::uint64_t seed = 1;

    void attach(CLI::App* cmd) {
        common.attach(cmd);
        cmd->add_option("--delta", params.delta, "tunneling strength [1/time]")->capture_default_str();
        cmd->add_option("--tau", params.tau, "characteristic measurement time")->capture_default_str();
        cmd->add_option("--energies", energies,
                        "stochastic energies for the portrait (default: E_c-0.01/tau, E_c, 0, 0.01/tau)");
        cmd->add_option("--theta-min", theta_min, "lower endpoint cutoff")->capture_default_str();
        cmd->add_option("--theta-max", theta_max, "upper endpoint (0 = pi - theta-min)")
            ->capture_default_str();
        cmd->add_option("--n-theta", n_theta, "portrait grid size")->capture_default_str();
        cmd->add_flag("--with-traversal", with_traversal,
                      "emit traversal time / action table over the energy list");
        cmd->add_flag("--rate-check", rate_check,
                      "run the Monte Carlo switching-rate comparison (slow)");
        cmd->add_option("--rate-dt", rate_dt, "rate check: time step")->capture_default_str();
        cmd->add_option("--rate-traj", rate_traj, "rate check: trajectories")->capture_default_str();
        cmd->add_option("--rate-horizon", rate_horizon, "rate check: horizon per trajectory")
            ->capture_default_str();
        cmd->add_option("--rate-debounce", rate_debounce, "rate check: debounce window")
            ->capture_default_str();
        cmd->add_option("--seed", seed, "rate check RNG seed")->capture_default_str();
    }

    Resolved resolved(const std::vector<double>& used_energies) const {
        Resolved r;
        r.add("delta", params.delta);
        r.add("tau", params.tau);
        r.add("energies", used_energies);
        r.add("theta-min", theta_min);
        r.add("theta-max", theta_max);
        r.add("n-theta", n_theta);
        r.add("with-traversal", with_traversal);
        r.add("rate-check", rate_check);
        r.add("rate-dt", rate_dt);
        r.add("rate-traj", rate_traj);
        r.add("rate-horizon", rate_horizon);
        r.add("rate-debounce", rate_debounce);
        r.add("seed", seed);
        r.add("format", common.format);
        r.add("threads", common.threads);
        return r;
    }

    int run() const {
        params.validate();
        if (params.delta * params.tau >= 1.0)
            std::cerr << "warning: delta*tau = " << params.delta * params.tau
                      << " >= 1; Zeno asymptotics are unreliable\n";
        const auto format = io::parse_format(common.format);
        const fs::path dir = common.prepare_dir();

        const double e_c = zeno::critical_energy(params);
        std::vector<double> used_energies = energies;
        if (used_energies.empty())
            used_energies = {e_c - 0.01 / params.tau, e_c, 0.0, 0.01 / params.tau};

        const double t_lo = theta_min;
        const double t_hi = theta_max > 0.0 ? theta_max : M_PI - theta_min;
        if (!(t_lo > 0.0) || !(t_lo < t_hi) || !(t_hi < M_PI))
            throw std::invalid_argument("theta cutoffs must satisfy 0 < min < max < pi");

        std::vector<zeno::EnergyCurve> curves;
        for (double e : used_energies)
            for (auto branch : {zeno::Branch::upper, zeno::Branch::lower})
                curves.push_back(zeno::sample_energy_curve(e, branch, params, t_lo, t_hi,
                                                           static_cast<std::size_t>(n_theta)));

        std::vector<std::string> outputs;
        const std::string portrait_name = std::string("portrait") + io::extension(format);
        io::write_portrait((dir / portrait_name).string(), format, curves);
        outputs.push_back(portrait_name);

        std::vector<double> thetas, exact, approx;
        for (std::int64_t i = 0; i < n_theta; ++i) {
            const double theta =
                t_lo + (t_hi - t_lo) * static_cast<double>(i) / static_cast<double>(n_theta - 1);
            thetas.push_back(theta);
            exact.push_back(zeno::instanton(theta, params, zeno::InstantonMode::exact));
            approx.push_back(zeno::instanton(theta, params, zeno::InstantonMode::approx));
        }
        const std::string inst_name = std::string("instanton") + io::extension(format);
        io::write_instanton((dir / inst_name).string(), format, thetas, exact, approx);
        outputs.push_back(inst_name);

        const zeno::FixedPoint fp = zeno::fixed_point(params);
        const zeno::SwitchingRate rate = zeno::switching_rate(params);
        json summary;
        summary["theta_s"] = fp.theta_s;
        summary["p_theta_s"] = fp.p_theta_s;
        summary["r_s"] = fp.r_s;
        summary["critical_energy"] = e_c;
        summary["gamma"] = rate.gamma;
        summary["attempt_rate"] = rate.attempt_rate;
        summary["instanton_action"] = rate.instanton_action;
        write_json_file(dir / "zeno_summary.json", summary);
        outputs.push_back("zeno_summary.json");

        if (with_traversal) {
            json table = json::array();
            for (double e : used_energies) {
                json row{{"E", e}};
                try {
                    row["T"] = zeno::traversal_time(t_lo, t_hi, e, zeno::Branch::upper, params);
                    row["S"] = zeno::path_action(t_lo, t_hi, e, zeno::Branch::upper, params);
                } catch (const std::exception& ex) {
                    row["error"] = ex.what();
                }
                table.push_back(row);
            }
            write_json_file(dir / "traversal.json", table);
            outputs.push_back("traversal.json");
        }

        if (rate_check) {
            const auto check = zeno::jump_rate_check(params, rate_dt, rate_traj, rate_horizon,
                                                     rate_debounce, seed, common.threads);
            json rc;
            rc["gamma_formula"] = check.gamma_formula;
            rc["gamma_empirical"] = check.gamma_empirical;
            rc["n_jumps"] = check.n_jumps;
            rc["total_time"] = check.total_time;
            write_json_file(dir / "rate_check.json", rc);
            outputs.push_back("rate_check.json");
        }

        write_manifest(dir, "zeno", resolved(used_energies), outputs, summary);
        std::cout << "zeno: fixed point (theta, p, r) = (" << fp.theta_s << ", " << fp.p_theta_s
                  << ", " << fp.r_s << "), E_c = " << e_c << '\n';
        return kOk;
    }
};

// ------------------------------------------------------------------ verify

struct VerifyCmd {
    CommonOpts common;
    std::string level = "quick";
    std::uint64_t seed = 20240901;

    void attach(CLI::App* cmd) {
        common.attach(cmd);
        cmd->add_option("--level", level, "quick skips the Monte Carlo-heavy checks")
            ->check(CLI::IsMember({"quick", "full"}))
            ->capture_default_str();
        cmd->add_option("--seed", seed, "RNG seed for the stochastic checks")->capture_default_str();
    }

    int run() const {
        const fs::path dir = common.prepare_dir();
        verify::VerifyOptions opt;
        opt.full = level == "full";
        opt.threads = common.threads;
        opt.seed = seed;
        const auto results = verify::run_verify(opt);

        bool all_pass = true;
        json report = json::array();
        for (const auto& r : results) {
            all_pass = all_pass && r.pass;
            std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << " (" << r.seconds
                      << " s): " << r.details << '\n';
            report.push_back({{"name", r.name},
                              {"pass", r.pass},
                              {"details", r.details},
                              {"seconds", r.seconds}});
        }
        write_json_file(dir / "verify_report.json",
                        json{{"level", level}, {"all_pass", all_pass}, {"checks", report}});
        std::cout << (all_pass ? "verify: all checks passed" : "verify: FAILURES present")
                  << '\n';
        return all_pass ? kOk : kVerifyFailed;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monitored-qubit trajectories, most-likely paths and quantum-jump analysis"};
    app.set_version_flag("--version", std::string("qpath ") + kVersion);
    app.fallthrough();
    app.set_config("--config", "", "INI config file with one section per subcommand");
    app.require_subcommand(0, 1);

    SimulateCmd simulate_cmd;
    MlpCmd mlp_cmd;
    QndCmd qnd_cmd;
    ZenoCmd zeno_cmd;
    VerifyCmd verify_cmd;

    CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo ensemble, postselection, medians");
    simulate_cmd.attach(sim);
    CLI::App* mlp_sub = app.add_subcommand("mlp", "most-likely path boundary-value solve");
    mlp_cmd.attach(mlp_sub);
    CLI::App* qnd_sub = app.add_subcommand("qnd", "closed-form QND paths, action and profiles");
    qnd_cmd.attach(qnd_sub);
    CLI::App* zeno_sub = app.add_subcommand("zeno", "phase portrait, instanton, fixed point, rates");
    zeno_cmd.attach(zeno_sub);
    CLI::App* verify_sub = app.add_subcommand("verify", "cross-module oracle suite");
    verify_cmd.attach(verify_sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kConfigError;
    }

    try {
        if (sim->parsed()) return simulate_cmd.run();
        if (mlp_sub->parsed()) return mlp_cmd.run();
        if (qnd_sub->parsed()) return qnd_cmd.run();
        if (zeno_sub->parsed()) return zeno_cmd.run();
        if (verify_sub->parsed()) return verify_cmd.run();
        std::cout << app.help();
        return kOk;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::domain_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    }
}
