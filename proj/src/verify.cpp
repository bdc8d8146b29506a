#include "qpath/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "qpath/core.hpp"
#include "qpath/mcsim.hpp"
#include "qpath/mlp.hpp"
#include "qpath/qnd.hpp"
#include "qpath/quadrature.hpp"
#include "qpath/rng.hpp"
#include "qpath/zeno.hpp"

namespace qpath {
namespace verify {

namespace {

using Clock = std::chrono::steady_clock;

struct Timer {
    Clock::time_point start = Clock::now();
    double elapsed() const { return std::chrono::duration<double>(Clock::now() - start).count(); }
};

std::string f6(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

/// Solve the Fig. 1 boundary problem. The caption's q_F values are rounded
/// and lie off the pure-state sphere, which the dynamics never leave, so the
/// shoot runs in least-squares mode and the closest reachable point q(T)
/// serves as the effective target for both the MLP and the postselection.
struct Fig1Scenario {
    const char* label;
    QubitParams params;
    BlochVector q_I;
    BlochVector q_F_nominal;
};

struct Fig1Solution {
    mlp::MostLikelyPath path;
    BlochVector q_F_eff;
};

Fig1Solution solve_fig1(const Fig1Scenario& sc, unsigned threads) {
    mlp::ShootOptions opt;
    opt.least_squares = true;
    opt.threads = threads;
    const auto res = mlp::shoot(sc.q_I, sc.q_F_nominal, 0.6 * sc.params.tau, sc.params, opt);
    if (res.path.times.empty())
        throw std::runtime_error(std::string("fig1 shoot produced no path for ") + sc.label);
    const BlochVector q_F_eff = res.path.states.back().q;
    // Re-solve exactly at the reachable point so the returned path is the
    // largest-action branch through it, not merely the first least-squares
    // stationary point found.
    mlp::ShootOptions exact;
    exact.threads = threads;
    const auto res2 = mlp::shoot(sc.q_I, q_F_eff, 0.6 * sc.params.tau, sc.params, exact);
    if (res2.converged) return {res2.path, q_F_eff};
    return {res.path, q_F_eff};
}

const Fig1Scenario kFig1a{"fig1a", {0.5, 0.0, 1.0}, {1, 0, 0}, {0.7, 0.2, 0.7}};
const Fig1Scenario kFig1b{"fig1b", {0.0, -0.5, 1.0}, {1, 0, 0}, {0.9, 0.0, 0.5}};

}  // namespace

CheckResult check_fig1_median_vs_mlp(const VerifyOptions& opt) {
    Timer timer;
    CheckResult out{"1_fig1_median_vs_mlp", true, "", 0.0};
    std::ostringstream detail;

    for (const Fig1Scenario& sc : {kFig1a, kFig1b}) {
        const Fig1Solution sol = solve_fig1(sc, opt.threads);

        SimConfig config;
        config.dt = 0.01 * sc.params.tau;
        config.horizon = 0.6 * sc.params.tau;
        config.lambda = 0.02;
        config.seed = opt.seed;
        config.n_traj = 1;  // unused by collect_postselected
        const auto run = mcsim::collect_postselected(sc.q_I, sol.q_F_eff, config, sc.params,
                                                     10000, 10000000, opt.threads);
        if (!run.reached_target) {
            out.pass = false;
            detail << sc.label << ": only " << run.selected_indices.size()
                   << " of 10000 trajectories survived postselection within the 1e7 cap; ";
            continue;
        }
        const mcsim::MedianPath med = mcsim::median_path(run.selected);

        // The MLP grid (dt = 1e-3 tau) contains the simulation grid (0.01 tau).
        const std::size_t stride = (med.times.size() > 1)
            ? static_cast<std::size_t>(std::llround(
                  (med.times[1] - med.times[0]) / (sol.path.times[1] - sol.path.times[0])))
            : 1;
        double sum2[3] = {0, 0, 0};
        std::size_t inside[3] = {0, 0, 0};
        const std::size_t n_pts = med.times.size();
        for (std::size_t k = 0; k < n_pts; ++k) {
            const BlochVector qm = sol.path.states[k * stride].q;
            const double d[3] = {qm.x - med.median[k].x, qm.y - med.median[k].y,
                                 qm.z - med.median[k].z};
            for (int c = 0; c < 3; ++c) sum2[c] += d[c] * d[c];
            const double lo[3] = {med.p40[k].x, med.p40[k].y, med.p40[k].z};
            const double hi[3] = {med.p60[k].x, med.p60[k].y, med.p60[k].z};
            const double v[3] = {qm.x, qm.y, qm.z};
            for (int c = 0; c < 3; ++c)
                if (v[c] >= lo[c] - 1e-12 && v[c] <= hi[c] + 1e-12) ++inside[c];
        }
        double rms[3], frac[3];
        double worst_rms = 0.0, worst_frac = 1.0;
        for (int c = 0; c < 3; ++c) {
            rms[c] = std::sqrt(sum2[c] / static_cast<double>(n_pts));
            frac[c] = static_cast<double>(inside[c]) / static_cast<double>(n_pts);
            worst_rms = std::max(worst_rms, rms[c]);
            worst_frac = std::min(worst_frac, frac[c]);
        }
        const bool rms_ok = worst_rms <= 0.05;
        const bool env_ok = worst_frac >= 0.90;
        out.pass = out.pass && rms_ok && env_ok;
        detail << sc.label << ": raw=" << run.raw_used << " selected=10000 rms=(" << f6(rms[0])
               << "," << f6(rms[1]) << "," << f6(rms[2]) << ") rms<=0.05:"
               << (rms_ok ? "pass" : "FAIL") << " envelope_frac=(" << f6(frac[0]) << ","
               << f6(frac[1]) << "," << f6(frac[2]) << ") >=0.90:" << (env_ok ? "pass" : "FAIL")
               << " target_offset=" << f6(distance(sol.q_F_eff, sc.q_F_nominal)) << "; ";
    }
    out.details = detail.str();
    out.seconds = timer.elapsed();
    return out;
}

CheckResult check_qnd_shoot_equivalence(const VerifyOptions& opt) {
    Timer timer;
    CheckResult out{"2_qnd_shoot_equivalence", true, "", 0.0};
    RngStream rng(opt.seed, 2);
    double worst_path = 0.0, worst_readout = 0.0;
    int failures = 0;

    for (int trial = 0; trial < 50; ++trial) {
        const double z_I = -0.85 + 1.7 * rng.uniform();
        const double z_F = -0.85 + 1.7 * rng.uniform();
        const double purity = 0.4 + 0.6 * rng.uniform();
        const double rho = purity * std::sqrt(1.0 - z_I * z_I);
        const double phi = 2.0 * M_PI * rng.uniform();
        const BlochVector q_I{rho * std::cos(phi), rho * std::sin(phi), z_I};
        const double T = 0.3 + 0.7 * rng.uniform();
        const QubitParams params{-1.0 + 2.0 * rng.uniform(), 0.0, 1.0};

        const Readout r_bar = qnd::qnd_readout(z_I, z_F, T, params.tau);
        const BlochVector q_F = qnd::qnd_path(q_I, r_bar, params.epsilon, params.tau, T);

        mlp::ShootOptions sopt;
        sopt.tolerance = 1e-10;
        sopt.threads = opt.threads;
        const auto res = mlp::shoot(q_I, q_F, T, params, sopt);
        if (!res.converged) {
            ++failures;
            continue;
        }
        for (std::size_t k = 0; k < res.path.times.size(); ++k) {
            const BlochVector ref =
                qnd::qnd_path(q_I, r_bar, params.epsilon, params.tau, res.path.times[k]);
            worst_path = std::max(worst_path, distance(res.path.states[k].q, ref));
        }
        worst_readout = std::max(worst_readout, std::abs(res.path.readouts.front() - r_bar));
    }
    out.pass = failures == 0 && worst_path <= 1e-6 && worst_readout <= 1e-8;
    out.details = "problems=50 non_converged=" + std::to_string(failures) +
                  " max_path_dev=" + f6(worst_path) + " max_rbar_dev=" + f6(worst_readout);
    out.seconds = timer.elapsed();
    return out;
}

CheckResult check_energy_conservation(const VerifyOptions& opt) {
    Timer timer;
    CheckResult out{"3_energy_conservation", true, "", 0.0};
    std::ostringstream detail;

    double worst_drift = 0.0;
    for (const Fig1Scenario& sc : {kFig1a, kFig1b}) {
        const Fig1Solution sol = solve_fig1(sc, opt.threads);
        const auto path =
            mlp::integrate_path(sc.q_I, sol.path.p0, 0.6 * sc.params.tau, 1e-3, sc.params);
        for (double e : path.energies) worst_drift = std::max(worst_drift, std::abs(e - path.energy));
    }

    // Observed convergence order from the endpoint state error against a
    // dt/8 reference, on a path with O(1) momenta.
    const QubitParams params{0.7, -0.4, 1.0};
    const BlochVector q_I{0.6, 0.2, 0.5};
    const CoState p0{0.4, -0.3, 0.6};
    const double T = 0.6;
    auto endpoint = [&](double dt) {
        const auto p = mlp::integrate_path(q_I, p0, T, dt, params);
        return p.states.back();
    };
    const PhaseState ref = endpoint(0.02 / 8.0);
    auto err = [&](double dt) {
        const PhaseState e = endpoint(dt);
        const BlochVector dq = e.q - ref.q;
        const double dp[3] = {e.p.px - ref.p.px, e.p.py - ref.p.py, e.p.pz - ref.p.pz};
        return std::sqrt(dq.norm2() + dp[0] * dp[0] + dp[1] * dp[1] + dp[2] * dp[2]);
    };
    const double e1 = err(0.02), e2 = err(0.01);
    const double order = std::log2(e1 / e2);

    out.pass = worst_drift <= 1e-6 && order >= 3.8;
    detail << "max_energy_drift=" << f6(worst_drift) << " rk4_order=" << f6(order);
    out.details = detail.str();
    out.seconds = timer.elapsed();
    return out;
}

CheckResult check_qnd_action_identity(const VerifyOptions& opt) {
    Timer timer;
    CheckResult out{"4_qnd_action_identity", true, "", 0.0};
    const double z_I = 0.3, z_F = -0.5, T = 0.7, tau = 1.0, epsilon = 0.4;
    const BlochVector q_I{0.5, -0.3, z_I};
    const QubitParams params{epsilon, 0.0, tau};
    const Readout r_bar = qnd::qnd_readout(z_I, z_F, T, tau);
    const double closed_form = qnd::qnd_action(z_I, z_F, T, tau);

    double worst = 0.0;
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) {
            const double p_xI = -1.0 + 0.5 * i;
            const double p_yI = -1.0 + 0.5 * j;
            // Action integrand -p.qdot + H with qdot from centered differences
            // of the closed-form path: an evaluation route independent of the
            // on-shell cancellation used to derive the closed-form action.
            auto integrand = [&](double t) {
                const double h = 1e-5;
                const BlochVector qp = qnd::qnd_path(q_I, r_bar, epsilon, tau, t + h);
                const BlochVector qm = qnd::qnd_path(q_I, r_bar, epsilon, tau, t - h);
                const BlochVector qdot = (1.0 / (2.0 * h)) * (qp - qm);
                const BlochVector q = qnd::qnd_path(q_I, r_bar, epsilon, tau, t);
                const CoState p = qnd::qnd_momenta(p_xI, p_yI, q_I, r_bar, epsilon, tau, t);
                return -dot(p, qdot) + stochastic_hamiltonian(q, p, r_bar, params);
            };
            const double s_quad = integrate_or_throw(integrand, 0.0, T, 1e-9, 1e-9);
            worst = std::max(worst, std::abs(s_quad - closed_form));
        }
    }
    out.pass = worst <= 1e-8;
    out.details = "grid=5x5 max_|S_quad - S_closed|=" + f6(worst);
    out.seconds = timer.elapsed();
    (void)opt;
    return out;
}

CheckResult check_zeno_closed_forms(const VerifyOptions& opt) {
    Timer timer;
    CheckResult out{"5_zeno_closed_forms", true, "", 0.0};
    const zeno::ZenoParams zp{0.2, 1.0};
    const zeno::FixedPoint fp = zeno::fixed_point(zp);

    const double ref_theta = std::atan(0.2);
    const double ref_p = -0.2;
    const double ref_r = std::sqrt(1.04);
    const double closed_err = std::max({std::abs(fp.theta_s - ref_theta),
                                        std::abs(fp.p_theta_s - ref_p),
                                        std::abs(fp.r_s - ref_r)});

    const zeno::ZenoRate rate = zeno::zeno_rhs(fp.theta_s, fp.p_theta_s, zp);
    const double residual = std::max(std::abs(rate.theta_dot), std::abs(rate.p_dot));

    const auto [a, b, c] = zeno::quad_coeffs(fp.theta_s, zp);
    const double h_at_fp = a * fp.p_theta_s * fp.p_theta_s + b * fp.p_theta_s + c;
    const double e_c = zeno::critical_energy(zp);
    const double energy_err = std::abs(h_at_fp - e_c);

    // Crossing classification: disc > 0 on all of (0, pi) iff E > E_c.
    auto min_disc = [&](double energy) {
        double m = 1e300;
        for (int i = 1; i < 4000; ++i)
            m = std::min(m, zeno::discriminant(i * M_PI / 4000.0, energy, zp));
        return m;
    };
    const bool crossing_ok = min_disc(e_c + 1e-3) > 0.0 && min_disc(e_c - 1e-3) < 0.0;

    out.pass = closed_err <= 1e-12 && residual <= 1e-12 && energy_err <= 1e-12 && crossing_ok;
    out.details = "closed_form_err=" + f6(closed_err) + " rhs_residual=" + f6(residual) +
                  " |H(fp)-E_c|=" + f6(energy_err) +
                  " crossing_flip=" + (crossing_ok ? "yes" : "no");
    out.seconds = timer.elapsed();
    (void)opt;
    return out;
}

CheckResult check_instanton_asymptotics(const VerifyOptions& opt) {
    Timer timer;
    CheckResult out{"6_instanton_asymptotics", true, "", 0.0};
    const double cutoff = 1e-3;
    std::vector<double> action_ratios;
    for (double dtau : {0.1, 0.03, 0.01}) {
        const zeno::ZenoParams zp{dtau, 1.0};
        const double s = zeno::path_action(cutoff, M_PI - cutoff, 0.0, zeno::Branch::upper, zp);
        action_ratios.push_back(s / (2.0 * std::log(dtau)));
    }
    // Monotone approach to 1 (from below: 0.880, 0.914, 0.933).
    const bool monotone = std::abs(action_ratios[0] - 1.0) > std::abs(action_ratios[1] - 1.0) &&
                          std::abs(action_ratios[1] - 1.0) > std::abs(action_ratios[2] - 1.0);
    const bool action_ok = action_ratios[2] >= 0.7 && action_ratios[2] <= 1.3;

    const zeno::ZenoParams zp{0.01, 1.0};
    const double t_num =
        zeno::traversal_time(cutoff, M_PI - cutoff, 0.0, zeno::Branch::upper, zp);
    const double t_ratio = t_num / (4.0 * zp.tau * std::log(1.0 / (zp.delta * zp.tau)));
    const bool time_ok = t_ratio >= 0.7 && t_ratio <= 1.3;

    out.pass = monotone && action_ok && time_ok;
    out.details = "action_ratios=[" + f6(action_ratios[0]) + "," + f6(action_ratios[1]) + "," +
                  f6(action_ratios[2]) + "] time_ratio=" + f6(t_ratio);
    out.seconds = timer.elapsed();
    (void)opt;
    return out;
}

CheckResult check_switching_rate(const VerifyOptions& opt) {
    Timer timer;
    CheckResult out{"7_switching_rate", true, "", 0.0};
    const zeno::ZenoParams zp{0.2, 1.0};
    const auto check =
        zeno::jump_rate_check(zp, 0.01, 10, 500.0, 5.0, opt.seed + 7, opt.threads);
    const double ratio = check.gamma_empirical / check.gamma_formula;
    out.pass = ratio >= 0.5 && ratio <= 2.0;
    out.details = "n_jumps=" + std::to_string(check.n_jumps) + " total_time=" +
                  f6(check.total_time) + " gamma_emp=" + f6(check.gamma_empirical) +
                  " gamma=" + f6(check.gamma_formula) + " ratio=" + f6(ratio);
    out.seconds = timer.elapsed();
    return out;
}

CheckResult check_distributional(const VerifyOptions& opt) {
    Timer timer;
    CheckResult out{"8_distributional", true, "", 0.0};
    std::ostringstream detail;
    const double tau = 1.0, dt = 0.01;
    const double sigma = std::sqrt(tau / dt);

    // Normalization and first moment by quadrature.
    double worst_norm = 0.0, worst_mean = 0.0;
    for (double z : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
        const BlochVector q{0.0, 0.0, z};
        const double lim = 40.0 * sigma;
        auto density = [&](double r) { return std::exp(readout_log_density(r, q, dt, tau)); };
        const double norm = integrate_or_throw(density, -lim, lim, 1e-10, 1e-11, {-1.0, 1.0});
        auto r_density = [&](double r) { return r * density(r); };
        const double mean = integrate_or_throw(r_density, -lim, lim, 1e-10, 1e-11, {-1.0, 1.0});
        worst_norm = std::max(worst_norm, std::abs(norm - 1.0));
        worst_mean = std::max(worst_mean, std::abs(mean - z));
    }
    const bool norm_ok = worst_norm <= 1e-8 && worst_mean <= 1e-6;

    // Sampled moments at z = 0: mean within 3 sigma/sqrt(N), variance within
    // 1% of tau/dt + 1.
    const std::size_t n_mom = 1000000;
    RngStream rng(opt.seed, 8);
    const BlochVector q0{0, 0, 0};
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t i = 0; i < n_mom; ++i) {
        const double r = mcsim::sample_readout(q0, dt, tau, rng);
        sum += r;
        sum2 += r * r;
    }
    const double mean = sum / n_mom;
    const double var = sum2 / n_mom - mean * mean;
    const double exp_var = tau / dt + 1.0;
    const bool mom_ok = std::abs(mean) <= 3.0 * std::sqrt(exp_var / n_mom) &&
                        std::abs(var - exp_var) <= 0.01 * exp_var;

    // Kolmogorov-Smirnov distance against the mixture CDF at z = 0.5.
    const std::size_t n_ks = 100000;
    const BlochVector q5{0, 0, 0.5};
    std::vector<double> samples(n_ks);
    for (auto& s : samples) s = mcsim::sample_readout(q5, dt, tau, rng);
    std::sort(samples.begin(), samples.end());
    auto cdf = [&](double r) {
        auto phi = [&](double m) { return 0.5 * std::erfc(-(r - m) / (sigma * std::sqrt(2.0))); };
        return 0.75 * phi(1.0) + 0.25 * phi(-1.0);
    };
    double ks = 0.0;
    for (std::size_t i = 0; i < n_ks; ++i) {
        const double f = cdf(samples[i]);
        ks = std::max(ks, std::abs(f - static_cast<double>(i + 1) / n_ks));
        ks = std::max(ks, std::abs(f - static_cast<double>(i) / n_ks));
    }
    const bool ks_ok = ks < 0.005;

    out.pass = norm_ok && mom_ok && ks_ok;
    detail << "max_|norm-1|=" << f6(worst_norm) << " max_|mean-z|=" << f6(worst_mean)
           << " sample_mean=" << f6(mean) << " sample_var=" << f6(var) << " ks=" << f6(ks);
    out.details = detail.str();
    out.seconds = timer.elapsed();
    return out;
}

CheckResult check_discrete_action_stationarity(const VerifyOptions& opt) {
    Timer timer;
    CheckResult out{"9_discrete_action_stationarity", true, "", 0.0};

    const QubitParams params{0.5, -0.5, 1.0};
    const BlochVector q_I{1.0, 0.0, 0.0};
    const CoState p0{0.3, -0.2, 0.5};
    const double T = 0.6;

    // Max |dS/d.| over all free variables of the discrete action evaluated at
    // the discretized extremal path. Each variable touches at most two terms
    // of the sum, so the centered difference is taken on those terms only.
    auto max_gradient = [&](double dt_grid) {
        const auto path = mlp::integrate_path(q_I, p0, T, dt_grid, params);
        const std::size_t n = path.times.size() - 1;
        const double dt = path.times[1] - path.times[0];

        std::vector<BlochVector> q(n + 1);
        std::vector<CoState> p(n);
        std::vector<Readout> r(n);
        for (std::size_t k = 0; k <= n; ++k) q[k] = path.states[k].q;
        for (std::size_t k = 0; k < n; ++k) {
            p[k] = path.states[k].p;
            r[k] = path.readouts[k];
        }

        auto term = [&](std::size_t k) {
            const BlochVector defect = q[k + 1] - q[k] - dt * drift(q[k], r[k], params);
            return -dot(p[k], defect) + dt * functional_f(q[k], r[k], params.tau);
        };
        auto local_sum = [&](std::size_t k_lo, std::size_t k_hi) {
            double s = 0.0;
            for (std::size_t k = k_lo; k <= k_hi && k < n; ++k) s += term(k);
            return s;
        };
        auto fd = [&](double& var, std::size_t k_lo, std::size_t k_hi) {
            const double h = 1e-5 * std::max(1.0, std::abs(var));
            const double keep = var;
            var = keep + h;
            const double plus = local_sum(k_lo, k_hi);
            var = keep - h;
            const double minus = local_sum(k_lo, k_hi);
            var = keep;
            return (plus - minus) / (2.0 * h);
        };

        double worst = 0.0;
        for (std::size_t k = 1; k < n; ++k) {  // interior states; q_0, q_n are boundary data
            const std::size_t lo = k - 1;
            worst = std::max(worst, std::abs(fd(q[k].x, lo, k)));
            worst = std::max(worst, std::abs(fd(q[k].y, lo, k)));
            worst = std::max(worst, std::abs(fd(q[k].z, lo, k)));
        }
        for (std::size_t k = 0; k < n; ++k) {
            worst = std::max(worst, std::abs(fd(p[k].px, k, k)));
            worst = std::max(worst, std::abs(fd(p[k].py, k, k)));
            worst = std::max(worst, std::abs(fd(p[k].pz, k, k)));
            worst = std::max(worst, std::abs(fd(r[k], k, k)));
        }
        return worst;
    };

    const double grids[3] = {1e-2, 1e-3, 1e-4};
    double g[3];
    for (int i = 0; i < 3; ++i) g[i] = max_gradient(grids[i]);

    // Least-squares slope of log g against log dt.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < 3; ++i) {
        const double x = std::log(grids[i]), y = std::log(g[i]);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    const double slope = (3.0 * sxy - sx * sy) / (3.0 * sxx - sx * sx);

    out.pass = slope >= 0.9 && g[2] < g[1] && g[1] < g[0];
    out.details = "max_grad=[" + f6(g[0]) + "," + f6(g[1]) + "," + f6(g[2]) +
                  "] fitted_order=" + f6(slope);
    out.seconds = timer.elapsed();
    (void)opt;
    return out;
}

std::vector<CheckResult> run_verify(const VerifyOptions& opt) {
    std::vector<CheckResult> results;
    if (opt.full) results.push_back(check_fig1_median_vs_mlp(opt));
    results.push_back(check_qnd_shoot_equivalence(opt));
    results.push_back(check_energy_conservation(opt));
    results.push_back(check_qnd_action_identity(opt));
    results.push_back(check_zeno_closed_forms(opt));
    results.push_back(check_instanton_asymptotics(opt));
    if (opt.full) results.push_back(check_switching_rate(opt));
    results.push_back(check_distributional(opt));
    results.push_back(check_discrete_action_stationarity(opt));
    return results;
}

}  // namespace verify
}  // namespace qpath
