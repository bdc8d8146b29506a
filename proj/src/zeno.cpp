#include "qpath/zeno.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "qpath/mcsim.hpp"
#include "qpath/quadrature.hpp"

namespace qpath {
namespace zeno {

QuadCoeffs quad_coeffs(double theta, const ZenoParams& params) {
    const double s = std::sin(theta), c = std::cos(theta);
    const double a = s * s / (2.0 * params.tau);
    return {a, params.delta - s * c / params.tau, -a};
}

ZenoRate zeno_rhs(double theta, double p_theta, const ZenoParams& params) {
    const double s = std::sin(theta), c = std::cos(theta);
    const double r = c - p_theta * s;
    return {params.delta - s * r / params.tau,
            p_theta * r * c / params.tau + r * s / params.tau, r};
}

double discriminant(double theta, double energy, const ZenoParams& params) {
    const auto [a, b, c] = quad_coeffs(theta, params);
    return b * b - 4.0 * a * (c - energy);
}

double p_theta_of(double theta, double energy, Branch branch, const ZenoParams& params) {
    const auto [a, b, c] = quad_coeffs(theta, params);
    if (a < 1e-14) {
        if (b == 0.0) throw std::domain_error("p_theta_of: degenerate quadratic (a = b = 0)");
        return (energy - c) / b;
    }
    const double disc = b * b - 4.0 * a * (c - energy);
    if (disc < 0.0)
        throw std::domain_error("p_theta_of: negative discriminant, no real branch at (theta, E)");
    // Cancellation-free root pair via the product identity p+ p- = (c-E)/a.
    const double sd = std::sqrt(disc);
    double upper, lower;
    if (b >= 0.0) {
        lower = (-b - sd) / (2.0 * a);
        upper = lower != 0.0 ? (c - energy) / (a * lower) : 0.0;
    } else {
        upper = (-b + sd) / (2.0 * a);
        lower = upper != 0.0 ? (c - energy) / (a * upper) : 0.0;
    }
    return branch == Branch::upper ? upper : lower;
}

double instanton(double theta, const ZenoParams& params, InstantonMode mode) {
    if (mode == InstantonMode::approx) {
        const double dt = params.delta * params.tau;
        return theta <= dt ? 0.0 : 2.0 * (theta - dt) / (theta * theta);
    }
    // The E = 0 upper root is continuous on (0, pi), vanishes at both ends
    // and is positive in between: sqrt(b^2 + 4a^2) > |b|.
    return p_theta_of(theta, 0.0, Branch::upper, params);
}

namespace {

// Interior points where the integrands become sharply peaked: zeros of
// b(theta) (near theta = delta*tau the E = 0 speed collapses to 2a) and the
// fixed point angle (sqrt(disc) -> 0 there as E -> E_c).
std::vector<double> quad_splits(const ZenoParams& params) {
    std::vector<double> splits;
    const double dt2 = 2.0 * params.delta * params.tau;
    if (dt2 < 1.0) {
        const double t1 = 0.5 * std::asin(dt2);
        splits.push_back(t1);
        splits.push_back(M_PI_2 - t1);
    }
    splits.push_back(std::atan(params.delta * params.tau));
    return splits;
}

double branch_speed(double theta, double energy, Branch branch, const ZenoParams& params) {
    const double disc = discriminant(theta, energy, params);
    const double sd = std::sqrt(std::max(disc, 0.0));
    return branch == Branch::upper ? sd : -sd;
}

}  // namespace

double traversal_time(double theta_i, double theta_f, double energy, Branch branch,
                      const ZenoParams& params, double abs_tol) {
    params.validate();
    auto f = [&](double theta) { return 1.0 / branch_speed(theta, energy, branch, params); };
    return integrate_or_throw(f, theta_i, theta_f, abs_tol, 1e-10, quad_splits(params));
}

double path_action(double theta_i, double theta_f, double energy, Branch branch,
                   const ZenoParams& params, double abs_tol) {
    params.validate();
    auto f = [&](double theta) { return -p_theta_of(theta, energy, branch, params); };
    double s = integrate_or_throw(f, theta_i, theta_f, abs_tol, 1e-10, quad_splits(params));
    if (energy != 0.0)
        s += energy * traversal_time(theta_i, theta_f, energy, branch, params, abs_tol);
    return s;
}

FixedPoint fixed_point(const ZenoParams& params) {
    params.validate();
    const double dt = params.delta * params.tau;
    const FixedPoint fp{std::atan(dt), -dt, std::sqrt(1.0 + dt * dt)};
    const ZenoRate rate = zeno_rhs(fp.theta_s, fp.p_theta_s, params);
    if (std::abs(rate.theta_dot) > 1e-9 * params.delta ||
        std::abs(rate.p_dot) > 1e-9 * params.delta)
        throw std::logic_error("fixed_point: stationarity residual check failed");
    return fp;
}

double critical_energy(const ZenoParams& params) {
    return -params.delta * params.delta * params.tau / 2.0;
}

SwitchingRate switching_rate(const ZenoParams& params) {
    params.validate();
    const double dt = params.delta * params.tau;
    return {params.delta * params.delta * params.tau, 1.0 / params.tau, 2.0 * std::log(dt)};
}

EnergyCurve sample_energy_curve(double energy, Branch branch, const ZenoParams& params,
                                double theta_min, double theta_max, std::size_t n) {
    if (n < 2 || !(theta_min < theta_max))
        throw std::invalid_argument("sample_energy_curve: need theta_min < theta_max, n >= 2");
    EnergyCurve curve{energy, branch, {}};
    curve.samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double theta =
            theta_min + (theta_max - theta_min) * static_cast<double>(i) / (n - 1);
        if (discriminant(theta, energy, params) < 0.0) continue;
        curve.samples.push_back({theta, p_theta_of(theta, energy, branch, params)});
    }
    return curve;
}

JumpRateCheck jump_rate_check(const ZenoParams& params, double dt, std::uint64_t n_traj,
                              double horizon_per_traj, double debounce,
                              std::uint64_t seed, unsigned threads) {
    params.validate();
    if (!(dt > 0.0) || !(horizon_per_traj > debounce) || n_traj == 0)
        throw std::invalid_argument("jump_rate_check: bad simulation window");

    const QubitParams qp{0.0, params.delta, params.tau};
    const std::int64_t n_steps = std::llround(horizon_per_traj / dt);
    const std::int64_t debounce_steps = std::llround(debounce / dt);

    std::vector<std::uint64_t> jumps(n_traj, 0);
    auto run_one = [&](std::uint64_t idx) {
        RngStream rng(seed, idx);
        BlochVector q{0.0, 0.0, 1.0};
        int confirmed = 1;
        std::int64_t opposite_run = 0;  // consecutive steps spent in the other hemisphere
        std::uint64_t count = 0;
        for (std::int64_t k = 0; k < n_steps; ++k) {
            const Readout r = mcsim::sample_readout(q, dt, params.tau, rng);
            q = mcsim::update_state_exact(q, r, dt, qp);
            const int hemi = q.z >= 0.0 ? 1 : -1;
            if (hemi == confirmed) {
                opposite_run = 0;
            } else if (++opposite_run >= debounce_steps) {
                confirmed = hemi;
                opposite_run = 0;
                ++count;
            }
        }
        jumps[idx] = count;
    };

    unsigned nthreads = threads != 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
    nthreads = static_cast<unsigned>(std::min<std::uint64_t>(nthreads, n_traj));
    std::atomic<std::uint64_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::uint64_t i = next.fetch_add(1);
            if (i >= n_traj) return;
            run_one(i);
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t + 1 < nthreads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    JumpRateCheck out;
    out.gamma_formula = switching_rate(params).gamma;
    out.total_time = static_cast<double>(n_traj) * n_steps * dt;
    for (std::uint64_t j : jumps) out.n_jumps += j;
    out.gamma_empirical = static_cast<double>(out.n_jumps) / out.total_time;
    return out;
}

}  // namespace zeno
}  // namespace qpath
