#include "qpath/mlp.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>
#include <cstdio>
#include <cstdlib>

namespace qpath {
namespace mlp {

namespace {

// Phase state plus the running action integral; on-shell the integrand
// -p.qdot + H collapses to F[q, r].
struct AugState {
    PhaseState s;
    double action = 0.0;
};

AugState axpy(const AugState& a, double h, const AugState& d) {
    AugState out;
    out.s.q = a.s.q + h * d.s.q;
    out.s.p = a.s.p + h * d.s.p;
    out.action = a.action + h * d.action;
    return out;
}

AugState rhs(const AugState& a, const QubitParams& P) {
    AugState d;
    d.s = ode_rhs(a.s, P);
    d.action = functional_f(a.s.q, optimal_readout(a.s), P.tau);
    return d;
}

bool exceeds_guard(const AugState& a, double guard) {
    return std::abs(a.s.q.x) > guard || std::abs(a.s.q.y) > guard ||
           std::abs(a.s.q.z) > guard || std::abs(a.s.p.px) > guard ||
           std::abs(a.s.p.py) > guard || std::abs(a.s.p.pz) > guard ||
           std::abs(a.action) > guard || !std::isfinite(a.action) ||
           !std::isfinite(a.s.q.x) || !std::isfinite(a.s.p.px) ||
           !std::isfinite(a.s.p.py) || !std::isfinite(a.s.p.pz);
}

AugState rk4_step(const AugState& a, double h, const QubitParams& P) {
    const AugState k1 = rhs(a, P);
    const AugState k2 = rhs(axpy(a, 0.5 * h, k1), P);
    const AugState k3 = rhs(axpy(a, 0.5 * h, k2), P);
    const AugState k4 = rhs(axpy(a, h, k3), P);
    AugState out = a;
    out.s.q = a.s.q + (h / 6.0) * (k1.s.q + 2.0 * k2.s.q + 2.0 * k3.s.q + k4.s.q);
    out.s.p = a.s.p + (h / 6.0) * (k1.s.p + 2.0 * k2.s.p + 2.0 * k3.s.p + k4.s.p);
    out.action += (h / 6.0) * (k1.action + 2.0 * k2.action + 2.0 * k3.action + k4.action);
    return out;
}

struct FinalPoint {
    BlochVector q_T;
    double action = 0.0;
    bool diverged = false;
};

FinalPoint propagate(const BlochVector& q_I, const CoState& p0, double horizon, double dt,
                     const QubitParams& P, double guard) {
    const std::int64_t n = std::max<std::int64_t>(1, std::llround(horizon / dt));
    const double h = horizon / static_cast<double>(n);
    AugState a{{q_I, p0}, 0.0};
    for (std::int64_t k = 0; k < n; ++k) {
        a = rk4_step(a, h, P);
        if (exceeds_guard(a, guard)) return {a.s.q, a.action, true};
    }
    return {a.s.q, a.action, false};
}

// Solve the 3x3 system A x = b by Gaussian elimination with partial
// pivoting; returns false when a pivot degenerates.
bool solve3(std::array<std::array<double, 3>, 3> A, std::array<double, 3> b,
            std::array<double, 3>& x) {
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
        if (std::abs(A[piv][col]) < 1e-300) return false;
        std::swap(A[piv], A[col]);
        std::swap(b[piv], b[col]);
        for (int r = col + 1; r < 3; ++r) {
            const double f = A[r][col] / A[col][col];
            for (int c = col; c < 3; ++c) A[r][c] -= f * A[col][c];
            b[r] -= f * b[col];
        }
    }
    for (int r = 2; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < 3; ++c) s -= A[r][c] * x[c];
        x[r] = s / A[r][r];
    }
    return std::isfinite(x[0]) && std::isfinite(x[1]) && std::isfinite(x[2]);
}

struct StartOutcome {
    bool valid = false;        // produced any finite trajectory
    bool hit_tolerance = false;
    bool stationary = false;   // gradient-stationary least-squares point
    CoState p0;
    double residual = std::numeric_limits<double>::infinity();
    double action = 0.0;
};

StartOutcome run_start(const BlochVector& q_I, const BlochVector& q_F, double horizon,
                       double dt, const QubitParams& P, const ShootOptions& opt,
                       CoState p0) {
    auto eval = [&](const CoState& p) {
        return propagate(q_I, p, horizon, dt, P, opt.guard);
    };

    StartOutcome out;
    FinalPoint cur = eval(p0);
    if (cur.diverged) return out;
    out.valid = true;
    BlochVector phi = cur.q_T - q_F;
    double res = phi.norm();
    double mu = 0.0;
    const bool trace = std::getenv("QPATH_SHOOT_TRACE") != nullptr;

    for (int iter = 0; iter < opt.max_iterations; ++iter) {
        if (res <= opt.tolerance) break;

        // Central-difference Jacobian of q(T) w.r.t. p0, column per component.
        // The map is ill-conditioned over short horizons (every momentum
        // component acts through the scalar readout at leading order), so the
        // late iterations need the O(h^2) accuracy.
        std::array<std::array<double, 3>, 3> J{};
        bool fd_ok = true;
        const double comps[3] = {p0.px, p0.py, p0.pz};
        for (int j = 0; j < 3 && fd_ok; ++j) {
            const double h = opt.fd_step * std::max(1.0, std::abs(comps[j]));
            CoState pp = p0, pm = p0;
            (j == 0 ? pp.px : j == 1 ? pp.py : pp.pz) += h;
            (j == 0 ? pm.px : j == 1 ? pm.py : pm.pz) -= h;
            const FinalPoint fplus = eval(pp);
            const FinalPoint fminus = eval(pm);
            if (fplus.diverged || fminus.diverged) {
                fd_ok = false;
                break;
            }
            const BlochVector dq = fplus.q_T - fminus.q_T;
            J[0][j] = dq.x / (2.0 * h);
            J[1][j] = dq.y / (2.0 * h);
            J[2][j] = dq.z / (2.0 * h);
        }
        if (!fd_ok) break;

        // Normal equations with Levenberg-Marquardt damping.
        std::array<std::array<double, 3>, 3> JtJ{};
        std::array<double, 3> g{};
        const double phi_arr[3] = {phi.x, phi.y, phi.z};
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b)
                for (int r = 0; r < 3; ++r) JtJ[a][b] += J[r][a] * J[r][b];
            for (int r = 0; r < 3; ++r) g[a] += J[r][a] * phi_arr[r];
        }
        const double diag_scale =
            std::max({JtJ[0][0], JtJ[1][1], JtJ[2][2], 1e-30});
        if (mu == 0.0) mu = 1e-3 * diag_scale;

        // Least-squares stationarity: the descent direction has decayed to the
        // finite-difference noise floor relative to the residual itself.
        const double grad_norm = std::max({std::abs(g[0]), std::abs(g[1]), std::abs(g[2])});
        if (grad_norm <= std::max(1e-18, 1e-7 * res)) {
            out.stationary = true;
            break;
        }

        bool accepted = false;
        for (int attempt = 0; attempt < opt.max_halvings; ++attempt) {
            auto A = JtJ;
            for (int d = 0; d < 3; ++d) A[d][d] += mu;
            std::array<double, 3> step{};
            std::array<double, 3> negg{-g[0], -g[1], -g[2]};
            if (!solve3(A, negg, step)) {
                mu *= 10.0;
                continue;
            }
            const CoState trial{p0.px + step[0], p0.py + step[1], p0.pz + step[2]};
            const FinalPoint fp = eval(trial);
            if (!fp.diverged) {
                const BlochVector phi_t = fp.q_T - q_F;
                const double res_t = phi_t.norm();
                if (res_t < res) {
                    p0 = trial;
                    cur = fp;
                    phi = phi_t;
                    res = res_t;
                    mu = std::max(mu * 0.25, 1e-14 * diag_scale);
                    accepted = true;
                    break;
                }
            }
            mu *= 10.0;
            const double step_norm =
                std::max({std::abs(step[0]), std::abs(step[1]), std::abs(step[2])});
            if (step_norm < 1e-15 * (1.0 + p0.norm())) break;
        }
        if (trace)
            std::fprintf(stderr, "  iter %d: res=%.3e mu=%.3e grad=%.3e accepted=%d\n", iter,
                         res, mu, grad_norm, accepted ? 1 : 0);
        if (!accepted) {
            out.stationary = true;  // no descent direction left at this scale
            break;
        }
    }

    out.p0 = p0;
    out.residual = res;
    out.action = cur.action;
    out.hit_tolerance = res <= opt.tolerance;
    return out;
}

}  // namespace

MostLikelyPath integrate_path(const BlochVector& q_I, const CoState& p0, double horizon,
                              double dt, const QubitParams& params,
                              std::int64_t store_every) {
    params.validate();
    if (!(dt > 0.0) || !(horizon > 0.0))
        throw std::invalid_argument("integrate_path: dt and horizon must be > 0");
    if (store_every < 1) throw std::invalid_argument("integrate_path: store_every >= 1");

    const std::int64_t n = std::max<std::int64_t>(1, std::llround(horizon / dt));
    const double h = horizon / static_cast<double>(n);

    MostLikelyPath path;
    path.p0 = p0;
    AugState a{{q_I, p0}, 0.0};
    auto record = [&](std::int64_t k) {
        path.times.push_back(k * h);
        path.states.push_back(a.s);
        path.readouts.push_back(optimal_readout(a.s));
        path.energies.push_back(stochastic_hamiltonian(a.s.q, a.s.p, path.readouts.back(), params));
    };
    record(0);
    for (std::int64_t k = 0; k < n; ++k) {
        a = rk4_step(a, h, params);
        if (exceeds_guard(a, 1e12))
            throw IntegrationDiverged("integrate_path: component exceeded 1e12 at t = " +
                                      std::to_string((k + 1) * h));
        if ((k + 1) % store_every == 0 || k + 1 == n) record(k + 1);
    }
    path.energy = path.energies.front();
    path.action = a.action;
    return path;
}

ShootResult shoot(const BlochVector& q_I, const BlochVector& q_F, double horizon,
                  const QubitParams& params, const ShootOptions& options) {
    params.validate();
    if (!q_I.is_valid())
        throw std::invalid_argument("shoot: initial state must lie in the Bloch ball");
    // A least-squares run treats q_F as a reference point to approach, so it
    // may lie off the state space; an exact solve requires a valid state.
    if (!options.least_squares && !q_F.is_valid())
        throw std::invalid_argument("shoot: boundary states must lie in the Bloch ball");
    if (!std::isfinite(q_F.x) || !std::isfinite(q_F.y) || !std::isfinite(q_F.z))
        throw std::invalid_argument("shoot: target must be finite");
    if (!(horizon > 0.0)) throw std::invalid_argument("shoot: horizon must be > 0");

    const double dt = options.dt > 0.0 ? options.dt : 1e-3 * params.tau;

    std::vector<CoState> starts{{0.0, 0.0, 0.0}};
    const double w = options.grid_halfwidth;
    for (double px : {-w, 0.0, w})
        for (double py : {-w, 0.0, w})
            for (double pz : {-w, 0.0, w}) {
                if (px == 0.0 && py == 0.0 && pz == 0.0) continue;
                starts.push_back({px, py, pz});
            }
    starts.insert(starts.end(), options.extra_starts.begin(), options.extra_starts.end());
    if (options.max_starts > 0 && static_cast<std::size_t>(options.max_starts) < starts.size())
        starts.resize(options.max_starts);

    std::vector<StartOutcome> outcomes(starts.size());
    {
        unsigned threads = options.threads != 0 ? options.threads
                                                : std::max(1u, std::thread::hardware_concurrency());
        threads = std::min<std::size_t>(threads, starts.size());
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= starts.size()) return;
                outcomes[i] = run_start(q_I, q_F, horizon, dt, params, options, starts[i]);
            }
        };
        std::vector<std::thread> pool;
        for (unsigned t = 0; t + 1 < threads; ++t) pool.emplace_back(worker);
        worker();
        for (auto& t : pool) t.join();
    }

    ShootResult result;
    result.best_residual = std::numeric_limits<double>::infinity();
    int winner = -1;
    int fallback = -1;  // best least-squares stationary point
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const StartOutcome& oc = outcomes[i];
        if (!oc.valid) continue;
        result.best_residual = std::min(result.best_residual, oc.residual);
        if (oc.hit_tolerance) {
            // Deduplicate converged branches by (action, energy) proximity.
            const double e0 = stochastic_hamiltonian(
                q_I, oc.p0, optimal_readout({q_I, oc.p0}), params);
            bool dup = false;
            for (const ShootBranch& b : result.branches)
                if (std::abs(b.action - oc.action) <= 1e-7 * std::max(1.0, std::abs(b.action)) &&
                    std::abs(b.energy - e0) <= 1e-7 * std::max(1.0, std::abs(b.energy)))
                    dup = true;
            if (!dup)
                result.branches.push_back(
                    {oc.p0, oc.action, e0, oc.residual, static_cast<int>(i)});
            if (winner < 0 || oc.action > outcomes[winner].action + 1e-12)
                winner = static_cast<int>(i);
        } else if (oc.stationary) {
            if (fallback < 0 || oc.residual < outcomes[fallback].residual)
                fallback = static_cast<int>(i);
        }
    }

    int chosen = winner;
    if (chosen < 0 && options.least_squares) chosen = fallback;
    if (chosen >= 0) {
        const StartOutcome& oc = outcomes[chosen];
        result.path = integrate_path(q_I, oc.p0, horizon, dt, params);
        result.path.residual = distance(result.path.states.back().q, q_F);
        result.converged = winner >= 0;
    }
    return result;
}

}  // namespace mlp
}  // namespace qpath
