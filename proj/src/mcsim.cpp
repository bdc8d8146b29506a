#include "qpath/mcsim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace qpath {
namespace mcsim {

namespace {

unsigned resolve_threads(unsigned threads) {
    if (threads != 0) return threads;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

// Parallel loop over [0, n) with deterministic work: body(i) must not depend
// on execution order.
template <typename Body>
void parallel_for(std::uint64_t n, unsigned threads, Body&& body) {
    threads = resolve_threads(threads);
    if (threads <= 1 || n < 2) {
        for (std::uint64_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::uint64_t> next{0};
    auto worker = [&] {
        constexpr std::uint64_t chunk = 64;
        for (;;) {
            const std::uint64_t begin = next.fetch_add(chunk);
            if (begin >= n) return;
            const std::uint64_t end = std::min(begin + chunk, n);
            for (std::uint64_t i = begin; i < end; ++i) body(i);
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t + 1 < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
}

}  // namespace

Readout sample_readout(const BlochVector& q, double dt, double tau, RngStream& rng) {
    const double w_plus = std::clamp((1.0 + q.z) / 2.0, 0.0, 1.0);
    const double mean = rng.uniform() < w_plus ? 1.0 : -1.0;
    return mean + std::sqrt(tau / dt) * rng.gaussian();
}

BlochVector update_state_exact(const BlochVector& q, Readout r, double dt,
                               const QubitParams& params) {
    // Measurement: M rho M^dag / tr, with M ~ diag(e^{g/2}, e^{-g/2}),
    // g = r dt / tau. In Bloch form: z' = (z + tanh g)/(1 + z tanh g),
    // (x', y') = (x, y) sech g / (1 + z tanh g).
    const double g = r * dt / params.tau;
    const double t = std::tanh(g);
    const double denom = 1.0 + q.z * t;
    BlochVector m;
    if (denom <= 0.0) {
        // Only reachable for |z| = 1 with the opposite weight exactly zero.
        if (std::abs(q.z) == 1.0) {
            m = {0.0, 0.0, q.z};
        } else {
            throw std::runtime_error("update_state_exact: trace denominator underflow");
        }
    } else {
        const double sech = 1.0 / std::cosh(g);
        m = {q.x * sech / denom, q.y * sech / denom, (q.z + t) / denom};
    }

    // Unitary: rotation by |omega| dt about (-delta, 0, epsilon)/|omega|.
    const double wx = -params.delta, wz = params.epsilon;
    const double w = std::sqrt(wx * wx + wz * wz);
    if (w == 0.0) return m;
    const double ux = wx / w, uz = wz / w;
    const double angle = w * dt;
    const double c = std::cos(angle), s = std::sin(angle);
    const BlochVector cross{-uz * m.y, uz * m.x - ux * m.z, ux * m.y};
    const double udot = ux * m.x + uz * m.z;
    return {m.x * c + cross.x * s + ux * udot * (1.0 - c),
            m.y * c + cross.y * s,
            m.z * c + cross.z * s + uz * udot * (1.0 - c)};
}

TrajectoryRecord simulate_trajectory(const BlochVector& q_I, const SimConfig& config,
                                     const QubitParams& params, std::uint64_t traj_index,
                                     std::int64_t store_every) {
    if (store_every < 1) throw std::invalid_argument("simulate_trajectory: store_every >= 1");
    const std::int64_t n = config.n_steps();
    RngStream rng(config.seed, traj_index);

    TrajectoryRecord rec;
    const bool thin = store_every > 1;
    const std::int64_t n_stored = thin ? n / store_every + 1 : n + 1;
    rec.times.reserve(n_stored + 1);
    rec.states.reserve(n_stored + 1);
    rec.readouts.reserve(thin ? 0 : n);

    BlochVector q = q_I;
    rec.times.push_back(0.0);
    rec.states.push_back(q);
    for (std::int64_t k = 0; k < n; ++k) {
        const Readout r = sample_readout(q, config.dt, params.tau, rng);
        q = update_state_exact(q, r, config.dt, params);
        if (!thin) rec.readouts.push_back(r);
        if (!thin || (k + 1) % store_every == 0 || k + 1 == n) {
            rec.times.push_back((k + 1) * config.dt);
            rec.states.push_back(q);
        }
    }
    return rec;
}

BlochVector simulate_final_state(const BlochVector& q_I, const SimConfig& config,
                                 const QubitParams& params, std::uint64_t traj_index) {
    const std::int64_t n = config.n_steps();
    RngStream rng(config.seed, traj_index);
    BlochVector q = q_I;
    for (std::int64_t k = 0; k < n; ++k) {
        const Readout r = sample_readout(q, config.dt, params.tau, rng);
        q = update_state_exact(q, r, config.dt, params);
    }
    return q;
}

Ensemble generate_ensemble(const BlochVector& q_I, const SimConfig& config,
                           const QubitParams& params, unsigned threads,
                           std::int64_t store_every) {
    params.validate();
    config.validate(params);
    if (!q_I.is_valid()) throw std::invalid_argument("generate_ensemble: invalid q_I");

    Ensemble ens{config, params, q_I, {}};
    ens.trajectories.resize(static_cast<std::size_t>(config.n_traj));
    parallel_for(static_cast<std::uint64_t>(config.n_traj), threads, [&](std::uint64_t i) {
        ens.trajectories[i] = simulate_trajectory(q_I, config, params, i, store_every);
    });
    return ens;
}

std::vector<std::size_t> postselect_indices(const Ensemble& ensemble, const BlochVector& q_F,
                                            double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("postselect: lambda must be > 0");
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < ensemble.trajectories.size(); ++i) {
        if (distance(ensemble.trajectories[i].states.back(), q_F) <= lambda) keep.push_back(i);
    }
    return keep;
}

Ensemble postselect(const Ensemble& ensemble, const BlochVector& q_F, double lambda) {
    Ensemble out{ensemble.config, ensemble.params, ensemble.q_initial, {}};
    for (std::size_t i : postselect_indices(ensemble, q_F, lambda))
        out.trajectories.push_back(ensemble.trajectories[i]);
    return out;
}

double percentile_interpolated(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw std::invalid_argument("percentile of empty sample");
    const double n = static_cast<double>(sorted.size());
    double h = p * (n + 1.0) - 1.0;
    h = std::clamp(h, 0.0, n - 1.0);
    const std::size_t lo = static_cast<std::size_t>(h);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

MedianPath median_path(const Ensemble& subset) {
    const std::size_t m = subset.trajectories.size();
    if (m == 0) throw std::invalid_argument("median_path: empty ensemble");
    const std::size_t n_pts = subset.trajectories.front().times.size();
    for (const auto& t : subset.trajectories)
        if (t.times.size() != n_pts || t.readouts.size() + 1 != n_pts)
            throw std::invalid_argument("median_path: trajectories on different grids");

    MedianPath out;
    out.times = subset.trajectories.front().times;
    out.n_selected = static_cast<std::int64_t>(m);
    out.median.resize(n_pts);
    out.p40.resize(n_pts);
    out.p60.resize(n_pts);
    out.median_readout.resize(n_pts - 1);

    std::vector<double> buf(m);
    auto coord_percentiles = [&](std::size_t k, auto getter, double& q40, double& q50,
                                 double& q60) {
        for (std::size_t i = 0; i < m; ++i) buf[i] = getter(subset.trajectories[i], k);
        std::sort(buf.begin(), buf.end());
        q40 = percentile_interpolated(buf, 0.40);
        q50 = percentile_interpolated(buf, 0.50);
        q60 = percentile_interpolated(buf, 0.60);
    };

    for (std::size_t k = 0; k < n_pts; ++k) {
        coord_percentiles(k, [](const TrajectoryRecord& t, std::size_t j) { return t.states[j].x; },
                          out.p40[k].x, out.median[k].x, out.p60[k].x);
        coord_percentiles(k, [](const TrajectoryRecord& t, std::size_t j) { return t.states[j].y; },
                          out.p40[k].y, out.median[k].y, out.p60[k].y);
        coord_percentiles(k, [](const TrajectoryRecord& t, std::size_t j) { return t.states[j].z; },
                          out.p40[k].z, out.median[k].z, out.p60[k].z);
        if (k + 1 < n_pts) {
            double dummy40, dummy60;
            coord_percentiles(k, [](const TrajectoryRecord& t, std::size_t j) { return t.readouts[j]; },
                              dummy40, out.median_readout[k], dummy60);
        }
    }
    return out;
}

PostselectedRun collect_postselected(const BlochVector& q_I, const BlochVector& q_F,
                                     const SimConfig& config, const QubitParams& params,
                                     std::uint64_t target_selected, std::uint64_t raw_cap,
                                     unsigned threads) {
    params.validate();
    config.validate(params);
    if (target_selected == 0) throw std::invalid_argument("collect_postselected: target = 0");

    PostselectedRun run;
    run.selected.config = config;
    run.selected.params = params;
    run.selected.q_initial = q_I;

    const std::uint64_t batch = std::max<std::uint64_t>(4096, target_selected);
    std::uint64_t next_index = 0;
    while (run.selected_indices.size() < target_selected && next_index < raw_cap) {
        const std::uint64_t n_batch = std::min(batch, raw_cap - next_index);
        std::vector<std::uint8_t> hit(n_batch, 0);
        parallel_for(n_batch, threads, [&](std::uint64_t i) {
            const BlochVector qf = simulate_final_state(q_I, config, params, next_index + i);
            hit[i] = distance(qf, q_F) <= config.lambda ? 1 : 0;
        });
        for (std::uint64_t i = 0; i < n_batch; ++i) {
            if (hit[i] && run.selected_indices.size() < target_selected)
                run.selected_indices.push_back(next_index + i);
        }
        next_index += n_batch;
        if (run.selected_indices.size() >= target_selected) break;
    }
    run.raw_used = next_index;
    run.reached_target = run.selected_indices.size() >= target_selected;

    // Replay the winners with full storage; streams are index-keyed, so the
    // replayed paths are bit-identical to the scan pass.
    run.selected.trajectories.resize(run.selected_indices.size());
    parallel_for(run.selected_indices.size(), threads, [&](std::uint64_t i) {
        run.selected.trajectories[i] =
            simulate_trajectory(q_I, config, params, run.selected_indices[i]);
    });
    return run;
}

}  // namespace mcsim
}  // namespace qpath
