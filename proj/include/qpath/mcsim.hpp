#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qpath/rng.hpp"
#include "qpath/types.hpp"

namespace qpath {
namespace mcsim {

/// Draw one readout from P(r | q): pick the mixture component with weight
/// (1 + z)/2 for mean +1 (else mean -1), then a Gaussian with variance tau/dt.
Readout sample_readout(const BlochVector& q, double dt, double tau, RngStream& rng);

/// Exact normalized single-step update: Gaussian measurement operator in the
/// sigma_3 basis followed by the Hamiltonian rotation about (-delta, 0, epsilon).
/// Closed form for 2x2 density matrices; scalar prefactors cancel.
BlochVector update_state_exact(const BlochVector& q, Readout r, double dt,
                               const QubitParams& params);

/// One stochastic trajectory from q_I over config.horizon with step config.dt,
/// RNG stream derived from (config.seed, traj_index). store_every thins the
/// stored grid; the final state is always exact and always stored.
TrajectoryRecord simulate_trajectory(const BlochVector& q_I, const SimConfig& config,
                                     const QubitParams& params, std::uint64_t traj_index,
                                     std::int64_t store_every = 1);

/// Final state only; identical stream and arithmetic as simulate_trajectory.
BlochVector simulate_final_state(const BlochVector& q_I, const SimConfig& config,
                                 const QubitParams& params, std::uint64_t traj_index);

struct Ensemble {
    SimConfig config;
    QubitParams params;
    BlochVector q_initial;
    std::vector<TrajectoryRecord> trajectories;
};

/// Generate config.n_traj independent trajectories. Results are bit-identical
/// for any thread count (per-index RNG streams, order-independent assembly).
Ensemble generate_ensemble(const BlochVector& q_I, const SimConfig& config,
                           const QubitParams& params, unsigned threads = 0,
                           std::int64_t store_every = 1);

std::vector<std::size_t> postselect_indices(const Ensemble& ensemble, const BlochVector& q_F,
                                            double lambda);

/// Trajectories whose final state lies within the lambda-ball of q_F, in
/// original order. Empty selection is a valid result, not an error.
Ensemble postselect(const Ensemble& ensemble, const BlochVector& q_F, double lambda);

struct MedianPath {
    std::vector<double> times;
    std::vector<BlochVector> median;
    std::vector<BlochVector> p40;
    std::vector<BlochVector> p60;
    std::vector<Readout> median_readout;
    std::int64_t n_selected = 0;
};

/// Coordinate-wise median and 40th/60th percentile paths of a nonempty
/// ensemble. Percentile convention: linear interpolation between order
/// statistics at rank h = p(n+1) - 1, clamped to [0, n-1] (R-6).
MedianPath median_path(const Ensemble& subset);

/// Percentile of a sorted sample under the convention above; exposed for tests.
double percentile_interpolated(std::span<const double> sorted, double p);

struct PostselectedRun {
    Ensemble selected;                       // postselected trajectories, full paths
    std::vector<std::uint64_t> selected_indices;
    std::uint64_t raw_used = 0;              // trajectories simulated in total
    bool reached_target = false;
};

/// Stream raw trajectories (indices 0, 1, 2, ...) until target_selected of
/// them end inside the lambda-ball of q_F or raw_cap is exhausted. Selection
/// is decided on a cheap no-storage pass; selected indices are then replayed
/// with full storage, so memory scales with the selected count only.
PostselectedRun collect_postselected(const BlochVector& q_I, const BlochVector& q_F,
                                     const SimConfig& config, const QubitParams& params,
                                     std::uint64_t target_selected, std::uint64_t raw_cap,
                                     unsigned threads = 0);

}  // namespace mcsim
}  // namespace qpath
