#pragma once

#include "qpath/types.hpp"

namespace qpath {

/// Conditional drift L[q, r]: the master equation in Bloch coordinates for
/// a qubit with Hamiltonian (epsilon/2) sigma_3 - (delta/2) sigma_1 monitored
/// along sigma_3 with readout r.
inline BlochVector drift(const BlochVector& q, Readout r, const QubitParams& P) {
    const double rt = r / P.tau;
    return {-P.epsilon * q.y - q.x * q.z * rt,
            P.epsilon * q.x + P.delta * q.z - q.y * q.z * rt,
            -P.delta * q.y + (1.0 - q.z * q.z) * rt};
}

/// F[q, r] = -(r^2 - 2 r z + 1)/(2 tau): the delta-t coefficient of
/// ln P(r|q), with the measure constant dropped.
inline double functional_f(const BlochVector& q, Readout r, double tau) {
    return -(r * r - 2.0 * r * q.z + 1.0) / (2.0 * tau);
}

/// Stochastic Hamiltonian H = p . L[q, r] + F[q, r].
inline double stochastic_hamiltonian(const BlochVector& q, const CoState& p, Readout r,
                                     const QubitParams& P) {
    return dot(p, drift(q, r, P)) + functional_f(q, r, P.tau);
}

/// ln P(r | q) for one time bin of width dt: log of the two-Gaussian
/// mixture with weights (1 +- z)/2, means +-1, variance tau/dt. Stable for
/// any finite r; returns -inf only for the zero-weight component at z = +-1.
double readout_log_density(Readout r, const BlochVector& q, double dt, double tau);

/// Discrete stochastic action of a recorded trajectory with multipliers
/// {p_k}: sum_k [ -p_k . (q_{k+1} - q_k - dt L[q_k, r_k]) + dt F[q_k, r_k] ],
/// boundary terms omitted.
double discrete_action(const TrajectoryRecord& traj, const std::vector<CoState>& momenta,
                       const QubitParams& params);

}  // namespace qpath
