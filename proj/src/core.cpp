#include "qpath/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qpath {

double readout_log_density(Readout r, const BlochVector& q, double dt, double tau) {
    if (!(dt > 0.0) || !(tau > 0.0))
        throw std::invalid_argument("readout_log_density: dt and tau must be > 0");
    const double z = std::clamp(q.z, -1.0, 1.0);
    const double c = dt / (2.0 * tau);
    const double wp = (1.0 + z) / 2.0;
    const double wm = (1.0 - z) / 2.0;
    // log-sum-exp over the two mixture components; a zero weight contributes -inf.
    const double inf = std::numeric_limits<double>::infinity();
    const double lp = wp > 0.0 ? std::log(wp) - c * (r - 1.0) * (r - 1.0) : -inf;
    const double lm = wm > 0.0 ? std::log(wm) - c * (r + 1.0) * (r + 1.0) : -inf;
    const double hi = std::max(lp, lm);
    if (hi == -inf) return -inf;
    const double lo = std::min(lp, lm);
    const double lse = hi + std::log1p(std::exp(lo - hi));
    return 0.5 * std::log(dt / (2.0 * M_PI * tau)) + lse;
}

double discrete_action(const TrajectoryRecord& traj, const std::vector<CoState>& momenta,
                       const QubitParams& params) {
    traj.validate_shape();
    if (momenta.size() != traj.n_steps())
        throw std::invalid_argument("discrete_action: need one momentum per step");
    const double dt = traj.dt();
    double action = 0.0;
    for (std::size_t k = 0; k < traj.n_steps(); ++k) {
        const BlochVector& qk = traj.states[k];
        const Readout rk = traj.readouts[k];
        const BlochVector defect = traj.states[k + 1] - qk - dt * drift(qk, rk, params);
        action += -dot(momenta[k], defect) + dt * functional_f(qk, rk, params.tau);
    }
    return action;
}

}  // namespace qpath
