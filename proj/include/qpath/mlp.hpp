#pragma once

#include <stdexcept>
#include <vector>

#include "qpath/core.hpp"
#include "qpath/types.hpp"

namespace qpath {
namespace mlp {

/// The readout constraint r = z + p_z (1 - z^2) - p_x x z - p_y y z
/// obtained from dH/dr = 0.
inline Readout optimal_readout(const PhaseState& s) {
    const auto& [q, p] = s;
    return q.z + p.pz * (1.0 - q.z * q.z) - p.px * q.x * q.z - p.py * q.y * q.z;
}

/// Right-hand side of the 3+3 extremal ODEs with r eliminated through the
/// constraint.
inline PhaseState ode_rhs(const PhaseState& s, const QubitParams& P) {
    const Readout r = optimal_readout(s);
    const auto& [q, p] = s;
    const double rt = r / P.tau;
    PhaseState d;
    d.q = drift(q, r, P);
    d.p = {-P.epsilon * p.py + p.px * q.z * rt,
           P.epsilon * p.px + P.delta * p.pz + p.py * q.z * rt,
           -P.delta * p.py + (p.px * q.x + p.py * q.y + 2.0 * p.pz * q.z - 1.0) * rt};
    return d;
}

struct IntegrationDiverged : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A solved extremal path. energy is H at t = 0 (conserved along the path);
/// action is S = int (-p.qdot + H) dt accumulated by the integrator.
struct MostLikelyPath {
    std::vector<double> times;
    std::vector<PhaseState> states;
    std::vector<Readout> readouts;   // optimal readout at the stored points
    std::vector<double> energies;    // H at the stored points
    double energy = 0.0;
    double action = 0.0;
    double residual = 0.0;           // |q(T) - q_F| when produced by shoot
    CoState p0;
};

/// Fixed-step RK4 integration of the extremal system from (q_I, p0); the
/// action integrand (which reduces to F[q, r] on-shell) is carried as an
/// extra state component so it shares the integrator's order. Throws
/// IntegrationDiverged when any component exceeds 1e12.
MostLikelyPath integrate_path(const BlochVector& q_I, const CoState& p0, double horizon,
                              double dt, const QubitParams& params,
                              std::int64_t store_every = 1);

struct ShootOptions {
    double tolerance = 1e-8;     // target |q(T) - q_F|
    double dt = 0.0;             // integrator step; 0 -> 1e-3 * tau
    double fd_step = 1e-6;       // relative finite-difference step for the Jacobian
    int max_iterations = 120;
    int max_halvings = 40;
    double grid_halfwidth = 2.0; // multi-start lattice extent
    double guard = 1e12;
    unsigned threads = 0;        // 0 -> hardware concurrency
    int max_starts = 0;          // 0 -> full grid (zero vector + 26 lattice points)
    bool least_squares = false;  // accept a gradient-stationary best-approach point;
                                 // also admits targets outside the Bloch ball
    std::vector<CoState> extra_starts;
};

struct ShootBranch {
    CoState p0;
    double action = 0.0;
    double energy = 0.0;
    double residual = 0.0;
    int start_index = -1;
};

struct ShootResult {
    bool converged = false;
    MostLikelyPath path;              // best branch (largest action among converged)
    std::vector<ShootBranch> branches;
    double best_residual = 0.0;
};

/// Two-point boundary-value solve by single shooting over p0: damped
/// Gauss-Newton with Levenberg-Marquardt regularization (the plain Newton
/// Jacobian is exactly singular in the QND case, where q(T) depends on p0
/// only through r(0)) and a finite-difference Jacobian. Multi-start over
/// the origin plus a 3^3-1 lattice in [-w, w]^3; among converged starts the
/// branch with the largest action wins, ties broken by start index.
ShootResult shoot(const BlochVector& q_I, const BlochVector& q_F, double horizon,
                  const QubitParams& params, const ShootOptions& options = {});

}  // namespace mlp
}  // namespace qpath
