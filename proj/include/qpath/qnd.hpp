#pragma once

#include <utility>
#include <vector>

#include "qpath/types.hpp"

namespace qpath {
namespace qnd {

/// Constant optimal readout fixed by the z boundary values:
/// r_bar = (tau/T) atanh((z_I - z_F)/(z_I z_F - 1)). Requires |z| < 1.
Readout qnd_readout(double z_I, double z_F, double horizon, double tau);

/// Closed-form most-likely path for delta = 0: rotation by epsilon t in the
/// x-y plane and hyperbolic z motion, with common denominator
/// cosh(r t/tau) + z_I sinh(r t/tau).
BlochVector qnd_path(const BlochVector& q_I, Readout r_bar, double epsilon, double tau,
                     double t);

/// Conjugate momenta along the QND path. (p_xI, p_yI) are the free constants
/// of the degenerate family; p_z follows from the readout constraint.
CoState qnd_momenta(double p_xI, double p_yI, const BlochVector& q_I, Readout r_bar,
                    double epsilon, double tau, double t);

/// Optimized action S = -(T/2tau)(r_bar^2 + 1) + ln[(1-z_I^2)/(1-z_F^2)]/2.
double qnd_action(double z_I, double z_F, double horizon, double tau);

/// exp(qnd_action) tabulated over a z_F grid (all grid points in (-1, 1)).
std::vector<std::pair<double, double>> final_state_profile(double z_I, double horizon,
                                                           double tau,
                                                           const std::vector<double>& z_F_grid);

/// Final state consistent with the closed form: q_F = qnd_path(q_I, r_bar, T).
/// Convenience for constructing solvable QND boundary problems.
BlochVector boundary_state(const BlochVector& q_I, double z_F, double horizon,
                           double epsilon, double tau);

}  // namespace qnd
}  // namespace qpath
