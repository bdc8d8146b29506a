#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "qpath/types.hpp"

namespace qpath {
namespace zeno {

/// Zeno-regime parameters: epsilon = 0 is fixed, delta > 0, pure states on
/// the great circle x = 0 parametrized by theta (z = cos theta, y = sin theta).
struct ZenoParams {
    double delta = 0.2;
    double tau = 1.0;

    void validate() const {
        if (!(tau > 0.0)) throw std::invalid_argument("ZenoParams: tau must be > 0");
        if (!(delta > 0.0)) throw std::invalid_argument("ZenoParams: delta must be > 0");
    }
};

struct QuadCoeffs {
    double a, b, c;
};

/// Coefficients of H = a p^2 + b p + c after eliminating r:
/// a = sin^2(theta)/2tau, b = delta - sin(theta)cos(theta)/tau, c = -a.
QuadCoeffs quad_coeffs(double theta, const ZenoParams& params);

enum class Branch { upper, lower };

/// theta_dot, p_theta_dot and the constrained readout r = cos - p sin.
struct ZenoRate {
    double theta_dot, p_dot, r;
};
ZenoRate zeno_rhs(double theta, double p_theta, const ZenoParams& params);

/// Root of a p^2 + b p + c = E on the requested branch, evaluated in the
/// cancellation-free form; degenerates to the linear root (E - c)/b when
/// a < 1e-14. Throws std::domain_error when the discriminant is negative.
double p_theta_of(double theta, double energy, Branch branch, const ZenoParams& params);

/// Discriminant b^2 - 4a(c - E); theta_dot on the upper/lower branch is
/// +-sqrt of this.
double discriminant(double theta, double energy, const ZenoParams& params);

enum class InstantonMode { exact, approx };

/// Zero-energy (instanton) momentum curve. exact: the continuous E = 0 root
/// that vanishes as theta -> 0+; approx: the small-delta-tau piecewise form
/// 0 for theta < delta tau, 2(theta - delta tau)/theta^2 above.
double instanton(double theta, const ZenoParams& params, InstantonMode mode);

/// T = int dtheta / theta_dot along one branch of the E-curve. Throws
/// QuadratureError when the path grazes a fixed point (sqrt(disc) -> 0
/// inside the interval).
double traversal_time(double theta_i, double theta_f, double energy, Branch branch,
                      const ZenoParams& params, double abs_tol = 1e-9);

/// S = -int p dtheta + E T along the same branch.
double path_action(double theta_i, double theta_f, double energy, Branch branch,
                   const ZenoParams& params, double abs_tol = 1e-9);

struct FixedPoint {
    double theta_s, p_theta_s, r_s;
};

/// Stationary point of the flow: (atan(delta tau), -delta tau,
/// sqrt(1 + delta^2 tau^2)); residuals checked on construction.
FixedPoint fixed_point(const ZenoParams& params);

/// E_c = -delta^2 tau / 2, the energy separating pole-to-pole paths from
/// returning ones (also H at the fixed point).
double critical_energy(const ZenoParams& params);

struct SwitchingRate {
    double gamma;             // delta^2 tau
    double attempt_rate;      // 1/tau
    double instanton_action;  // 2 ln(delta tau)
};

/// Asymptotic jump rate gamma = attempt_rate * exp(instanton_action).
SwitchingRate switching_rate(const ZenoParams& params);

struct EnergyCurve {
    double energy;
    Branch branch;
    std::vector<std::array<double, 2>> samples;  // (theta, p_theta); real-branch points only
};

EnergyCurve sample_energy_curve(double energy, Branch branch, const ZenoParams& params,
                                double theta_min, double theta_max, std::size_t n);

struct JumpRateCheck {
    double gamma_formula = 0.0;
    double gamma_empirical = 0.0;
    std::uint64_t n_jumps = 0;
    double total_time = 0.0;
};

/// Monte Carlo rate estimate: unconditioned pure-state trajectories at
/// epsilon = 0; a jump is a z = 0 crossing confirmed by the state staying
/// in the new hemisphere for the debounce window.
JumpRateCheck jump_rate_check(const ZenoParams& params, double dt, std::uint64_t n_traj,
                              double horizon_per_traj, double debounce,
                              std::uint64_t seed, unsigned threads = 0);

}  // namespace zeno
}  // namespace qpath
