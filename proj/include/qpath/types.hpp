#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace qpath {

// Numeric slack allowed on the Bloch-norm invariant |q|^2 <= 1.
inline constexpr double kDefaultBlochSlack = 1e-9;

/// Physical constants of the monitored qubit: energy asymmetry epsilon,
/// tunneling strength delta (both 1/time) and the characteristic
/// measurement time tau. hbar = 1 throughout.
struct QubitParams {
    double epsilon = 0.0;
    double delta = 0.0;
    double tau = 1.0;

    /// Same physics expressed in units of tau (tau = 1, rates scaled).
    QubitParams canonical() const { return {epsilon * tau, delta * tau, 1.0}; }

    void validate() const {
        if (!(tau > 0.0)) throw std::invalid_argument("QubitParams: tau must be > 0");
        if (!std::isfinite(epsilon) || !std::isfinite(delta) || !std::isfinite(tau))
            throw std::invalid_argument("QubitParams: non-finite parameter");
    }
};

/// Qubit state coordinates (x, y, z); |q| = 1 is a pure state.
struct BlochVector {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    double norm2() const { return x * x + y * y + z * z; }
    double norm() const { return std::sqrt(norm2()); }

    bool is_valid(double slack = kDefaultBlochSlack) const {
        return std::isfinite(x) && std::isfinite(y) && std::isfinite(z) &&
               norm2() <= 1.0 + slack;
    }

    BlochVector& operator+=(const BlochVector& o) {
        x += o.x; y += o.y; z += o.z;
        return *this;
    }
    BlochVector& operator-=(const BlochVector& o) {
        x -= o.x; y -= o.y; z -= o.z;
        return *this;
    }
    BlochVector& operator*=(double s) {
        x *= s; y *= s; z *= s;
        return *this;
    }
};

inline BlochVector operator+(BlochVector a, const BlochVector& b) { return a += b; }
inline BlochVector operator-(BlochVector a, const BlochVector& b) { return a -= b; }
inline BlochVector operator*(double s, BlochVector a) { return a *= s; }
inline double dot(const BlochVector& a, const BlochVector& b) {
    return a.x * b.x + a.y * b.y + a.z * b.z;
}
inline double distance(const BlochVector& a, const BlochVector& b) { return (a - b).norm(); }

/// Conjugate momenta (p_x, p_y, p_z); unbounded.
struct CoState {
    double px = 0.0;
    double py = 0.0;
    double pz = 0.0;

    double norm() const { return std::sqrt(px * px + py * py + pz * pz); }

    CoState& operator+=(const CoState& o) {
        px += o.px; py += o.py; pz += o.pz;
        return *this;
    }
    CoState& operator*=(double s) {
        px *= s; py *= s; pz *= s;
        return *this;
    }
};

inline CoState operator+(CoState a, const CoState& b) { return a += b; }
inline CoState operator*(double s, CoState a) { return a *= s; }
inline double dot(const CoState& p, const BlochVector& v) {
    return p.px * v.x + p.py * v.y + p.pz * v.z;
}

/// Unitless detector output for one time bin.
using Readout = double;

/// Point in the doubled state space.
struct PhaseState {
    BlochVector q;
    CoState p;
};

/// Monte Carlo run settings.
struct SimConfig {
    double dt = 0.01;
    double horizon = 0.6;
    std::int64_t n_traj = 1000;
    double lambda = 0.02;      // postselection tolerance
    std::uint64_t seed = 1;

    std::int64_t n_steps() const {
        return static_cast<std::int64_t>(std::llround(horizon / dt));
    }

    /// Throws on invariant violations; returns human-readable warnings.
    std::vector<std::string> validate(const QubitParams& params) const {
        if (!(dt > 0.0) || !(dt < horizon))
            throw std::invalid_argument("SimConfig: require 0 < dt < horizon");
        if (n_traj <= 0) throw std::invalid_argument("SimConfig: n_traj must be positive");
        if (!(lambda > 0.0)) throw std::invalid_argument("SimConfig: lambda must be > 0");
        std::vector<std::string> warnings;
        if (dt / params.tau > 0.1)
            warnings.push_back("dt/tau = " + std::to_string(dt / params.tau) +
                               " > 0.1; discretization error may be large");
        return warnings;
    }
};

/// One stochastic realization: n+1 states on a uniform grid and the n
/// readouts that produced them. Replayable by construction.
struct TrajectoryRecord {
    std::vector<double> times;          // n+1 entries
    std::vector<BlochVector> states;    // n+1 entries
    std::vector<Readout> readouts;      // n entries

    std::size_t n_steps() const { return readouts.size(); }

    void validate_shape() const {
        if (times.size() != states.size() || times.size() != readouts.size() + 1)
            throw std::invalid_argument("TrajectoryRecord: inconsistent array lengths");
    }

    double dt() const {
        if (times.size() < 2) throw std::invalid_argument("TrajectoryRecord: too short");
        return times[1] - times[0];
    }
};

}  // namespace qpath
