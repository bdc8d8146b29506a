#include "qpath/qnd.hpp"

#include <cmath>
#include <stdexcept>

namespace qpath {
namespace qnd {

namespace {
constexpr double kEdge = 1.0 - 1e-6;  // atanh / 1/(1-z^2) domain guard

void require_interior(double z, const char* name) {
    if (!(std::abs(z) < 1.0))
        throw std::domain_error(std::string(name) + " must satisfy |z| < 1");
}
}  // namespace

Readout qnd_readout(double z_I, double z_F, double horizon, double tau) {
    require_interior(z_I, "z_I");
    require_interior(z_F, "z_F");
    if (std::abs(z_I) > kEdge || std::abs(z_F) > kEdge)
        throw std::domain_error("qnd_readout: |z| too close to 1 for the atanh formula");
    if (!(horizon > 0.0)) throw std::invalid_argument("qnd_readout: horizon must be > 0");
    // + 0.0 normalizes the -0.0 produced by atanh at z_I = z_F.
    return tau / horizon * std::atanh((z_I - z_F) / (z_I * z_F - 1.0)) + 0.0;
}

BlochVector qnd_path(const BlochVector& q_I, Readout r_bar, double epsilon, double tau,
                     double t) {
    const double u = r_bar * t / tau;
    const double ch = std::cosh(u), sh = std::sinh(u);
    const double denom = ch + q_I.z * sh;
    const double c = std::cos(epsilon * t), s = std::sin(epsilon * t);
    return {(q_I.x * c - q_I.y * s) / denom,
            (q_I.y * c + q_I.x * s) / denom,
            (q_I.z * ch + sh) / denom};
}

CoState qnd_momenta(double p_xI, double p_yI, const BlochVector& q_I, Readout r_bar,
                    double epsilon, double tau, double t) {
    const double u = r_bar * t / tau;
    const double denom = std::cosh(u) + q_I.z * std::sinh(u);
    const double c = std::cos(epsilon * t), s = std::sin(epsilon * t);
    const BlochVector q = qnd_path(q_I, r_bar, epsilon, tau, t);
    if (std::abs(q.z) > kEdge)
        throw std::domain_error("qnd_momenta: |z(t)| too close to 1 for the p_z formula");
    CoState p;
    p.px = (p_xI * c - p_yI * s) * denom;
    p.py = (p_yI * c + p_xI * s) * denom;
    p.pz = (r_bar - q.z + p.px * q.x * q.z + p.py * q.y * q.z) / (1.0 - q.z * q.z);
    return p;
}

double qnd_action(double z_I, double z_F, double horizon, double tau) {
    const Readout r = qnd_readout(z_I, z_F, horizon, tau);
    return -horizon / (2.0 * tau) * (r * r + 1.0) +
           0.5 * std::log((1.0 - z_I * z_I) / (1.0 - z_F * z_F));
}

std::vector<std::pair<double, double>> final_state_profile(double z_I, double horizon,
                                                           double tau,
                                                           const std::vector<double>& z_F_grid) {
    std::vector<std::pair<double, double>> profile;
    profile.reserve(z_F_grid.size());
    for (double z_F : z_F_grid)
        profile.emplace_back(z_F, std::exp(qnd_action(z_I, z_F, horizon, tau)));
    return profile;
}

BlochVector boundary_state(const BlochVector& q_I, double z_F, double horizon,
                           double epsilon, double tau) {
    const Readout r = qnd_readout(q_I.z, z_F, horizon, tau);
    return qnd_path(q_I, r, epsilon, tau, horizon);
}

}  // namespace qnd
}  // namespace qpath
