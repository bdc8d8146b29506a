#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qpath/core.hpp"
#include "qpath/mlp.hpp"
#include "qpath/qnd.hpp"
#include "qpath/rng.hpp"

using namespace qpath;
using namespace qpath::mlp;

TEST_CASE("optimal readout: substitution cases") {
    CHECK(optimal_readout({{0.3, -0.4, 0.6}, {0, 0, 0}}) == doctest::Approx(0.6));
    CHECK(optimal_readout({{0, 0, 0}, {0, 0, 1}}) == doctest::Approx(1.0));
    CHECK(optimal_readout({{1, 0, 0}, {1, 0, 0}}) == doctest::Approx(0.0));
}

TEST_CASE("ode_rhs: eigenstate pins the state; the full fixed point needs p_z = 1/2") {
    const QubitParams P{0.0, 0.0, 1.0};
    // With p = 0 the state is frozen but the momentum is not: the p_z
    // equation reads (2 p_z z - 1) r / tau = -1 here.
    const PhaseState rate0 = ode_rhs({{0, 0, 1}, {0, 0, 0}}, P);
    CHECK(rate0.q.x == 0.0);
    CHECK(rate0.q.y == 0.0);
    CHECK(rate0.q.z == 0.0);
    CHECK(rate0.p.px == 0.0);
    CHECK(rate0.p.py == 0.0);
    CHECK(rate0.p.pz == doctest::Approx(-1.0));
    // The stationary point of the whole phase-space flow at the pole.
    const PhaseState rate_fp = ode_rhs({{0, 0, 1}, {0, 0, 0.5}}, P);
    CHECK(rate_fp.q.x == 0.0);
    CHECK(rate_fp.q.y == 0.0);
    CHECK(rate_fp.q.z == 0.0);
    CHECK(rate_fp.p.px == 0.0);
    CHECK(rate_fp.p.py == 0.0);
    CHECK(rate_fp.p.pz == doctest::Approx(0.0));
}

TEST_CASE("ode_rhs: q equations coincide with the conditional drift") {
    RngStream rng(21, 0);
    for (int i = 0; i < 100; ++i) {
        const PhaseState s{{-1 + 2 * rng.uniform(), -1 + 2 * rng.uniform(), -1 + 2 * rng.uniform()},
                           {-2 + 4 * rng.uniform(), -2 + 4 * rng.uniform(), -2 + 4 * rng.uniform()}};
        const QubitParams P{-1 + 2 * rng.uniform(), -1 + 2 * rng.uniform(), 0.5 + rng.uniform()};
        const PhaseState rate = ode_rhs(s, P);
        const BlochVector L = drift(s.q, optimal_readout(s), P);
        CHECK(rate.q.x == doctest::Approx(L.x).epsilon(1e-15));
        CHECK(rate.q.y == doctest::Approx(L.y).epsilon(1e-15));
        CHECK(rate.q.z == doctest::Approx(L.z).epsilon(1e-15));
    }
}

TEST_CASE("ode_rhs: momentum cannot remain zero away from z = 0") {
    const QubitParams P{0.0, 0.0, 1.0};
    const PhaseState rate = ode_rhs({{0, 0, 0.5}, {0, 0, 0}}, P);
    // r = z and pdot_z = -r/tau: the p = 0 plane is not invariant.
    CHECK(rate.p.pz == doctest::Approx(-0.5));
}

TEST_CASE("ode_rhs has canonical structure w.r.t. the eliminated Hamiltonian") {
    // H~(q, p) = H(q, p, r*(q, p)); by the envelope theorem its centered
    // differences must match +dH/dp = qdot and -dH/dq = pdot.
    RngStream rng(22, 0);
    auto reduced = [](const PhaseState& s, const QubitParams& P) {
        return stochastic_hamiltonian(s.q, s.p, optimal_readout(s), P);
    };
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        PhaseState s{{-0.8 + 1.6 * rng.uniform(), -0.8 + 1.6 * rng.uniform(),
                      -0.8 + 1.6 * rng.uniform()},
                     {-2 + 4 * rng.uniform(), -2 + 4 * rng.uniform(), -2 + 4 * rng.uniform()}};
        const QubitParams P{-1 + 2 * rng.uniform(), -1 + 2 * rng.uniform(), 1.0};
        const PhaseState rate = ode_rhs(s, P);
        const double h = 1e-5;
        double* qc[3] = {&s.q.x, &s.q.y, &s.q.z};
        double* pc[3] = {&s.p.px, &s.p.py, &s.p.pz};
        const double qrate[3] = {rate.q.x, rate.q.y, rate.q.z};
        const double prate[3] = {rate.p.px, rate.p.py, rate.p.pz};
        for (int c = 0; c < 3; ++c) {
            const double keep_p = *pc[c];
            *pc[c] = keep_p + h;
            const double hp = reduced(s, P);
            *pc[c] = keep_p - h;
            const double hm = reduced(s, P);
            *pc[c] = keep_p;
            worst = std::max(worst, std::abs((hp - hm) / (2 * h) - qrate[c]) /
                                        std::max(1.0, std::abs(qrate[c])));
            const double keep_q = *qc[c];
            *qc[c] = keep_q + h;
            const double gp = reduced(s, P);
            *qc[c] = keep_q - h;
            const double gm = reduced(s, P);
            *qc[c] = keep_q;
            worst = std::max(worst, std::abs(-(gp - gm) / (2 * h) - prate[c]) /
                                        std::max(1.0, std::abs(prate[c])));
        }
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("integrate_path conserves the stochastic energy") {
    const QubitParams P{0.5, -0.5, 1.0};
    const auto path = integrate_path({1, 0, 0}, {0.3, -0.2, 0.5}, 0.6, 1e-3, P);
    double drift_max = 0.0;
    for (double e : path.energies) drift_max = std::max(drift_max, std::abs(e - path.energy));
    CHECK(drift_max < 1e-8);
    // The constraint holds identically at stored points.
    for (std::size_t k = 0; k < path.states.size(); ++k)
        CHECK(std::abs(path.readouts[k] - optimal_readout(path.states[k])) < 1e-12);
}

TEST_CASE("integrate_path: energy drift falls at least 8x per step halving") {
    const QubitParams P{0.7, -0.4, 1.0};
    auto max_drift = [&](double dt) {
        const auto path = integrate_path({0.6, 0.2, 0.5}, {0.8, -0.6, 1.2}, 0.6, dt, P);
        double m = 0.0;
        for (double e : path.energies) m = std::max(m, std::abs(e - path.energy));
        return m;
    };
    const double d1 = max_drift(0.02), d2 = max_drift(0.01);
    REQUIRE(d1 > 1e-13);  // above roundoff so the ratio is meaningful
    CHECK(d1 / d2 >= 8.0);
}

TEST_CASE("integrate_path: divergence guard aborts runaway momenta") {
    const QubitParams P{0.0, 0.0, 1.0};
    CHECK_THROWS_AS(integrate_path({0, 0, 0.5}, {0, 0, 100.0}, 1.0, 1e-3, P),
                    IntegrationDiverged);
}

TEST_CASE("shoot: round trip recovers a known extremal") {
    const QubitParams P{0.3, 0.4, 1.0};
    const BlochVector q_I{0.3, -0.2, 0.5};
    const CoState p_star{0.2, -0.1, 0.3};
    const double T = 0.5;
    const auto forward = integrate_path(q_I, p_star, T, 1e-3, P);
    const BlochVector q_F = forward.states.back().q;

    const auto result = shoot(q_I, q_F, T, P);
    REQUIRE(result.converged);
    CHECK(result.path.residual <= 1e-8);
    double best = 1e300;
    for (const auto& b : result.branches) best = std::min(best, std::abs(b.action - forward.action));
    CHECK(best < 1e-6);
}

TEST_CASE("shoot: demolition-regime boundary problem converges") {
    // Fig. 1b-style data with the target on the pure-state sphere.
    const QubitParams P{0.0, -0.5, 1.0};
    const BlochVector q_F{0.9 / 1.029563014098700, 0.0, 0.5 / 1.029563014098700};
    const auto result = shoot({1, 0, 0}, q_F, 0.6, P);
    REQUIRE(result.converged);
    CHECK(result.path.residual <= 1e-8);
    double drift_max = 0.0;
    for (double e : result.path.energies)
        drift_max = std::max(drift_max, std::abs(e - result.path.energy));
    CHECK(drift_max < 1e-6);
}

TEST_CASE("shoot: QND problems match the closed form (quick oracle)") {
    RngStream rng(23, 0);
    for (int trial = 0; trial < 10; ++trial) {
        const double z_I = -0.8 + 1.6 * rng.uniform();
        const double z_F = -0.8 + 1.6 * rng.uniform();
        const double phi = 2 * M_PI * rng.uniform();
        const double rho = 0.9 * std::sqrt(1 - z_I * z_I);
        const BlochVector q_I{rho * std::cos(phi), rho * std::sin(phi), z_I};
        const QubitParams P{-0.8 + 1.6 * rng.uniform(), 0.0, 1.0};
        const double T = 0.4 + 0.4 * rng.uniform();
        const Readout r_bar = qnd::qnd_readout(z_I, z_F, T, 1.0);
        const BlochVector q_F = qnd::qnd_path(q_I, r_bar, P.epsilon, 1.0, T);

        ShootOptions opt;
        opt.tolerance = 1e-10;
        const auto result = shoot(q_I, q_F, T, P, opt);
        REQUIRE(result.converged);
        CHECK(std::abs(result.path.readouts.front() - r_bar) < 1e-8);
        double worst = 0.0;
        for (std::size_t k = 0; k < result.path.times.size(); ++k) {
            const BlochVector ref = qnd::qnd_path(q_I, r_bar, P.epsilon, 1.0, result.path.times[k]);
            worst = std::max(worst, distance(result.path.states[k].q, ref));
        }
        CHECK(worst < 1e-6);
    }
}

TEST_CASE("shoot: returning to the start over a short horizon costs little") {
    const QubitParams P{0.4, -0.3, 1.0};
    const BlochVector q{0.5, -0.1, 0.3};
    const auto result = shoot(q, q, 0.05, P);
    REQUIRE(result.converged);
    CHECK(result.path.residual <= 1e-8);
    CHECK(std::abs(result.path.action) < 0.05);
}

TEST_CASE("shoot rejects invalid boundary states") {
    const QubitParams P{0.0, -0.5, 1.0};
    CHECK_THROWS_AS(shoot({1, 0, 0}, {0.9, 0.0, 0.5}, 0.6, P), std::invalid_argument);
}

namespace {

// Max |dS/d.| of the discrete action over all free variables at the
// discretized extremal path, by centered differences on the touched terms.
double discrete_stationarity_gradient(double dt_grid) {
    const QubitParams P{0.5, -0.5, 1.0};
    const auto path = integrate_path({1, 0, 0}, {0.3, -0.2, 0.5}, 0.6, dt_grid, P);
    const std::size_t n = path.times.size() - 1;
    const double dt = path.times[1] - path.times[0];
    std::vector<BlochVector> q(n + 1);
    std::vector<CoState> p(n);
    std::vector<Readout> r(n);
    for (std::size_t k = 0; k <= n; ++k) q[k] = path.states[k].q;
    for (std::size_t k = 0; k < n; ++k) {
        p[k] = path.states[k].p;
        r[k] = path.readouts[k];
    }
    auto term = [&](std::size_t k) {
        const BlochVector defect = q[k + 1] - q[k] - dt * drift(q[k], r[k], P);
        return -dot(p[k], defect) + dt * functional_f(q[k], r[k], P.tau);
    };
    auto fd = [&](double& var, std::size_t lo, std::size_t hi) {
        const double h = 1e-5 * std::max(1.0, std::abs(var));
        const double keep = var;
        double plus = 0.0, minus = 0.0;
        var = keep + h;
        for (std::size_t k = lo; k <= hi && k < n; ++k) plus += term(k);
        var = keep - h;
        for (std::size_t k = lo; k <= hi && k < n; ++k) minus += term(k);
        var = keep;
        return (plus - minus) / (2 * h);
    };
    double worst = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
        worst = std::max(worst, std::abs(fd(q[k].x, k - 1, k)));
        worst = std::max(worst, std::abs(fd(q[k].y, k - 1, k)));
        worst = std::max(worst, std::abs(fd(q[k].z, k - 1, k)));
    }
    for (std::size_t k = 0; k < n; ++k) {
        worst = std::max(worst, std::abs(fd(p[k].px, k, k)));
        worst = std::max(worst, std::abs(fd(p[k].py, k, k)));
        worst = std::max(worst, std::abs(fd(p[k].pz, k, k)));
        worst = std::max(worst, std::abs(fd(r[k], k, k)));
    }
    return worst;
}

}  // namespace

TEST_CASE("discrete action is stationary at the MLP, gradient at least first order") {
    const double g1 = discrete_stationarity_gradient(1e-2);
    const double g2 = discrete_stationarity_gradient(1e-3);
    CHECK(g2 < g1 / 10.0);
}

TEST_CASE("localized finite differences equal full-recompute differences") {
    const QubitParams P{0.5, -0.5, 1.0};
    const auto path = integrate_path({1, 0, 0}, {0.3, -0.2, 0.5}, 0.05, 1e-2, P);
    const std::size_t n = path.times.size() - 1;
    TrajectoryRecord traj;
    traj.times = path.times;
    std::vector<CoState> momenta(n);
    for (std::size_t k = 0; k <= n; ++k) traj.states.push_back(path.states[k].q);
    for (std::size_t k = 0; k < n; ++k) {
        traj.readouts.push_back(path.readouts[k]);
        momenta[k] = path.states[k].p;
    }
    // Full-recompute centered difference w.r.t. one interior coordinate...
    const double h = 1e-6;
    traj.states[2].z += h;
    const double sp = discrete_action(traj, momenta, P);
    traj.states[2].z -= 2 * h;
    const double sm = discrete_action(traj, momenta, P);
    traj.states[2].z += h;
    const double full_fd = (sp - sm) / (2 * h);
    // ...equals the sum of differences of the two touched terms.
    auto term = [&](std::size_t k) {
        const BlochVector defect =
            traj.states[k + 1] - traj.states[k] - 0.01 * drift(traj.states[k], traj.readouts[k], P);
        return -dot(momenta[k], defect) + 0.01 * functional_f(traj.states[k], traj.readouts[k], P.tau);
    };
    traj.states[2].z += h;
    const double lp = term(1) + term(2);
    traj.states[2].z -= 2 * h;
    const double lm = term(1) + term(2);
    traj.states[2].z += h;
    const double local_fd = (lp - lm) / (2 * h);
    CHECK(full_fd == doctest::Approx(local_fd).epsilon(1e-9));
}

TEST_CASE("action quadrature is consistent with the discrete action to first order") {
    const QubitParams P{0.5, -0.5, 1.0};
    auto gap = [&](double dt_grid) {
        const auto path = integrate_path({1, 0, 0}, {0.3, -0.2, 0.5}, 0.6, dt_grid, P);
        const std::size_t n = path.times.size() - 1;
        TrajectoryRecord traj;
        traj.times = path.times;
        std::vector<CoState> momenta(n);
        for (std::size_t k = 0; k <= n; ++k) traj.states.push_back(path.states[k].q);
        for (std::size_t k = 0; k < n; ++k) {
            traj.readouts.push_back(path.readouts[k]);
            momenta[k] = path.states[k].p;
        }
        return std::abs(path.action - discrete_action(traj, momenta, P));
    };
    const double gap1 = gap(2e-3), gap2 = gap(1e-3);
    CHECK(gap1 / gap2 > 1.5);
    CHECK(gap1 / gap2 < 2.8);
}
