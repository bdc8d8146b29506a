#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "qpath/core.hpp"
#include "qpath/mcsim.hpp"
#include "qpath/rng.hpp"

using namespace qpath;
using namespace qpath::mcsim;

TEST_CASE("sample_readout: degenerate mixture at z = 1") {
    RngStream rng(1, 0);
    const BlochVector q{0, 0, 1};
    const double dt = 0.01, tau = 1.0;
    double sum = 0.0, sum2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double r = sample_readout(q, dt, tau, rng);
        sum += r;
        sum2 += r * r;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    const double sigma2 = tau / dt;
    CHECK(std::abs(mean - 1.0) < 3.0 * std::sqrt(sigma2 / n));
    CHECK(std::abs(var - sigma2) < 0.02 * sigma2);
}

TEST_CASE("sample_readout: mixture moments at z = 0") {
    RngStream rng(2, 0);
    const BlochVector q{0, 0, 0};
    const double dt = 0.01, tau = 1.0;
    double sum = 0.0, sum2 = 0.0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) {
        const double r = sample_readout(q, dt, tau, rng);
        sum += r;
        sum2 += r * r;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(std::abs(mean) < 3.0 * std::sqrt(101.0 / n));
    CHECK(std::abs(var - 101.0) < 0.01 * 101.0);
}

TEST_CASE("sample_readout matches the analytic density (Kolmogorov-Smirnov)") {
    RngStream rng(3, 0);
    const double z = 0.5, dt = 0.01, tau = 1.0;
    const double sigma = std::sqrt(tau / dt);
    const int n = 100000;
    std::vector<double> s(n);
    for (auto& v : s) v = sample_readout({0, 0, z}, dt, tau, rng);
    std::sort(s.begin(), s.end());
    auto cdf = [&](double r) {
        auto phi = [&](double m) { return 0.5 * std::erfc(-(r - m) / (sigma * std::sqrt(2.0))); };
        return 0.75 * phi(1.0) + 0.25 * phi(-1.0);
    };
    double ks = 0.0;
    for (int i = 0; i < n; ++i) {
        const double f = cdf(s[i]);
        ks = std::max(ks, std::abs(f - (i + 1.0) / n));
        ks = std::max(ks, std::abs(f - static_cast<double>(i) / n));
    }
    CHECK(ks < 0.005);
}

TEST_CASE("update_state_exact: eigenstate is fixed, maximally mixed gives tanh") {
    const QubitParams P{0.0, 0.0, 1.0};
    for (double r : {-7.0, 0.3, 12.0}) {
        const BlochVector q = update_state_exact({0, 0, 1}, r, 0.05, P);
        CHECK(q.x == 0.0);
        CHECK(q.y == 0.0);
        CHECK(q.z == 1.0);
    }
    for (double r : {-4.0, 0.0, 2.5}) {
        const BlochVector q = update_state_exact({0, 0, 0}, r, 0.02, P);
        CHECK(q.z == doctest::Approx(std::tanh(r * 0.02)).epsilon(1e-15));
        CHECK(q.x == 0.0);
    }
}

TEST_CASE("update_state_exact preserves purity") {
    RngStream rng(4, 0);
    double worst = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const double z = -1.0 + 2.0 * rng.uniform();
        const double phi = 2.0 * M_PI * rng.uniform();
        const double rho = std::sqrt(1.0 - z * z);
        const BlochVector q{rho * std::cos(phi), rho * std::sin(phi), z};
        const QubitParams P{-1 + 2 * rng.uniform(), -1 + 2 * rng.uniform(), 1.0};
        const double r = -30.0 + 60.0 * rng.uniform();
        const BlochVector q2 = update_state_exact(q, r, 0.01, P);
        worst = std::max(worst, std::abs(q2.norm() - 1.0));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("update_state_exact agrees with the Euler drift step to second order") {
    RngStream rng(5, 0);
    const QubitParams P{0.4, -0.7, 1.0};
    double ratio_sum = 0.0;
    int count = 0;
    for (int i = 0; i < 50; ++i) {
        const BlochVector q{-0.5 + rng.uniform(), -0.5 + rng.uniform(), -0.5 + rng.uniform()};
        const double r = -2.0 + 4.0 * rng.uniform();
        auto err = [&](double dt) {
            const BlochVector exact = update_state_exact(q, r, dt, P);
            const BlochVector euler = q + dt * drift(q, r, P);
            return distance(exact, euler);
        };
        const double e1 = err(1e-2), e2 = err(1e-3);
        if (e1 > 1e-13 && e2 > 1e-14) {
            ratio_sum += e1 / e2;
            ++count;
        }
    }
    REQUIRE(count > 20);
    const double mean_ratio = ratio_sum / count;  // ~100 for a second-order defect
    CHECK(mean_ratio > 50.0);
    CHECK(mean_ratio < 200.0);
}

TEST_CASE("simulate_trajectory: eigenstate stays put without Hamiltonian") {
    SimConfig cfg;
    cfg.dt = 0.01;
    cfg.horizon = 0.5;
    cfg.seed = 5;
    const auto traj = simulate_trajectory({0, 0, 1}, cfg, {0.0, 0.0, 1.0}, 0);
    for (const auto& q : traj.states) {
        CHECK(q.x == 0.0);
        CHECK(q.z == 1.0);
    }
}

TEST_CASE("ensembles are bit-identical across thread counts and reruns") {
    SimConfig cfg;
    cfg.dt = 0.01;
    cfg.horizon = 0.3;
    cfg.n_traj = 64;
    cfg.seed = 77;
    const QubitParams P{0.5, -0.5, 1.0};
    const auto a = generate_ensemble({1, 0, 0}, cfg, P, 1);
    const auto b = generate_ensemble({1, 0, 0}, cfg, P, 3);
    REQUIRE(a.trajectories.size() == b.trajectories.size());
    for (std::size_t i = 0; i < a.trajectories.size(); ++i) {
        const auto& ta = a.trajectories[i];
        const auto& tb = b.trajectories[i];
        REQUIRE(ta.states.size() == tb.states.size());
        CHECK(std::memcmp(ta.states.data(), tb.states.data(),
                          ta.states.size() * sizeof(BlochVector)) == 0);
        CHECK(std::memcmp(ta.readouts.data(), tb.readouts.data(),
                          ta.readouts.size() * sizeof(double)) == 0);
    }
}

TEST_CASE("nonselective QND measurement is unbiased in z (martingale)") {
    SimConfig cfg;
    cfg.dt = 0.02;
    cfg.horizon = 0.5;
    cfg.n_traj = 100000;
    cfg.seed = 2024;
    const QubitParams P{0.0, 0.0, 1.0};
    const BlochVector q_I{0, 0, 0.2};
    const std::int64_t n = cfg.n_steps();
    std::vector<double> mean_z(n + 1, 0.0), var_z(n + 1, 0.0);
    for (std::int64_t i = 0; i < cfg.n_traj; ++i) {
        const auto traj = simulate_trajectory(q_I, cfg, P, static_cast<std::uint64_t>(i));
        for (std::int64_t k = 0; k <= n; ++k) {
            mean_z[k] += traj.states[k].z;
            var_z[k] += traj.states[k].z * traj.states[k].z;
        }
    }
    for (std::int64_t k = 0; k <= n; ++k) {
        mean_z[k] /= cfg.n_traj;
        var_z[k] = var_z[k] / cfg.n_traj - mean_z[k] * mean_z[k];
        const double se = std::sqrt(std::max(var_z[k], 1e-12) / cfg.n_traj);
        CHECK(std::abs(mean_z[k] - 0.2) <= std::max(4.0 * se, 1e-6));
    }
}

TEST_CASE("pure initial states stay pure along stored trajectories") {
    SimConfig cfg;
    cfg.dt = 0.01;
    cfg.horizon = 0.6;
    cfg.seed = 6;
    const QubitParams P{0.5, -0.5, 1.0};
    for (std::uint64_t i = 0; i < 50; ++i) {
        const auto traj = simulate_trajectory({1, 0, 0}, cfg, P, i);
        for (const auto& q : traj.states) CHECK(std::abs(q.norm() - 1.0) < 1e-9);
    }
}

TEST_CASE("postselect: covering ball selects everything, shrinking never grows") {
    SimConfig cfg;
    cfg.dt = 0.01;
    cfg.horizon = 0.2;
    cfg.n_traj = 200;
    cfg.seed = 8;
    const QubitParams P{0.5, 0.0, 1.0};
    const auto ens = generate_ensemble({1, 0, 0}, cfg, P);
    const BlochVector target{0.9, 0.1, 0.2};
    CHECK(postselect(ens, target, 2.0).trajectories.size() == 200);
    double lambda = 1.0;
    std::size_t prev = postselect(ens, target, lambda).trajectories.size();
    for (int i = 0; i < 6; ++i) {
        lambda /= 2.0;
        const std::size_t cur = postselect(ens, target, lambda).trajectories.size();
        CHECK(cur <= prev);
        prev = cur;
    }
    CHECK_THROWS_AS(postselect(ens, target, 0.0), std::invalid_argument);
}

TEST_CASE("percentile convention: linear interpolation at rank p(n+1)-1") {
    const std::vector<double> v{0.1, 0.2, 0.9};
    CHECK(percentile_interpolated(v, 0.50) == doctest::Approx(0.2));
    CHECK(percentile_interpolated(v, 0.40) == doctest::Approx(0.16));
    CHECK(percentile_interpolated(v, 0.60) == doctest::Approx(0.48));
    const std::vector<double> one{3.5};
    CHECK(percentile_interpolated(one, 0.40) == doctest::Approx(3.5));
}

namespace {

mcsim::Ensemble constant_ensemble(const std::vector<double>& zs) {
    mcsim::Ensemble ens;
    for (double z : zs) {
        TrajectoryRecord t;
        t.times = {0.0, 0.01};
        t.states = {{0, 0, z}, {0, 0, z}};
        t.readouts = {0.0};
        ens.trajectories.push_back(t);
    }
    return ens;
}

}  // namespace

TEST_CASE("median_path on constant trajectories reproduces the worked percentiles") {
    const auto ens = constant_ensemble({0.1, 0.2, 0.9});
    const auto med = median_path(ens);
    CHECK(med.n_selected == 3);
    CHECK(med.median[0].z == doctest::Approx(0.2));
    CHECK(med.p40[0].z == doctest::Approx(0.16));
    CHECK(med.p60[0].z == doctest::Approx(0.48));
}

TEST_CASE("median_path: singleton subset returns that trajectory, empty throws") {
    const auto one = constant_ensemble({0.37});
    const auto med = median_path(one);
    CHECK(med.median[0].z == doctest::Approx(0.37));
    CHECK(med.p40[1].z == doctest::Approx(0.37));
    mcsim::Ensemble empty;
    CHECK_THROWS_AS(median_path(empty), std::invalid_argument);
}

TEST_CASE("median_path: envelope ordering p40 <= median <= p60") {
    SimConfig cfg;
    cfg.dt = 0.01;
    cfg.horizon = 0.3;
    cfg.n_traj = 500;
    cfg.seed = 9;
    const QubitParams P{0.5, -0.5, 1.0};
    const auto ens = generate_ensemble({1, 0, 0}, cfg, P);
    const auto med = median_path(ens);
    for (std::size_t k = 0; k < med.times.size(); ++k) {
        CHECK(med.p40[k].x <= med.median[k].x);
        CHECK(med.median[k].x <= med.p60[k].x);
        CHECK(med.p40[k].z <= med.median[k].z);
        CHECK(med.median[k].z <= med.p60[k].z);
    }
}

TEST_CASE("thinned storage keeps the exact final state") {
    SimConfig cfg;
    cfg.dt = 0.01;
    cfg.horizon = 0.37;
    cfg.seed = 10;
    const QubitParams P{0.2, -0.4, 1.0};
    const auto full = simulate_trajectory({1, 0, 0}, cfg, P, 3, 1);
    const auto thin = simulate_trajectory({1, 0, 0}, cfg, P, 3, 5);
    CHECK(thin.states.back().x == full.states.back().x);
    CHECK(thin.states.back().y == full.states.back().y);
    CHECK(thin.states.back().z == full.states.back().z);
    CHECK(thin.states.size() < full.states.size());
    CHECK(thin.times.back() == full.times.back());
}

TEST_CASE("collect_postselected: streaming selection matches brute force") {
    SimConfig cfg;
    cfg.dt = 0.01;
    cfg.horizon = 0.2;
    cfg.n_traj = 400;
    cfg.seed = 11;
    cfg.lambda = 0.35;
    const QubitParams P{0.5, 0.0, 1.0};
    const BlochVector q_I{1, 0, 0};
    const BlochVector q_F{0.95, 0.1, 0.1};

    const auto ens = generate_ensemble(q_I, cfg, P);
    const auto brute = postselect_indices(ens, q_F, cfg.lambda);
    REQUIRE(brute.size() >= 3);

    const auto run = collect_postselected(q_I, q_F, cfg, P, 3, 400, 2);
    REQUIRE(run.reached_target);
    REQUIRE(run.selected_indices.size() == 3);
    for (int i = 0; i < 3; ++i) CHECK(run.selected_indices[i] == brute[i]);
    // Replayed paths end inside the ball.
    for (const auto& t : run.selected.trajectories)
        CHECK(distance(t.states.back(), q_F) <= cfg.lambda);
}

TEST_CASE("collect_postselected: graceful failure at the raw cap") {
    SimConfig cfg;
    cfg.dt = 0.01;
    cfg.horizon = 0.2;
    cfg.seed = 12;
    cfg.lambda = 1e-9;
    const auto run = collect_postselected({1, 0, 0}, {0, 0, -1}, cfg, {0.5, 0.0, 1.0}, 5, 300);
    CHECK(!run.reached_target);
    CHECK(run.raw_used == 300);
    CHECK(run.selected.trajectories.empty());
}
