#include "retrial/errors.hpp"
#include "retrial/laplace.hpp"
#include "retrial/measures.hpp"
#include "retrial/transient.hpp"
#include "support.hpp"

#include <doctest.h>

#include <sstream>

using namespace retrial;

TEST_CASE("uniformization at t = 0 is the identity") {
    const auto cfg = testing::small_config();
    const auto q = testing::generator_for(cfg);
    const auto p0 = testing::start_at_origin(cfg);
    CHECK(uniformize(q, p0, 0.0).values == p0.values);
    const auto grid = transient_grid(q, p0, {0.0});
    REQUIRE(grid.states.size() == 1);
    CHECK(grid.states[0].values == p0.values);
}

TEST_CASE("two-state closed form") {
    const auto q = testing::two_state_toy();
    const auto p = uniformize(q, point_mass(2, 0), 1.0, 1e-12);
    CHECK(std::abs(p[0] - (1.0 + std::exp(-2.0)) / 2.0) <= 1e-12);
    CHECK(std::abs(p[1] - (1.0 - std::exp(-2.0)) / 2.0) <= 1e-12);
    CHECK(p.provenance == Provenance::uniformization);
}

TEST_CASE("long horizon reaches the stationary distribution") {
    const auto cfg = testing::small_config();
    const auto q = testing::generator_for(cfg);
    const auto p = uniformize(q, testing::start_at_origin(cfg), 200.0);
    CHECK(testing::max_abs_diff(p.values, stationary_nullspace(q).values) <= 1e-6);
}

TEST_CASE("stepwise propagation equals a direct solve") {
    const auto cfg = testing::small_config();
    const auto q = testing::generator_for(cfg);
    const auto p0 = testing::start_at_origin(cfg);
    const double eps = 1e-10;
    const auto grid = transient_grid(q, p0, {0.5, 2.0, 5.0}, eps);
    const auto direct = uniformize(q, p0, 5.0, eps);
    CHECK(testing::max_abs_diff(grid.states[2].values, direct.values) <= 2 * eps);
}

TEST_CASE("semigroup property on the heterogeneous fixture") {
    auto cfg = testing::small_config();
    cfg.mode = ContactMode::heterogeneous;
    const auto g = ring_plus_hub(10);
    const auto q = testing::generator_for(cfg, &g);
    const auto p0 = testing::start_at_origin(cfg);
    const auto half = uniformize(q, p0, 1.5);
    const auto full = uniformize(q, half, 2.5);
    const auto direct = uniformize(q, p0, 4.0);
    CHECK(testing::max_abs_diff(full.values, direct.values) <= 1e-9);
}

TEST_CASE("invalid arguments") {
    const auto cfg = testing::small_config();
    const auto q = testing::generator_for(cfg);
    const auto p0 = testing::start_at_origin(cfg);
    CHECK_THROWS_AS(uniformize(q, p0, -1.0), DomainError);
    CHECK_THROWS_AS(uniformize(q, p0, 1.0, 1e-3), DomainError);
    CHECK_THROWS_AS(uniformize(q, point_mass(3, 0), 1.0), DomainError);
    CHECK_THROWS_AS(transient_grid(q, p0, {1.0, 1.0}), DomainError);
}

TEST_CASE("trajectory basics") {
    const auto cfg = testing::small_config();
    const auto rate = make_arrival_rate(cfg);
    for (std::uint64_t seed : {1u, 2u, 3u, 99u}) {
        const auto traj = simulate_gillespie(cfg, rate, 5.0, seed);
        REQUIRE(traj.events.size() >= 2);
        CHECK(traj.events[0].time == 0.0);
        CHECK(traj.events[0].state == State{0, 0});
        CHECK(traj.events[1].state == State{1, 0});
        for (std::size_t k = 1; k < traj.events.size(); ++k) {
            CHECK(traj.events[k].time > traj.events[k - 1].time);
            CHECK(traj.events[k].time <= 5.0);
            CHECK(is_stencil_move(cfg.space(), traj.events[k - 1].state, traj.events[k].state));
        }
    }
}

TEST_CASE("equal seeds give equal trajectories") {
    const auto cfg = testing::small_config();
    const auto rate = make_arrival_rate(cfg);
    const auto a = simulate_gillespie(cfg, rate, 10.0, 42);
    const auto b = simulate_gillespie(cfg, rate, 10.0, 42);
    const auto c = simulate_gillespie(cfg, rate, 10.0, 43);
    std::ostringstream sa, sb, sc;
    write_trajectory_csv(a, sa);
    write_trajectory_csv(b, sb);
    write_trajectory_csv(c, sc);
    CHECK(sa.str() == sb.str());
    CHECK(sa.str() != sc.str());
    CHECK(sa.str().rfind("time,i,j\n", 0) == 0);
}

TEST_CASE("holding time at the origin is exponential with mean 1/5") {
    const auto cfg = testing::small_config();
    const auto rate = make_arrival_rate(cfg);
    const int samples = 100000;
    double sum = 0.0;
    double sum2 = 0.0;
    for (int r = 0; r < samples; ++r) {
        const auto traj = simulate_gillespie(cfg, rate, 5.0, static_cast<std::uint64_t>(r));
        const double h = traj.events.at(1).time;
        sum += h;
        sum2 += h * h;
    }
    const double mean = sum / samples;
    const double se = std::sqrt((sum2 / samples - mean * mean) / samples);
    CHECK(std::abs(mean - 0.2) <= 3 * se);
}

TEST_CASE("Monte Carlo estimate") {
    const auto cfg = testing::small_config();
    const auto rate = make_arrival_rate(cfg);

    SUBCASE("t = 0 is the initial point mass") {
        const auto est = monte_carlo_estimate(cfg, rate, {0.0, 1.0}, 2000, 7);
        CHECK(est.solution.states[0][0] == 1.0);
        for (const auto& p : est.solution.states)
            CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("deterministic for a seed") {
        const auto a = monte_carlo_estimate(cfg, rate, {1.0, 3.0}, 5000, 11);
        const auto b = monte_carlo_estimate(cfg, rate, {1.0, 3.0}, 5000, 11);
        for (std::size_t n = 0; n < 2; ++n)
            CHECK(a.solution.states[n].values == b.solution.states[n].values);
    }
    SUBCASE("consistent with uniformization at t = 2") {
        const auto est = monte_carlo_estimate(cfg, rate, {2.0}, 100000, 2024);
        const auto q = testing::generator_for(cfg);
        const auto exact = uniformize(q, testing::start_at_origin(cfg), 2.0);
        const StateSpace sp = cfg.space();
        CHECK(std::abs(est.mean_servers[0] - moment_recovering(sp, exact, 1)) <= 3 * est.mean_servers_se[0]);
        CHECK(std::abs(est.mean_orbit[0] - moment_orbit(sp, exact, 1)) <= 3 * est.mean_orbit_se[0]);
    }
    SUBCASE("too few replicas") {
        CHECK_THROWS_AS(monte_carlo_estimate(cfg, rate, {1.0}, 999, 1), DomainError);
    }
}
