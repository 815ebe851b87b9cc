#include "retrial/errors.hpp"
#include "retrial/model.hpp"

#include <doctest.h>

#include <set>

using namespace retrial;

TEST_CASE("state index follows the row-major formula") {
    const StateSpace sp(10, 5);
    CHECK(state_index(sp, {0, 0}) == 0);
    CHECK(state_index(sp, {1, 0}) == 6);
    CHECK(state_index(sp, {5, 5}) == 35);
    CHECK(sp.size() == 36);
}

TEST_CASE("state index rejects states outside the space") {
    const StateSpace sp(10, 5);
    CHECK_THROWS_AS(state_index(sp, {6, 0}), DomainError);
    CHECK_THROWS_AS(state_index(sp, {0, 6}), DomainError);
    CHECK_THROWS_AS(state_index(sp, {-1, 0}), DomainError);
    CHECK_THROWS_AS(state_at(sp, 36), DomainError);
}

TEST_CASE("invalid space dimensions throw") {
    CHECK_THROWS_AS(StateSpace(5, 5), DomainError);
    CHECK_THROWS_AS(StateSpace(5, 0), DomainError);
}

TEST_CASE("enumeration order and size") {
    const auto small = enumerate_states(StateSpace(2, 1));
    REQUIRE(small.size() == 4);
    CHECK(small[0] == State{0, 0});
    CHECK(small[1] == State{0, 1});
    CHECK(small[2] == State{1, 0});
    CHECK(small[3] == State{1, 1});
    CHECK(enumerate_states(StateSpace(10, 5)).size() == 36);
    CHECK(enumerate_states(StateSpace(20, 15)).size() == 96);
}

TEST_CASE("index is a bijection over the config matrix") {
    for (int n : {2, 3, 10, 20, 40})
        for (int c = 1; c < n; ++c) {
            const StateSpace sp(n, c);
            const auto states = enumerate_states(sp);
            REQUIRE(states.size() == static_cast<std::size_t>((c + 1) * (n - c + 1)));
            for (std::size_t k = 0; k < states.size(); ++k) {
                CHECK(state_index(sp, states[k]) == k);
                CHECK(state_at(sp, k) == states[k]);
            }
        }
}

TEST_CASE("degrees on small graphs") {
    ContactGraph path(3);
    path.add_edge(0, 1);
    path.add_edge(1, 2);
    CHECK(degree(path, 1) == 2);
    CHECK(degree(path, 0) == 1);

    ContactGraph star(10);
    for (int v = 1; v < 10; ++v)
        star.add_edge(0, v);
    CHECK(degree(star, 0) == 9);
    CHECK_THROWS_AS(degree(star, 10), DomainError);
}

TEST_CASE("homogeneous arrival rate") {
    ModelConfig cfg;
    CHECK(arrival_rate_hom(cfg, 0, 0) == doctest::Approx(5.0));
    CHECK(arrival_rate_hom(cfg, 5, 5) == 0.0);
    CHECK(arrival_rate_hom(cfg, 2, 3) == doctest::Approx(2.5));
}

TEST_CASE("heterogeneous arrival rate") {
    ContactGraph star(10);
    for (int v = 1; v < 10; ++v)
        star.add_edge(0, v);
    ModelConfig cfg;
    cfg.mode = ContactMode::heterogeneous;
    cfg.tagged_node = 0;

    SUBCASE("star centre at the origin") {
        CHECK(arrival_rate_het(cfg, &star, 0, 0) == doctest::Approx(4.5));
    }
    SUBCASE("fully infected population leaves only the neighbour term") {
        // d_k = 9, beta = 9/10 for each of 9 neighbours, scaled by (i + j) / N = 1.
        CHECK(arrival_rate_het(cfg, &star, 5, 5) == doctest::Approx(9 * 0.9));
        cfg.closure = NeighborClosure::full_neighbor;
        CHECK(arrival_rate_het(cfg, &star, 5, 5) == doctest::Approx(9 * 0.9));
    }
    SUBCASE("closures differ away from saturation") {
        const double mf = arrival_rate_het(cfg, &star, 2, 1);
        cfg.closure = NeighborClosure::full_neighbor;
        const double full = arrival_rate_het(cfg, &star, 2, 1);
        CHECK(mf == doctest::Approx(4.5 * 0.7 + 8.1 * 0.3));
        CHECK(full == doctest::Approx(4.5 * 0.7 + 8.1));
    }
    SUBCASE("isolated node") {
        ContactGraph g(10);
        g.add_edge(0, 1);
        cfg.tagged_node = 5;
        CHECK(arrival_rate_het(cfg, &g, 0, 0) == 0.0);
        CHECK(arrival_rate_het(cfg, &g, 3, 4) == 0.0);
    }
    SUBCASE("missing graph or tagged node") {
        CHECK_THROWS_AS(arrival_rate_het(cfg, nullptr, 0, 0), ConfigError);
        cfg.tagged_node = 12;
        CHECK_THROWS_AS(arrival_rate_het(cfg, &star, 0, 0), ConfigError);
    }
}

TEST_CASE("graph parsing") {
    SUBCASE("path") {
        const auto g = load_graph("n 3\n0 1\n1 2");
        CHECK(g.degrees() == std::vector<int>{1, 2, 1});
    }
    SUBCASE("duplicate edges collapse") {
        const auto g = load_graph("n 2\n0 1\n0 1");
        CHECK(g.degrees() == std::vector<int>{1, 1});
        CHECK(g.edge_count() == 1);
    }
    SUBCASE("comments and blank lines") {
        const auto g = load_graph("# a comment\n\nn 3\n# edge\n0 2\n");
        CHECK(g.adjacent(0, 2));
        CHECK(g.adjacent(2, 0));
        CHECK_FALSE(g.adjacent(0, 1));
    }
    SUBCASE("self-loop reports its line") {
        try {
            load_graph("n 2\n0 0");
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.line() == 2);
        }
    }
    SUBCASE("malformed input") {
        CHECK_THROWS_AS(load_graph("0 1\n"), ParseError);
        CHECK_THROWS_AS(load_graph("n 2\n0 5"), ParseError);
        CHECK_THROWS_AS(load_graph("n 2\n0 x"), ParseError);
        CHECK_THROWS_AS(load_graph(""), ParseError);
    }
}

TEST_CASE("ring-plus-hub fixture") {
    const auto g = ring_plus_hub(10);
    CHECK(g.degree(0) == 9);
    for (int v = 1; v < 10; ++v)
        CHECK(g.degree(v) == 3);
    CHECK(g.edge_count() == 18);
}

TEST_CASE("config validation names the field") {
    ModelConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.servers = 10;
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("model.c"), ConfigError);
    cfg = ModelConfig{};
    cfg.mu = 0.0;
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("model.mu"), ConfigError);
    cfg = ModelConfig{};
    cfg.initial_state = {0, 9};
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("model.initial_state"), ConfigError);
}

TEST_CASE("heterogeneous rate function checks the graph size") {
    ModelConfig cfg;
    cfg.mode = ContactMode::heterogeneous;
    const auto g = ring_plus_hub(20);
    CHECK_THROWS_AS(make_arrival_rate(cfg, &g), ConfigError);
    CHECK_THROWS_AS(make_arrival_rate(cfg, nullptr), ConfigError);
    const auto g10 = ring_plus_hub(10);
    const auto rate = make_arrival_rate(cfg, &g10);
    CHECK(rate({0, 0}) == doctest::Approx(5.0 * 3 / 10));
}
