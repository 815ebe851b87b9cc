#include "retrial/errors.hpp"
#include "retrial/generator.hpp"
#include "support.hpp"

#include <doctest.h>

#include <sstream>

using namespace retrial;

TEST_CASE("generator entries for the default config") {
    const auto cfg = testing::small_config();
    const auto q = testing::generator_for(cfg);
    const StateSpace sp = cfg.space();
    auto idx = [&](int i, int j) { return state_index(sp, {i, j}); };

    CHECK(q.at(idx(0, 0), idx(1, 0)) == doctest::Approx(5.0));
    CHECK(q.at(idx(3, 2), idx(2, 2)) == doctest::Approx(1.2));
    CHECK(q.at(idx(3, 2), idx(4, 1)) == doctest::Approx(4.0));

    const auto last = q.row(idx(5, 5));
    REQUIRE(last.size() == 1);
    CHECK(last[0].target == idx(4, 5));
    CHECK(last[0].rate == doctest::Approx(2.0));
    CHECK(q.diagonal(idx(5, 5)) == doctest::Approx(-2.0));
}

TEST_CASE("orbit arrivals happen only with every unit busy") {
    const auto cfg = testing::small_config();
    const auto q = testing::generator_for(cfg);
    const StateSpace sp = cfg.space();
    // (5,0) -> (5,1) at lambda_{5,0} = 5 * 5 / 10
    CHECK(q.at(state_index(sp, {5, 0}), state_index(sp, {5, 1})) == doctest::Approx(2.5));
    // no orbit arrival at i < c
    CHECK(q.at(state_index(sp, {4, 0}), state_index(sp, {4, 1})) == 0.0);
}

TEST_CASE("built generators validate over the config matrix") {
    for (int n : {10, 20, 40})
        for (int c : {5, 10, 15, 20}) {
            if (c >= n)
                continue;
            for (auto mode : {ContactMode::homogeneous, ContactMode::heterogeneous}) {
                auto cfg = testing::small_config(n, c);
                cfg.mode = mode;
                const auto g = ring_plus_hub(n);
                const auto q = testing::generator_for(cfg, &g);
                const auto report = validate_generator(q);
                CHECK(report.passed);
                CHECK(report.max_abs_row_sum <= 1e-12);
            }
        }
}

TEST_CASE("hand-built matrix with a nonzero row sum fails") {
    const StateSpace sp(2, 1);
    const std::vector<Triplet> t{{0, 1, 1.0}, {0, 0, -1.1}, {1, 1, 0.0}, {2, 2, 0.0}, {3, 3, 0.0}};
    const auto q = GeneratorMatrix::from_triplets(sp.size(), t, sp);
    const auto report = validate_generator(q);
    CHECK_FALSE(report.passed);
    REQUIRE(report.unbalanced_rows.size() == 1);
    CHECK(report.unbalanced_rows[0] == 0);
    CHECK(report.worst_row == 0);
}

TEST_CASE("hand-built double jump is off-stencil") {
    const StateSpace sp(3, 2);
    const auto to = state_index(sp, {2, 0});
    const std::vector<Triplet> t{{0, to, 1.0}, {0, 0, -1.0}};
    const auto q = GeneratorMatrix::from_triplets(sp.size(), t, sp);
    const auto report = validate_generator(q);
    CHECK_FALSE(report.passed);
    CHECK(report.off_stencil.size() == 1);
    bool named = false;
    for (const auto& m : report.messages)
        named = named || m.find("off-stencil transition") != std::string::npos;
    CHECK(named);
}

TEST_CASE("negative off-diagonal fails") {
    const std::vector<Triplet> t{{0, 1, -1.0}, {0, 0, 1.0}};
    const auto q = GeneratorMatrix::from_triplets(2, t);
    const auto report = validate_generator(q);
    CHECK_FALSE(report.passed);
    CHECK(report.negative_entries.size() == 1);
}

TEST_CASE("stencil predicate") {
    const StateSpace sp(10, 5);
    CHECK(is_stencil_move(sp, {0, 0}, {1, 0}));
    CHECK(is_stencil_move(sp, {2, 2}, {1, 2}));
    CHECK(is_stencil_move(sp, {2, 2}, {3, 1}));
    CHECK(is_stencil_move(sp, {5, 2}, {5, 3}));
    CHECK_FALSE(is_stencil_move(sp, {4, 2}, {4, 3}));
    CHECK_FALSE(is_stencil_move(sp, {0, 0}, {2, 0}));
    CHECK_FALSE(is_stencil_move(sp, {5, 2}, {5, 1}));
}

TEST_CASE("communicating structure") {
    CHECK(is_irreducible(testing::generator_for(testing::small_config())));
    // Without retrials the orbit only grows; the full-orbit states form the one closed class.
    const auto q0 = testing::generator_for(testing::small_config(10, 5, 0.0));
    CHECK_FALSE(is_irreducible(q0));
    CHECK(closed_class_count(q0) == 1);
}

TEST_CASE("left multiplication matches the dense product") {
    const auto cfg = testing::small_config(6, 2);
    const auto q = testing::generator_for(cfg);
    std::vector<double> v(q.dim());
    for (std::size_t k = 0; k < v.size(); ++k)
        v[k] = 1.0 / static_cast<double>(k + 1);
    std::vector<double> out(q.dim());
    q.left_multiply(v, out);
    const Eigen::RowVectorXd dense = Eigen::Map<const Eigen::RowVectorXd>(v.data(), v.size()) * q.to_dense();
    for (std::size_t k = 0; k < v.size(); ++k)
        CHECK(out[k] == doctest::Approx(dense(static_cast<Eigen::Index>(k))).epsilon(1e-13));
}

TEST_CASE("triplet dump") {
    const auto q = testing::two_state_toy();
    std::ostringstream os;
    write_triplets_csv(q, os);
    const auto text = os.str();
    CHECK(text.rfind("row,col,rate\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 5);
}
