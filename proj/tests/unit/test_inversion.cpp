#include "retrial/errors.hpp"
#include "retrial/inversion.hpp"
#include "retrial/transient.hpp"
#include "support.hpp"

#include <doctest.h>

#include <numeric>
#include <sstream>

using namespace retrial;

namespace {

std::vector<double> split_numbers(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ';'))
        out.push_back(std::stod(item));
    return out;
}

} // namespace

TEST_CASE("weights for K=2") {
    const auto w = stehfest_coefficients(2);
    REQUIRE(w.values.size() == 2);
    CHECK(w.values[0] == 2.0);
    CHECK(w.values[1] == -2.0);
}

TEST_CASE("weights for K=4 match the rational closed form") {
    // V = [-2, 26, -48, 24]
    const auto w = stehfest_coefficients(4);
    REQUIRE(w.values.size() == 4);
    CHECK(w.values[0] == -2.0);
    CHECK(w.values[1] == 26.0);
    CHECK(w.values[2] == -48.0);
    CHECK(w.values[3] == 24.0);
}

TEST_CASE("weights sum to zero") {
    for (int k = 2; k <= 20; k += 2) {
        const auto w = stehfest_coefficients(k);
        double sum = 0.0;
        double scale = 0.0;
        for (double v : w.values) {
            sum += v;
            scale = std::max(scale, std::abs(v));
        }
        CHECK(std::abs(sum) <= 1e-15 * scale);
    }
}

TEST_CASE("invalid orders") {
    CHECK_THROWS_AS(stehfest_coefficients(3), DomainError);
    CHECK_THROWS_AS(stehfest_coefficients(0), DomainError);
    CHECK_THROWS_AS(stehfest_coefficients(22), DomainError);
}

TEST_CASE("constant function is exact") {
    const auto w = stehfest_coefficients(14);
    for (double t : {0.1, 1.0, 2.5, 10.0})
        CHECK(std::abs(invert_at([](long double s) { return 1.0L / s; }, t, w) - 1.0) <= 1e-10);
}

TEST_CASE("smooth transforms at the truncation level of K=14") {
    const auto w = stehfest_coefficients(14);
    CHECK(std::abs(invert_at([](long double s) { return 1.0L / (s * s); }, 2.5, w) - 2.5) <= 5e-6);
    CHECK(std::abs(invert_at([](long double s) { return 1.0L / (s + 1.0L); }, 1.0, w) - std::exp(-1.0)) <= 2e-6);
}

TEST_CASE("ramp at K=14 within 1e-8" * doctest::may_fail()) {
    const auto w = stehfest_coefficients(14);
    CHECK(std::abs(invert_at([](long double s) { return 1.0L / (s * s); }, 2.5, w) - 2.5) <= 1e-8);
}

TEST_CASE("decaying exponential at K=14 within 1e-8" * doctest::may_fail()) {
    const auto w = stehfest_coefficients(14);
    CHECK(std::abs(invert_at([](long double s) { return 1.0L / (s + 1.0L); }, 1.0, w) - 0.367879441171) <= 1e-8);
}

TEST_CASE("inversion needs t > 0") {
    const auto w = stehfest_coefficients(14);
    CHECK_THROWS_AS(invert_at([](long double s) { return 1.0L / s; }, 0.0, w), DomainError);
}

TEST_CASE("transient ILT") {
    const auto cfg = testing::small_config();
    const auto q = testing::generator_for(cfg);
    const auto p0 = testing::start_at_origin(cfg);

    SUBCASE("t = 0 returns p0") {
        const auto sol = transient_via_ilt(q, p0, {0.0});
        CHECK(sol.states[0].values == p0.values);
    }
    SUBCASE("short times stay near p0") {
        // The chain leaves the origin at rate 5, so |P(t) - p0| is about 5t.
        for (double t : {1e-4, 1e-3}) {
            const auto sol = transient_via_ilt(q, p0, {t});
            const double drift = 1.0 - std::exp(-q.max_exit_rate() * t);
            CHECK(testing::max_abs_diff(sol.states[0].values, p0.values) <= drift + 1e-8);
        }
        CHECK(testing::max_abs_diff(transient_via_ilt(q, p0, {1e-4}).states[0].values, p0.values) <= 1e-3);
    }
    SUBCASE("agrees with uniformization") {
        const std::vector<double> times{0.5, 2.0, 5.0, 10.0};
        const auto ilt = transient_via_ilt(q, p0, times);
        const auto uni = transient_grid(q, p0, times);
        for (std::size_t n = 0; n < times.size(); ++n)
            CHECK(testing::max_abs_diff(ilt.states[n].values, uni.states[n].values) <= 1e-4);
    }
    SUBCASE("agrees with uniformization over the retrial-rate matrix") {
        const std::vector<double> times{0.5, 1.0, 2.0, 5.0, 10.0, 20.0};
        for (auto [n, c] : {std::pair{10, 5}, {20, 5}, {20, 10}})
            for (double theta : {0.0, 1.0, 2.0}) {
                const auto m = testing::small_config(n, c, theta);
                const auto qm = testing::generator_for(m);
                const auto ilt = transient_via_ilt(qm, testing::start_at_origin(m), times);
                const auto uni = transient_grid(qm, testing::start_at_origin(m), times);
                for (std::size_t k = 0; k < times.size(); ++k)
                    CHECK(testing::max_abs_diff(ilt.states[k].values, uni.states[k].values) <= 1e-4);
            }
    }
    SUBCASE("known-transform error does not grow from K=8 to K=14") {
        auto suite_error = [](int order) {
            const auto w = stehfest_coefficients(order);
            double e = 0.0;
            for (double t : {0.1, 1.0, 10.0}) {
                e = std::max(e, std::abs(invert_at([](long double s) { return 1.0L / (s + 1.0L); }, t, w) - std::exp(-t)));
                e = std::max(e, std::abs(invert_at([](long double s) { return 1.0L / (s * s); }, t, w) - t));
                e = std::max(e, std::abs(invert_at([](long double s) { return 1.0L / (s * (s + 1.0L)); }, t, w) -
                                         (1.0 - std::exp(-t))));
            }
            return e;
        };
        CHECK(suite_error(14) <= suite_error(8));
    }
    SUBCASE("raw sums stay close to one") {
        const auto sol = transient_via_ilt(q, p0, {0.5, 2.0, 5.0, 10.0, 20.0});
        for (double s : split_numbers(sol.metadata.at("raw_sums")))
            CHECK(std::abs(s - 1.0) <= 1e-6);
        CHECK(sol.metadata.at("K") == "20");
    }
    SUBCASE("renormalised output is a distribution") {
        const auto sol = transient_via_ilt(q, p0, {0.3, 3.0});
        for (const auto& p : sol.states) {
            CHECK(std::abs(p.sum() - 1.0) <= 1e-12);
            for (double v : p.values)
                CHECK(v >= 0.0);
            CHECK(p.provenance == Provenance::ilt);
        }
    }
    SUBCASE("grid must increase") {
        CHECK_THROWS_AS(transient_via_ilt(q, p0, {2.0, 1.0}), DomainError);
    }
}
