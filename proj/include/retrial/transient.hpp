#pragma once

#include "retrial/generator.hpp"
#include "retrial/model.hpp"
#include "retrial/probability.hpp"

#include <cstdint>
#include <ostream>
#include <vector>

namespace retrial {

inline constexpr double kDefaultUniformizationEps = 1e-10;

/// P(t) = P(0) e^{Qt} by uniformization with Poisson truncation error below eps.
ProbabilityVector uniformize(const GeneratorMatrix& q, const ProbabilityVector& p0, double t,
                             double eps = kDefaultUniformizationEps);

/// Uniformization on an increasing grid, propagating from one grid point to the next.
TransientSolution transient_grid(const GeneratorMatrix& q, const ProbabilityVector& p0,
                                 const std::vector<double>& times, double eps = kDefaultUniformizationEps);

// ---------------------------------------------------------------------------
// Stochastic simulation

/// Name recorded in output metadata for the random stream construction.
inline constexpr const char* kRngAlgorithm = "mt19937_64/splitmix64-stream";

/// Engine seed for replica `replica` of a run seeded with `seed`.
std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t replica);

struct TrajectoryEvent {
    double time = 0.0;
    State state;
};

/// Jump chain of one run. The first event is the initial state at time 0.
struct Trajectory {
    std::vector<TrajectoryEvent> events;
    double horizon = 0.0;
    std::uint64_t seed = 0;
};

/// One exact jump trajectory on [0, horizon]. Equal seeds give equal
/// trajectories; the stream equals replica 0 of monte_carlo_estimate.
Trajectory simulate_gillespie(const ModelConfig& cfg, const RateFunction& arrival_rate, double horizon,
                              std::uint64_t seed);

/// "time,i,j" per event.
void write_trajectory_csv(const Trajectory& trajectory, std::ostream& out);

struct MonteCarloEstimate {
    TransientSolution solution;
    /// Binomial standard error sqrt(p(1-p)/R) per time and state.
    std::vector<std::vector<double>> standard_errors;
    /// Sample means of I(t), R(t) and the standard errors of those means.
    std::vector<double> mean_servers;
    std::vector<double> mean_servers_se;
    std::vector<double> mean_orbit;
    std::vector<double> mean_orbit_se;
    std::uint64_t replicas = 0;
};

/// Empirical distribution of X(t) over independent replicas (at least 1000).
MonteCarloEstimate monte_carlo_estimate(const ModelConfig& cfg, const RateFunction& arrival_rate,
                                        const std::vector<double>& times, std::uint64_t replicas,
                                        std::uint64_t seed);

} // namespace retrial
