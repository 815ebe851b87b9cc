#pragma once

#include "retrial/model.hpp"
#include "retrial/probability.hpp"

#include <vector>

namespace retrial {

/// p_i(t) = sum_j p_{i,j}(t), length c + 1.
std::vector<double> marginal_recovering(const StateSpace& space, const ProbabilityVector& p);
/// q_j(t) = sum_i p_{i,j}(t), length N - c + 1.
std::vector<double> marginal_orbit(const StateSpace& space, const ProbabilityVector& p);

/// E[I^n(t)]
double moment_recovering(const StateSpace& space, const ProbabilityVector& p, int n);
/// E[R^n(t)]
double moment_orbit(const StateSpace& space, const ProbabilityVector& p, int n);

struct MarginalReport {
    double time = 0.0;
    std::vector<double> server_marginal;
    std::vector<double> orbit_marginal;
    double mean_servers = 0.0;        // E[I]
    double second_moment_servers = 0.0; // E[I^2]
    double mean_orbit = 0.0;          // E[R]
    double second_moment_orbit = 0.0; // E[R^2]

    double variance_servers() const { return second_moment_servers - mean_servers * mean_servers; }
    double variance_orbit() const { return second_moment_orbit - mean_orbit * mean_orbit; }
};

/// Marginals and the first two raw moments in one pass over the joint vector.
MarginalReport marginal_report(const StateSpace& space, const ProbabilityVector& p);

} // namespace retrial
