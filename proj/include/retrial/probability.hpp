#pragma once

#include <map>
#include <string>
#include <vector>

namespace retrial {

enum class Provenance { ilt, uniformization, monte_carlo, stationary, initial };

std::string to_string(Provenance p);

/// Distribution over the state space at one time, indexed by state_index.
struct ProbabilityVector {
    std::vector<double> values;
    double time = 0.0;
    Provenance provenance = Provenance::initial;

    std::size_t size() const noexcept { return values.size(); }
    double operator[](std::size_t k) const { return values[k]; }
    double sum() const noexcept;
};

/// Point mass on one state.
ProbabilityVector point_mass(std::size_t dim, std::size_t index);

/// Distributions on a strictly increasing time grid, plus free-form solver
/// metadata (order, tolerance, replica count, seed, raw deviations).
struct TransientSolution {
    std::vector<double> times;
    std::vector<ProbabilityVector> states;
    std::map<std::string, std::string> metadata;
};

} // namespace retrial
