#include "retrial/probability.hpp"

#include "retrial/errors.hpp"

#include <numeric>

namespace retrial {

std::string to_string(Provenance p) {
    switch (p) {
    case Provenance::ilt:
        return "ilt";
    case Provenance::uniformization:
        return "uniformization";
    case Provenance::monte_carlo:
        return "monte_carlo";
    case Provenance::stationary:
        return "stationary";
    case Provenance::initial:
        return "initial";
    }
    return "unknown";
}

double ProbabilityVector::sum() const noexcept { return std::accumulate(values.begin(), values.end(), 0.0); }

ProbabilityVector point_mass(std::size_t dim, std::size_t index) {
    if (index >= dim)
        throw DomainError("point mass index out of range");
    ProbabilityVector p;
    p.values.assign(dim, 0.0);
    p.values[index] = 1.0;
    return p;
}

} // namespace retrial
