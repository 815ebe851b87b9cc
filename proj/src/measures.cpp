#include "retrial/measures.hpp"

#include "retrial/errors.hpp"

#include <cmath>

namespace retrial {

namespace {

void check(const StateSpace& space, const ProbabilityVector& p) {
    if (p.size() != space.size())
        throw DomainError("probability vector does not match the state space");
}

double ipow(int base, int n) {
    double r = 1.0;
    for (int k = 0; k < n; ++k)
        r *= base;
    return r;
}

} // namespace

std::vector<double> marginal_recovering(const StateSpace& space, const ProbabilityVector& p) {
    check(space, p);
    std::vector<double> out(static_cast<std::size_t>(space.servers() + 1), 0.0);
    const auto w = static_cast<std::size_t>(space.width());
    for (std::size_t x = 0; x < p.size(); ++x)
        out[x / w] += p[x];
    return out;
}

std::vector<double> marginal_orbit(const StateSpace& space, const ProbabilityVector& p) {
    check(space, p);
    const auto w = static_cast<std::size_t>(space.width());
    std::vector<double> out(w, 0.0);
    for (std::size_t x = 0; x < p.size(); ++x)
        out[x % w] += p[x];
    return out;
}

double moment_recovering(const StateSpace& space, const ProbabilityVector& p, int n) {
    check(space, p);
    if (n < 1)
        throw DomainError("moment order must be >= 1");
    const auto w = static_cast<std::size_t>(space.width());
    double m = 0.0;
    for (std::size_t x = 0; x < p.size(); ++x)
        m += ipow(static_cast<int>(x / w), n) * p[x];
    return m;
}

double moment_orbit(const StateSpace& space, const ProbabilityVector& p, int n) {
    check(space, p);
    if (n < 1)
        throw DomainError("moment order must be >= 1");
    const auto w = static_cast<std::size_t>(space.width());
    double m = 0.0;
    for (std::size_t x = 0; x < p.size(); ++x)
        m += ipow(static_cast<int>(x % w), n) * p[x];
    return m;
}

MarginalReport marginal_report(const StateSpace& space, const ProbabilityVector& p) {
    check(space, p);
    MarginalReport r;
    r.time = p.time;
    r.server_marginal.assign(static_cast<std::size_t>(space.servers() + 1), 0.0);
    r.orbit_marginal.assign(static_cast<std::size_t>(space.width()), 0.0);
    const auto w = static_cast<std::size_t>(space.width());
    for (std::size_t x = 0; x < p.size(); ++x) {
        const auto i = x / w;
        const auto j = x % w;
        const double v = p[x];
        r.server_marginal[i] += v;
        r.orbit_marginal[j] += v;
        r.mean_servers += static_cast<double>(i) * v;
        r.second_moment_servers += static_cast<double>(i * i) * v;
        r.mean_orbit += static_cast<double>(j) * v;
        r.second_moment_orbit += static_cast<double>(j * j) * v;
    }
    return r;
}

} // namespace retrial
