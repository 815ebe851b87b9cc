#pragma once

#include "retrial/generator.hpp"
#include "retrial/model.hpp"
#include "retrial/probability.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

namespace testing {

inline retrial::ModelConfig small_config(int n = 10, int c = 5, double theta = 2.0) {
    retrial::ModelConfig cfg;
    cfg.population = n;
    cfg.servers = c;
    cfg.theta = theta;
    return cfg;
}

inline retrial::GeneratorMatrix generator_for(const retrial::ModelConfig& cfg,
                                              const retrial::ContactGraph* graph = nullptr) {
    return retrial::build_generator(cfg, retrial::make_arrival_rate(cfg, graph));
}

inline retrial::ProbabilityVector start_at_origin(const retrial::ModelConfig& cfg) {
    return retrial::point_mass(cfg.space().size(), 0);
}

/// Symmetric two-state toy chain [[-1, 1], [1, -1]].
inline retrial::GeneratorMatrix two_state_toy() {
    const std::vector<retrial::Triplet> t{{0, 0, -1.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, -1.0}};
    return retrial::GeneratorMatrix::from_triplets(2, t);
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
        m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

/// x (sI - Q) = p0 by dense LU, as an independent oracle.
inline std::vector<double> dense_resolvent(const retrial::GeneratorMatrix& q, double s,
                                           const retrial::ProbabilityVector& p0) {
    const auto n = static_cast<Eigen::Index>(q.dim());
    Eigen::MatrixXd m = s * Eigen::MatrixXd::Identity(n, n) - q.to_dense();
    Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(p0.values.data(), n);
    Eigen::VectorXd x = m.transpose().partialPivLu().solve(b);
    return {x.data(), x.data() + n};
}

} // namespace testing
