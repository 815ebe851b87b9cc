#pragma once

#include "retrial/generator.hpp"
#include "retrial/probability.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace retrial {

struct LaplaceSolution {
    double s = 0.0;
    std::vector<double> pstar;
    /// max |x M(s) - p0|
    double residual = 0.0;
};

/// M(s) = sI - Q partitioned by server level into (c+1)^2 blocks of width N-c+1.
/// Only the three block diagonals are nonzero:
///   A_i = diagonal blocks, B_i = level i -> i+1 (arrivals, retrials),
///   C_i = level i -> i-1 (service completions).
/// Construction also factors the transposed system once, so repeated solves at
/// the same s reuse it. Immutable after assembly.
class ResolventSystem {
public:
    double s() const noexcept { return s_; }
    const StateSpace& space() const noexcept { return space_; }
    int levels() const noexcept { return static_cast<int>(diag_.size()); }

    const Eigen::MatrixXd& diagonal_block(int i) const { return diag_.at(i); }
    /// B_i, coupling level i to level i+1 (0 <= i < c).
    const Eigen::MatrixXd& upper_block(int i) const { return upper_.at(i); }
    /// C_i, coupling level i to level i-1 (1 <= i <= c).
    const Eigen::MatrixXd& lower_block(int i) const { return lower_.at(i - 1); }

    /// Reassembled dense M(s).
    Eigen::MatrixXd to_dense() const;

    /// x with x M(s) = rhs for an arbitrary right-hand side, using the cached factorisation.
    Eigen::VectorXd solve_left(const Eigen::VectorXd& rhs) const;

private:
    double s_ = 0.0;
    StateSpace space_{2, 1};
    std::vector<Eigen::MatrixXd> diag_;
    std::vector<Eigen::MatrixXd> upper_;
    std::vector<Eigen::MatrixXd> lower_;

    // Block elimination of M^T: pivots D_i and G_i = D_i^{-1} C_{i+1}^T.
    std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> pivots_;
    std::vector<Eigen::MatrixXd> gains_;

    friend ResolventSystem assemble_resolvent(const GeneratorMatrix& q, double s);
    friend LaplaceSolution solve_resolvent(const ResolventSystem& sys, const ProbabilityVector& p0);
};

/// Requires a generator that carries its state space. Throws DomainError for s <= 0
/// and NumericalError if a block pivot is singular.
ResolventSystem assemble_resolvent(const GeneratorMatrix& q, double s);

/// Solves x M(s) = p0 for the row vector x = P*(s).
LaplaceSolution solve_resolvent(const ResolventSystem& sys, const ProbabilityVector& p0);

/// x (sI - Q) = p0 carried in long double: the block solve, then iterative
/// refinement against a long double residual. `s` is the extended-precision
/// abscissa; `sys` may be assembled at its double rounding.
std::vector<long double> solve_resolvent_extended(const ResolventSystem& sys, const GeneratorMatrix& q,
                                                  long double s, const ProbabilityVector& p0,
                                                  int refinements = 2);

/// Solve Pi Q = 0, sum Pi = 1 directly. Throws ModelError when the chain has
/// more than one closed class.
ProbabilityVector stationary_nullspace(const GeneratorMatrix& q);

struct FinalValueResult {
    ProbabilityVector pi;
    std::vector<double> s_grid;
    /// max-entry change of s P*(s) between consecutive grid points
    std::vector<double> successive_differences;
    /// |s * sum P*(s) - 1| per grid point
    std::vector<double> normalization_errors;
    std::optional<std::string> warning;
};

std::vector<double> default_fvt_grid();

/// lim_{s->0} s P*(s), evaluated on a decreasing grid of positive s.
FinalValueResult stationary_fvt(const GeneratorMatrix& q, const ProbabilityVector& p0,
                                const std::vector<double>& s_grid = default_fvt_grid());

} // namespace retrial
