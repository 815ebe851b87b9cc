#pragma once

#include "retrial/model.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace retrial {

struct Transition {
    std::size_t target = 0;
    double rate = 0.0;
};

struct Triplet {
    std::size_t row = 0;
    std::size_t col = 0;
    double value = 0.0;
};

/// Sparse infinitesimal generator. Off-diagonal rates are stored per row in
/// compressed form, the diagonal separately.
class GeneratorMatrix {
public:
    /// Stores the entries exactly as given; diagonal triplets set the diagonal,
    /// duplicates are summed. No consistency checks (see validate_generator).
    static GeneratorMatrix from_triplets(std::size_t dim, std::span<const Triplet> entries,
                                         std::optional<StateSpace> space = std::nullopt);

    std::size_t dim() const noexcept { return diagonal_.size(); }
    const std::optional<StateSpace>& space() const noexcept { return space_; }

    std::span<const Transition> row(std::size_t x) const {
        return {entries_.data() + row_begin_[x], entries_.data() + row_begin_[x + 1]};
    }
    double diagonal(std::size_t x) const { return diagonal_[x]; }
    double at(std::size_t x, std::size_t y) const;

    /// max_x |Q(x,x)|
    double max_exit_rate() const noexcept;
    std::size_t nonzeros() const noexcept { return entries_.size() + diagonal_.size(); }

    /// Dense copy; refuses dimensions above 10^4.
    Eigen::MatrixXd to_dense() const;

    /// result = v * Q for a row vector v.
    void left_multiply(std::span<const double> v, std::span<double> result) const;

private:
    GeneratorMatrix() = default;

    std::optional<StateSpace> space_;
    std::vector<std::size_t> row_begin_;
    std::vector<Transition> entries_;
    std::vector<double> diagonal_;

    friend GeneratorMatrix build_generator(const ModelConfig&, const RateFunction&);
};

/// Builds Q from the four transition families: arrival to a free unit,
/// service completion, successful retrial, and arrival to the orbit.
GeneratorMatrix build_generator(const ModelConfig& cfg, const RateFunction& arrival_rate);

struct ValidationReport {
    bool passed = true;
    double max_abs_row_sum = 0.0;
    std::size_t worst_row = 0;
    std::vector<std::size_t> unbalanced_rows;
    std::vector<Triplet> negative_entries;
    std::vector<Triplet> off_stencil;
    std::vector<std::string> messages;
};

inline constexpr double kRowSumTolerance = 1e-12;

/// Checks zero row sums, nonnegative off-diagonals and, when Q carries a
/// state space, that every transition is one of the four allowed moves.
ValidationReport validate_generator(const GeneratorMatrix& q, double tolerance = kRowSumTolerance);

/// Returns true when the move x -> y is one of the four allowed transition types.
bool is_stencil_move(const StateSpace& space, State from, State to);

/// Number of closed communicating classes of the transition graph.
std::size_t closed_class_count(const GeneratorMatrix& q);
bool is_irreducible(const GeneratorMatrix& q);

/// "row,col,rate" triplet dump including the diagonal.
void write_triplets_csv(const GeneratorMatrix& q, std::ostream& out);

} // namespace retrial
