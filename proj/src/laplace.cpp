#include "retrial/laplace.hpp"

#include "retrial/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace retrial {

namespace {

constexpr double kMinPivotRcond = 1e-14;

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

} // namespace

Eigen::MatrixXd ResolventSystem::to_dense() const {
    const Index w = space_.width();
    const Index n = static_cast<Index>(space_.size());
    MatrixXd m = MatrixXd::Zero(n, n);
    for (int i = 0; i < levels(); ++i) {
        m.block(i * w, i * w, w, w) = diag_[i];
        if (i + 1 < levels()) {
            m.block(i * w, (i + 1) * w, w, w) = upper_[i];
            m.block((i + 1) * w, i * w, w, w) = lower_[i];
        }
    }
    return m;
}

ResolventSystem assemble_resolvent(const GeneratorMatrix& q, double s) {
    if (!(s > 0.0) || !std::isfinite(s))
        throw DomainError("Laplace variable s must be positive and finite");
    if (!q.space())
        throw DomainError("resolvent assembly needs a generator with a state space");

    ResolventSystem sys;
    sys.s_ = s;
    sys.space_ = *q.space();
    const int levels = sys.space_.servers() + 1;
    const Index w = sys.space_.width();

    sys.diag_.assign(levels, MatrixXd::Zero(w, w));
    sys.upper_.assign(levels - 1, MatrixXd::Zero(w, w));
    sys.lower_.assign(levels - 1, MatrixXd::Zero(w, w));

    for (std::size_t x = 0; x < q.dim(); ++x) {
        const State from = state_at(sys.space_, x);
        sys.diag_[from.i](from.j, from.j) = s - q.diagonal(x);
        for (const auto& t : q.row(x)) {
            const State to = state_at(sys.space_, t.target);
            if (to.i == from.i)
                sys.diag_[from.i](from.j, to.j) = -t.rate;
            else if (to.i == from.i + 1)
                sys.upper_[from.i](from.j, to.j) = -t.rate;
            else if (to.i == from.i - 1)
                sys.lower_[to.i](from.j, to.j) = -t.rate;
            else
                throw ModelError("generator is not block tridiagonal by server level");
        }
    }

    // Forward sweep on M^T: D_0 = A_0^T, D_i = A_i^T - B_{i-1}^T G_{i-1}, G_i = D_i^{-1} C_{i+1}^T.
    sys.pivots_.reserve(levels);
    sys.gains_.reserve(levels - 1);
    for (int i = 0; i < levels; ++i) {
        MatrixXd d = sys.diag_[i].transpose();
        if (i > 0)
            d.noalias() -= sys.upper_[i - 1].transpose() * sys.gains_[i - 1];
        Eigen::PartialPivLU<MatrixXd> lu(d);
        if (!(lu.rcond() > kMinPivotRcond))
            throw NumericalError("singular block pivot at level " + std::to_string(i) + " (s=" +
                                 std::to_string(s) + ")");
        if (i + 1 < levels)
            sys.gains_.push_back(lu.solve(MatrixXd(sys.lower_[i].transpose())));
        sys.pivots_.push_back(std::move(lu));
    }
    return sys;
}

Eigen::VectorXd ResolventSystem::solve_left(const Eigen::VectorXd& rhs) const {
    const int n_levels = levels();
    const Index w = space_.width();
    if (rhs.size() != static_cast<Index>(space_.size()))
        throw DomainError("right-hand side has wrong dimension");

    std::vector<VectorXd> y(n_levels);
    for (int i = 0; i < n_levels; ++i) {
        VectorXd r = rhs.segment(i * w, w);
        if (i > 0)
            r.noalias() -= upper_[i - 1].transpose() * y[i - 1];
        y[i] = pivots_[i].solve(r);
    }
    for (int i = n_levels - 2; i >= 0; --i)
        y[i].noalias() -= gains_[i] * y[i + 1];

    VectorXd x(rhs.size());
    for (int i = 0; i < n_levels; ++i)
        x.segment(i * w, w) = y[i];
    return x;
}

namespace {

void check_initial(const ResolventSystem& sys, const ProbabilityVector& p0) {
    if (p0.size() != sys.space().size())
        throw DomainError("initial distribution has wrong dimension");
    for (double v : p0.values)
        if (!(v >= 0.0))
            throw DomainError("initial distribution has a negative entry");
}

} // namespace

LaplaceSolution solve_resolvent(const ResolventSystem& sys, const ProbabilityVector& p0) {
    check_initial(sys, p0);
    const int levels = sys.levels();
    const Index w = sys.space().width();
    auto level_of = [&](const std::vector<double>& v, int i) {
        return Eigen::Map<const VectorXd>(v.data() + i * w, w);
    };
    const VectorXd b = Eigen::Map<const VectorXd>(p0.values.data(), static_cast<Index>(p0.size()));
    const VectorXd x = sys.solve_left(b);
    std::vector<VectorXd> y(levels);
    for (int i = 0; i < levels; ++i)
        y[i] = x.segment(i * w, w);

    LaplaceSolution sol;
    sol.s = sys.s();
    sol.pstar.resize(sys.space().size());
    for (int i = 0; i < levels; ++i)
        Eigen::Map<VectorXd>(sol.pstar.data() + i * w, w) = y[i];

    // Residual of x M - p0, block row by block row.
    double residual = 0.0;
    for (int i = 0; i < levels; ++i) {
        VectorXd r = sys.diag_[i].transpose() * y[i];
        if (i > 0)
            r.noalias() += sys.upper_[i - 1].transpose() * y[i - 1];
        if (i + 1 < levels)
            r.noalias() += sys.lower_[i].transpose() * y[i + 1];
        r -= level_of(p0.values, i);
        residual = std::max(residual, r.cwiseAbs().maxCoeff());
    }
    sol.residual = residual;
    return sol;
}

std::vector<long double> solve_resolvent_extended(const ResolventSystem& sys, const GeneratorMatrix& q,
                                                  long double s, const ProbabilityVector& p0, int refinements) {
    check_initial(sys, p0);
    if (q.dim() != sys.space().size())
        throw DomainError("generator does not match the resolvent system");
    const std::size_t n = q.dim();
    const VectorXd b = Eigen::Map<const VectorXd>(p0.values.data(), static_cast<Index>(n));
    const VectorXd x0 = sys.solve_left(b);
    std::vector<long double> x(x0.data(), x0.data() + n);

    // The diagonal is re-derived in long double so that rows of Q sum to zero
    // to extended precision; at small s the double rounding would be amplified by 1/s.
    std::vector<long double> exit(n, 0.0L);
    for (std::size_t row = 0; row < n; ++row)
        for (const auto& t : q.row(row))
            exit[row] += t.rate;

    VectorXd r(static_cast<Index>(n));
    std::vector<long double> xq(n);
    for (int step = 0; step < refinements; ++step) {
        // r = p0 - x (sI - Q) = p0 - s x + x Q
        std::fill(xq.begin(), xq.end(), 0.0L);
        for (std::size_t row = 0; row < n; ++row) {
            xq[row] -= x[row] * exit[row];
            for (const auto& t : q.row(row))
                xq[t.target] += x[row] * static_cast<long double>(t.rate);
        }
        for (std::size_t k = 0; k < n; ++k)
            r(static_cast<Index>(k)) = static_cast<double>(static_cast<long double>(p0[k]) - s * x[k] + xq[k]);
        const VectorXd dx = sys.solve_left(r);
        for (std::size_t k = 0; k < n; ++k)
            x[k] += dx(static_cast<Index>(k));
    }
    return x;
}

ProbabilityVector stationary_nullspace(const GeneratorMatrix& q) {
    const std::size_t closed = closed_class_count(q);
    if (closed != 1)
        throw ModelError("chain has " + std::to_string(closed) +
                         " closed classes; stationary distribution is not unique");

    const Index n = static_cast<Index>(q.dim());
    MatrixXd a = q.to_dense().transpose();
    VectorXd rhs = VectorXd::Zero(n);
    // Rows of Q^T sum to zero, so any one equation may be traded for normalisation.
    a.row(n - 1).setOnes();
    rhs(n - 1) = 1.0;
    VectorXd pi = a.fullPivLu().solve(rhs);

    for (Index k = 0; k < n; ++k) {
        if (pi(k) < 0.0) {
            if (pi(k) < -1e-10)
                throw NumericalError("stationary solve produced a negative probability");
            pi(k) = 0.0;
        }
    }
    pi /= pi.sum();

    ProbabilityVector out;
    out.values.assign(pi.data(), pi.data() + n);
    out.provenance = Provenance::stationary;
    out.time = std::numeric_limits<double>::infinity();

    std::vector<double> r(q.dim());
    q.left_multiply(out.values, r);
    double res = 0.0;
    for (double v : r)
        res = std::max(res, std::abs(v));
    if (res > 1e-10)
        throw NumericalError("stationary residual " + std::to_string(res) + " exceeds 1e-10");
    return out;
}

std::vector<double> default_fvt_grid() { return {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6}; }

FinalValueResult stationary_fvt(const GeneratorMatrix& q, const ProbabilityVector& p0,
                                const std::vector<double>& s_grid) {
    if (s_grid.empty())
        throw DomainError("final-value grid is empty");
    for (std::size_t k = 0; k < s_grid.size(); ++k) {
        if (!(s_grid[k] > 0.0))
            throw DomainError("final-value grid must be positive");
        if (k > 0 && !(s_grid[k] < s_grid[k - 1]))
            throw DomainError("final-value grid must be strictly decreasing");
    }

    FinalValueResult result;
    result.s_grid = s_grid;
    std::vector<double> previous;
    for (double s : s_grid) {
        const auto x = solve_resolvent_extended(assemble_resolvent(q, s), q, s, p0);
        std::vector<double> scaled(x.size());
        long double total = 0.0L;
        for (std::size_t k = 0; k < x.size(); ++k) {
            total += s * x[k];
            scaled[k] = static_cast<double>(s * x[k]);
        }
        result.normalization_errors.push_back(static_cast<double>(std::abs(total - 1.0L)));
        if (!previous.empty()) {
            double diff = 0.0;
            for (std::size_t k = 0; k < previous.size(); ++k)
                diff = std::max(diff, std::abs(scaled[k] - previous[k]));
            result.successive_differences.push_back(diff);
        }
        previous = std::move(scaled);
    }

    if (!result.successive_differences.empty() && result.successive_differences.back() > 1e-5)
        result.warning = "s P*(s) still moving by " + std::to_string(result.successive_differences.back()) +
                         " at the smallest s";

    result.pi.values = std::move(previous);
    result.pi.provenance = Provenance::stationary;
    result.pi.time = std::numeric_limits<double>::infinity();
    return result;
}

} // namespace retrial
