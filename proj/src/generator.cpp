#include "retrial/generator.hpp"

#include "retrial/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>

namespace retrial {

GeneratorMatrix GeneratorMatrix::from_triplets(std::size_t dim, std::span<const Triplet> entries,
                                               std::optional<StateSpace> space) {
    if (space && space->size() != dim)
        throw DomainError("state space size does not match matrix dimension");

    std::vector<std::map<std::size_t, double>> rows(dim);
    GeneratorMatrix q;
    q.space_ = space;
    q.diagonal_.assign(dim, 0.0);
    for (const auto& t : entries) {
        if (t.row >= dim || t.col >= dim)
            throw DomainError("triplet index out of range");
        if (t.row == t.col)
            q.diagonal_[t.row] += t.value;
        else
            rows[t.row][t.col] += t.value;
    }
    q.row_begin_.reserve(dim + 1);
    q.row_begin_.push_back(0);
    for (const auto& r : rows) {
        for (auto [col, rate] : r)
            q.entries_.push_back({col, rate});
        q.row_begin_.push_back(q.entries_.size());
    }
    return q;
}

double GeneratorMatrix::at(std::size_t x, std::size_t y) const {
    if (x >= dim() || y >= dim())
        throw DomainError("generator index out of range");
    if (x == y)
        return diagonal_[x];
    for (const auto& t : row(x))
        if (t.target == y)
            return t.rate;
    return 0.0;
}

double GeneratorMatrix::max_exit_rate() const noexcept {
    double m = 0.0;
    for (double d : diagonal_)
        m = std::max(m, std::abs(d));
    return m;
}

Eigen::MatrixXd GeneratorMatrix::to_dense() const {
    if (dim() > 10'000)
        throw DomainError("dense conversion limited to 10^4 states");
    const auto n = static_cast<Eigen::Index>(dim());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t x = 0; x < dim(); ++x) {
        m(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(x)) = diagonal_[x];
        for (const auto& t : row(x))
            m(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(t.target)) = t.rate;
    }
    return m;
}

void GeneratorMatrix::left_multiply(std::span<const double> v, std::span<double> result) const {
    for (std::size_t y = 0; y < dim(); ++y)
        result[y] = v[y] * diagonal_[y];
    for (std::size_t x = 0; x < dim(); ++x) {
        const double vx = v[x];
        if (vx == 0.0)
            continue;
        for (const auto& t : row(x))
            result[t.target] += vx * t.rate;
    }
}

GeneratorMatrix build_generator(const ModelConfig& cfg, const RateFunction& arrival_rate) {
    const StateSpace space = cfg.space();
    const int c = space.servers();
    const int max_j = space.max_orbit();

    GeneratorMatrix q;
    q.space_ = space;
    q.diagonal_.assign(space.size(), 0.0);
    q.row_begin_.reserve(space.size() + 1);
    q.row_begin_.push_back(0);
    q.entries_.reserve(4 * space.size());

    auto rate_at = [&](State s) {
        const double r = arrival_rate(s);
        if (!(r >= 0.0) || !std::isfinite(r))
            throw ModelError("arrival rate at (" + std::to_string(s.i) + "," + std::to_string(s.j) +
                             ") is negative or not finite");
        return r;
    };

    for (const State s : enumerate_states(space)) {
        auto push = [&](State to, double rate) {
            if (rate > 0.0)
                q.entries_.push_back({state_index(space, to), rate});
        };
        // Targets are pushed in increasing index order.
        if (s.i >= 1)
            push({s.i - 1, s.j}, s.i * cfg.mu);
        if (s.i <= c - 1) {
            if (s.j >= 1)
                push({s.i + 1, s.j - 1}, s.j * cfg.theta);
            push({s.i + 1, s.j}, rate_at(s));
        } else if (s.j <= max_j - 1) {
            push({c, s.j + 1}, rate_at(s));
        }

        const auto begin = q.row_begin_.back();
        double exit = 0.0;
        for (auto k = begin; k < q.entries_.size(); ++k)
            exit += q.entries_[k].rate;
        q.diagonal_[state_index(space, s)] = -exit;
        q.row_begin_.push_back(q.entries_.size());
    }
    return q;
}

bool is_stencil_move(const StateSpace& space, State from, State to) {
    const int c = space.servers();
    if (to.i == from.i + 1 && to.j == from.j && from.i <= c - 1)
        return true;
    if (to.i == from.i - 1 && to.j == from.j && from.i >= 1)
        return true;
    if (to.i == from.i + 1 && to.j == from.j - 1 && from.i <= c - 1 && from.j >= 1)
        return true;
    if (from.i == c && to.i == c && to.j == from.j + 1)
        return true;
    return false;
}

ValidationReport validate_generator(const GeneratorMatrix& q, double tolerance) {
    ValidationReport report;
    for (std::size_t x = 0; x < q.dim(); ++x) {
        double sum = q.diagonal(x);
        for (const auto& t : q.row(x)) {
            sum += t.rate;
            if (t.rate < 0.0) {
                report.negative_entries.push_back({x, t.target, t.rate});
                report.messages.push_back("negative off-diagonal at (" + std::to_string(x) + "," +
                                          std::to_string(t.target) + ")");
            }
            if (q.space() && t.rate != 0.0 &&
                !is_stencil_move(*q.space(), state_at(*q.space(), x), state_at(*q.space(), t.target))) {
                report.off_stencil.push_back({x, t.target, t.rate});
                report.messages.push_back("off-stencil transition (" + std::to_string(x) + "," +
                                          std::to_string(t.target) + ")");
            }
        }
        if (q.space() && q.row(x).size() > 4)
            report.messages.push_back("row " + std::to_string(x) + " has more than 4 transitions");
        const double dev = std::abs(sum);
        if (!(dev <= tolerance)) {
            report.unbalanced_rows.push_back(x);
            report.messages.push_back("row " + std::to_string(x) + " sums to " + std::to_string(sum));
        }
        if (dev > report.max_abs_row_sum || std::isnan(dev)) {
            report.max_abs_row_sum = std::isnan(dev) ? std::numeric_limits<double>::infinity() : dev;
            report.worst_row = x;
        }
    }
    report.passed = report.messages.empty();
    return report;
}

namespace {

struct ClassSummary {
    std::size_t components = 0;
    std::size_t closed = 0;
};

ClassSummary communicating_classes(const GeneratorMatrix& q) {
    // Iterative Tarjan; a component is closed when no positive rate leaves it.
    const std::size_t n = q.dim();
    constexpr std::size_t unvisited = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> index(n, unvisited), lowlink(n, 0), component(n, unvisited);
    std::vector<bool> on_stack(n, false);
    std::vector<std::size_t> stack;
    std::size_t counter = 0;
    std::size_t components = 0;

    struct Frame {
        std::size_t node;
        std::size_t edge;
    };
    std::vector<Frame> call;

    for (std::size_t root = 0; root < n; ++root) {
        if (index[root] != unvisited)
            continue;
        call.push_back({root, 0});
        while (!call.empty()) {
            auto& f = call.back();
            const std::size_t v = f.node;
            if (f.edge == 0 && index[v] == unvisited) {
                index[v] = lowlink[v] = counter++;
                stack.push_back(v);
                on_stack[v] = true;
            }
            auto edges = q.row(v);
            if (f.edge < edges.size()) {
                const auto& t = edges[f.edge++];
                if (t.rate <= 0.0)
                    continue;
                const std::size_t w = t.target;
                if (index[w] == unvisited)
                    call.push_back({w, 0});
                else if (on_stack[w])
                    lowlink[v] = std::min(lowlink[v], index[w]);
                continue;
            }
            if (lowlink[v] == index[v]) {
                std::size_t w = 0;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = false;
                    component[w] = components;
                } while (w != v);
                ++components;
            }
            call.pop_back();
            if (!call.empty()) {
                const std::size_t parent = call.back().node;
                lowlink[parent] = std::min(lowlink[parent], lowlink[v]);
            }
        }
    }

    std::vector<bool> leaks(components, false);
    for (std::size_t x = 0; x < n; ++x)
        for (const auto& t : q.row(x))
            if (t.rate > 0.0 && component[t.target] != component[x])
                leaks[component[x]] = true;
    return {components, static_cast<std::size_t>(std::count(leaks.begin(), leaks.end(), false))};
}

} // namespace

std::size_t closed_class_count(const GeneratorMatrix& q) { return communicating_classes(q).closed; }

bool is_irreducible(const GeneratorMatrix& q) { return q.dim() > 0 && communicating_classes(q).components == 1; }

void write_triplets_csv(const GeneratorMatrix& q, std::ostream& out) {
    out << "row,col,rate\n";
    out << std::setprecision(17);
    for (std::size_t x = 0; x < q.dim(); ++x) {
        bool diag_written = false;
        for (const auto& t : q.row(x)) {
            if (!diag_written && t.target > x) {
                out << x << ',' << x << ',' << q.diagonal(x) << '\n';
                diag_written = true;
            }
            out << x << ',' << t.target << ',' << t.rate << '\n';
        }
        if (!diag_written)
            out << x << ',' << x << ',' << q.diagonal(x) << '\n';
    }
}

} // namespace retrial
