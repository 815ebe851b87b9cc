#include "retrial/transient.hpp"

#include "retrial/errors.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <random>

namespace retrial {

namespace {

void check_distribution(const GeneratorMatrix& q, const ProbabilityVector& p0) {
    if (p0.size() != q.dim())
        throw DomainError("initial distribution has wrong dimension");
}

} // namespace

ProbabilityVector uniformize(const GeneratorMatrix& q, const ProbabilityVector& p0, double t, double eps) {
    if (!(t >= 0.0) || !std::isfinite(t))
        throw DomainError("uniformization time must be nonnegative");
    if (!(eps > 0.0 && eps <= 1e-6))
        throw DomainError("uniformization eps must lie in (0, 1e-6]");
    check_distribution(q, p0);

    ProbabilityVector out;
    out.time = p0.time + t;
    out.provenance = Provenance::uniformization;
    const double rate = q.max_exit_rate();
    if (t == 0.0 || rate == 0.0) {
        out.values = p0.values;
        return out;
    }

    const double lt = rate * t;
    const std::size_t dim = q.dim();
    std::vector<double> v = p0.values;
    std::vector<double> qv(dim);
    std::vector<double> acc(dim, 0.0);

    // Poisson weights in log space: log w_n = -lt + n log(lt) - lgamma(n + 1).
    const double log_lt = std::log(lt);
    double total_weight = 0.0;
    for (std::size_t n = 0;; ++n) {
        const double nd = static_cast<double>(n);
        const double w = std::exp(-lt + nd * log_lt - std::lgamma(nd + 1.0));
        total_weight += w;
        if (w > 0.0)
            for (std::size_t k = 0; k < dim; ++k)
                acc[k] += w * v[k];

        // Upper tail after n: P(X > n) <= w_{n+1} (n + 2) / (n + 2 - lt) once n + 2 > lt.
        if (nd + 2.0 > lt) {
            const double next = w * lt / (nd + 1.0);
            const double tail = next * (nd + 2.0) / (nd + 2.0 - lt);
            if (tail < eps && nd >= lt)
                break;
        }

        // v <- v U = v + (v Q) / rate
        q.left_multiply(v, qv);
        for (std::size_t k = 0; k < dim; ++k)
            v[k] += qv[k] / rate;
    }

    out.values.resize(dim);
    for (std::size_t k = 0; k < dim; ++k)
        out.values[k] = std::max(0.0, acc[k] / total_weight);
    return out;
}

TransientSolution transient_grid(const GeneratorMatrix& q, const ProbabilityVector& p0,
                                 const std::vector<double>& times, double eps) {
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (!(times[k] >= 0.0))
            throw DomainError("time grid must be nonnegative");
        if (k > 0 && !(times[k] > times[k - 1]))
            throw DomainError("time grid must be strictly increasing");
    }
    TransientSolution out;
    out.times = times;
    out.metadata["method"] = "uniformization";
    {
        std::ostringstream os;
        os << eps;
        out.metadata["eps"] = os.str();
    }

    ProbabilityVector current = p0;
    current.time = 0.0;
    double clock = 0.0;
    for (double t : times) {
        current = uniformize(q, current, t - clock, eps);
        current.time = t;
        clock = t;
        out.states.push_back(current);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Simulation

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Uniform on [0, 1) from the top 53 bits.
double uniform01(std::mt19937_64& engine) { return static_cast<double>(engine() >> 11) * 0x1.0p-53; }

class JumpSampler {
public:
    JumpSampler(const ModelConfig& cfg, const RateFunction& arrival_rate)
        : space_(cfg.space()), q_(build_generator(cfg, arrival_rate)) {}

    const StateSpace& space() const { return space_; }

    double exit_rate(std::size_t x) const { return -q_.diagonal(x); }

    double holding_time(std::size_t x, std::mt19937_64& engine) const {
        const double rate = exit_rate(x);
        if (rate <= 0.0)
            return std::numeric_limits<double>::infinity();
        return -std::log1p(-uniform01(engine)) / rate;
    }

    std::size_t next_state(std::size_t x, std::mt19937_64& engine) const {
        const auto row = q_.row(x);
        const double target = uniform01(engine) * exit_rate(x);
        double cumulative = 0.0;
        for (const auto& t : row) {
            cumulative += t.rate;
            if (target < cumulative)
                return t.target;
        }
        return row.back().target;
    }

private:
    StateSpace space_;
    GeneratorMatrix q_;
};

} // namespace

std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t replica) {
    return splitmix64(splitmix64(seed) ^ splitmix64(replica + 0x632be59bd9b4e019ULL));
}

Trajectory simulate_gillespie(const ModelConfig& cfg, const RateFunction& arrival_rate, double horizon,
                              std::uint64_t seed) {
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw DomainError("simulation horizon must be positive");
    const JumpSampler sampler(cfg, arrival_rate);
    std::mt19937_64 engine(derive_stream_seed(seed, 0));

    Trajectory traj;
    traj.horizon = horizon;
    traj.seed = seed;
    std::size_t x = state_index(sampler.space(), cfg.initial_state);
    double clock = 0.0;
    traj.events.push_back({0.0, cfg.initial_state});
    while (true) {
        const double hold = sampler.holding_time(x, engine);
        if (!(clock + hold <= horizon))
            break;
        clock += hold;
        x = sampler.next_state(x, engine);
        traj.events.push_back({clock, state_at(sampler.space(), x)});
    }
    return traj;
}

void write_trajectory_csv(const Trajectory& trajectory, std::ostream& out) {
    out << "time,i,j\n" << std::setprecision(17);
    for (const auto& e : trajectory.events)
        out << e.time << ',' << e.state.i << ',' << e.state.j << '\n';
}

MonteCarloEstimate monte_carlo_estimate(const ModelConfig& cfg, const RateFunction& arrival_rate,
                                        const std::vector<double>& times, std::uint64_t replicas,
                                        std::uint64_t seed) {
    if (replicas < 1000)
        throw DomainError("Monte Carlo estimation needs at least 1000 replicas");
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (!(times[k] >= 0.0) || !std::isfinite(times[k]))
            throw DomainError("time grid must be nonnegative");
        if (k > 0 && !(times[k] > times[k - 1]))
            throw DomainError("time grid must be strictly increasing");
    }

    const JumpSampler sampler(cfg, arrival_rate);
    const StateSpace& space = sampler.space();
    const std::size_t dim = space.size();
    const std::size_t nt = times.size();
    const std::size_t start = state_index(space, cfg.initial_state);

    struct Tally {
        std::vector<std::uint64_t> counts; // [time][state]
        std::vector<std::int64_t> sum_i, sum_i2, sum_j, sum_j2;
    };

    // Fixed chunking, independent of the thread count; tallies are integers so the merge is exact.
    constexpr std::uint64_t chunk = 4096;
    const std::size_t chunks = static_cast<std::size_t>((replicas + chunk - 1) / chunk);
    std::vector<Tally> tallies(chunks);

    detail::parallel_for(chunks, [&](std::size_t c) {
        Tally& tl = tallies[c];
        tl.counts.assign(nt * dim, 0);
        tl.sum_i.assign(nt, 0);
        tl.sum_i2.assign(nt, 0);
        tl.sum_j.assign(nt, 0);
        tl.sum_j2.assign(nt, 0);
        const std::uint64_t first = c * chunk;
        const std::uint64_t last = std::min<std::uint64_t>(replicas, first + chunk);
        for (std::uint64_t r = first; r < last; ++r) {
            std::mt19937_64 engine(derive_stream_seed(seed, r));
            std::size_t x = start;
            double event_time = sampler.holding_time(x, engine);
            for (std::size_t n = 0; n < nt; ++n) {
                while (event_time <= times[n]) {
                    x = sampler.next_state(x, engine);
                    event_time += sampler.holding_time(x, engine);
                }
                ++tl.counts[n * dim + x];
                const State st = state_at(space, x);
                tl.sum_i[n] += st.i;
                tl.sum_i2[n] += static_cast<std::int64_t>(st.i) * st.i;
                tl.sum_j[n] += st.j;
                tl.sum_j2[n] += static_cast<std::int64_t>(st.j) * st.j;
            }
        }
    });

    MonteCarloEstimate est;
    est.replicas = replicas;
    est.solution.times = times;
    est.solution.metadata["method"] = "monte_carlo";
    est.solution.metadata["replicas"] = std::to_string(replicas);
    est.solution.metadata["seed"] = std::to_string(seed);
    est.solution.metadata["rng"] = kRngAlgorithm;

    const double rd = static_cast<double>(replicas);
    for (std::size_t n = 0; n < nt; ++n) {
        std::vector<std::uint64_t> counts(dim, 0);
        std::int64_t si = 0, si2 = 0, sj = 0, sj2 = 0;
        for (const auto& tl : tallies) {
            for (std::size_t x = 0; x < dim; ++x)
                counts[x] += tl.counts[n * dim + x];
            si += tl.sum_i[n];
            si2 += tl.sum_i2[n];
            sj += tl.sum_j[n];
            sj2 += tl.sum_j2[n];
        }
        ProbabilityVector p;
        p.time = times[n];
        p.provenance = Provenance::monte_carlo;
        p.values.resize(dim);
        std::vector<double> se(dim);
        for (std::size_t x = 0; x < dim; ++x) {
            p.values[x] = static_cast<double>(counts[x]) / rd;
            se[x] = std::sqrt(p.values[x] * (1.0 - p.values[x]) / rd);
        }
        est.solution.states.push_back(std::move(p));
        est.standard_errors.push_back(std::move(se));

        auto mean_and_se = [rd](std::int64_t s1, std::int64_t s2) {
            const double mean = static_cast<double>(s1) / rd;
            const double var = (static_cast<double>(s2) / rd - mean * mean) * rd / (rd - 1.0);
            return std::pair{mean, std::sqrt(std::max(0.0, var) / rd)};
        };
        auto [mi, sei] = mean_and_se(si, si2);
        auto [mj, sej] = mean_and_se(sj, sj2);
        est.mean_servers.push_back(mi);
        est.mean_servers_se.push_back(sei);
        est.mean_orbit.push_back(mj);
        est.mean_orbit_se.push_back(sej);
    }
    return est;
}

} // namespace retrial
