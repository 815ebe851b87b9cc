#include "retrial/inversion.hpp"

#include "retrial/errors.hpp"
#include "retrial/laplace.hpp"
#include "parallel.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace retrial {

namespace {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

cpp_int factorial(int n) {
    cpp_int f = 1;
    for (int k = 2; k <= n; ++k)
        f *= k;
    return f;
}

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

} // namespace

StehfestWeights stehfest_coefficients(int order) {
    if (order < 2 || order > 20 || order % 2 != 0)
        throw DomainError("Stehfest order must be even and in [2, 20], got " + std::to_string(order));

    const int half = order / 2;
    StehfestWeights w;
    w.order = order;
    w.values.reserve(order);
    for (int k = 1; k <= order; ++k) {
        cpp_rational sum = 0;
        for (int m = (k + 1) / 2; m <= std::min(k, half); ++m) {
            cpp_int num = boost::multiprecision::pow(cpp_int(m), half) * factorial(2 * m);
            cpp_int den = factorial(half - m) * factorial(m) * factorial(m - 1) * factorial(k - m) *
                          factorial(2 * m - k);
            sum += cpp_rational(num, den);
        }
        if ((k + half) % 2 != 0)
            sum = -sum;
        w.values.push_back(static_cast<double>(sum));
        w.extended.push_back(static_cast<long double>(sum));
    }
    return w;
}

double invert_at(const std::function<long double(long double)>& transform, double t,
                 const StehfestWeights& weights) {
    if (!(t > 0.0) || !std::isfinite(t))
        throw DomainError("inversion time must be positive");
    const long double a = std::numbers::ln2_v<long double> / t;
    long double sum = 0.0L;
    for (int k = 1; k <= weights.order; ++k)
        sum += weights.extended[k - 1] * transform(k * a);
    return static_cast<double>(a * sum);
}

TransientSolution transient_via_ilt(const GeneratorMatrix& q, const ProbabilityVector& p0,
                                    const std::vector<double>& times, int order) {
    const auto weights = stehfest_coefficients(order);
    for (double t : times)
        if (!(t >= 0.0) || !std::isfinite(t))
            throw DomainError("inversion times must be nonnegative");
    for (std::size_t k = 1; k < times.size(); ++k)
        if (!(times[k] > times[k - 1]))
            throw DomainError("time grid must be strictly increasing");
    if (p0.size() != q.dim())
        throw DomainError("initial distribution has wrong dimension");

    const std::size_t dim = q.dim();
    std::vector<std::vector<double>> raw(times.size());

    // Every (t, k) abscissa is an independent resolvent solve.
    const auto order_s = static_cast<std::size_t>(order);
    std::vector<std::vector<long double>> pstar(times.size() * order_s);
    detail::parallel_for(times.size() * order_s, [&](std::size_t task) {
        const double t = times[task / order_s];
        if (t == 0.0)
            return;
        const long double s = static_cast<long double>(task % order_s + 1) * std::numbers::ln2_v<long double> / t;
        pstar[task] = solve_resolvent_extended(assemble_resolvent(q, static_cast<double>(s)), q, s, p0);
    });

    TransientSolution out;
    out.times = times;
    out.metadata["method"] = "ilt";
    out.metadata["algorithm"] = "gaver-stehfest";
    out.metadata["K"] = std::to_string(order);

    std::ostringstream raw_sums;
    std::ostringstream raw_mins;
    for (std::size_t n = 0; n < times.size(); ++n) {
        const double t = times[n];
        ProbabilityVector p;
        p.time = t;
        p.provenance = Provenance::ilt;
        if (t == 0.0) {
            p.values = p0.values;
            out.states.push_back(std::move(p));
            raw_sums << (n ? ";" : "") << "1";
            raw_mins << (n ? ";" : "") << "0";
            continue;
        }

        const long double a = std::numbers::ln2_v<long double> / t;
        std::vector<long double> acc(dim, 0.0L);
        for (std::size_t k = 0; k < order_s; ++k) {
            const auto& x = pstar[n * order_s + k];
            const long double v = weights.extended[k];
            for (std::size_t idx = 0; idx < dim; ++idx)
                acc[idx] += v * x[idx];
        }
        p.values.resize(dim);
        long double raw_sum = 0.0L;
        double raw_min = 1.0;
        for (std::size_t idx = 0; idx < dim; ++idx) {
            double& e = p.values[idx];
            e = static_cast<double>(a * acc[idx]);
            raw_sum += a * acc[idx];
            raw_min = std::min(raw_min, e);
            if (e < -kIltClipBand || e > 1.0 + kIltClipBand) {
                std::string where = "state index " + std::to_string(idx);
                if (q.space()) {
                    auto st = state_at(*q.space(), idx);
                    where = "state (" + std::to_string(st.i) + "," + std::to_string(st.j) + ")";
                }
                throw NumericalError("inverse Laplace value " + format_double(e) + " at t=" + format_double(t) +
                                     ", " + where + " outside [-1e-4, 1+1e-4]");
            }
            e = std::clamp(e, 0.0, 1.0);
        }
        double clipped_sum = 0.0;
        for (double e : p.values)
            clipped_sum += e;
        for (double& e : p.values)
            e /= clipped_sum;
        raw_sums << (n ? ";" : "") << format_double(static_cast<double>(raw_sum));
        raw_mins << (n ? ";" : "") << format_double(raw_min);
        out.states.push_back(std::move(p));
    }
    out.metadata["raw_sums"] = raw_sums.str();
    out.metadata["raw_min_entries"] = raw_mins.str();
    return out;
}

} // namespace retrial
