#pragma once

#include "retrial/generator.hpp"
#include "retrial/probability.hpp"

#include <functional>
#include <vector>

namespace retrial {

/// Gaver-Stehfest weights V_1..V_K for an even order K in [2, 20].
struct StehfestWeights {
    int order = 0;
    std::vector<double> values;
    /// The same weights rounded once to long double.
    std::vector<long double> extended;
};

/// Order used by transient_via_ilt unless told otherwise. K = 18 is the
/// smallest order that keeps this chain within 1e-4 of uniformization; 20
/// leaves a margin. The weights reach ~1e12, so sums are carried in long double.
inline constexpr int kDefaultStehfestOrder = 20;

/// Weights evaluated in exact rational arithmetic and rounded once to double.
StehfestWeights stehfest_coefficients(int order);

/// f(t) ~ (ln 2 / t) sum_k V_k F(k ln 2 / t), accumulated in long double.
/// A transform evaluated in double limits the result to ~1e-16 * sum |V_k| / k.
double invert_at(const std::function<long double(long double)>& transform, double t,
                 const StehfestWeights& weights);

/// Entries within this band outside [0, 1] are clipped; beyond it the inversion is rejected.
inline constexpr double kIltClipBand = 1e-4;

/// P(t) for every t by inverting P*(s) = P(0)(sI - Q)^{-1} componentwise.
/// Raw results are checked against kIltClipBand, clipped to [0, 1] and
/// renormalised; per-time raw sums and minimum entries end up in metadata.
/// t = 0 returns p0 exactly. Throws NumericalError naming t and the state.
TransientSolution transient_via_ilt(const GeneratorMatrix& q, const ProbabilityVector& p0,
                                    const std::vector<double>& times, int order = kDefaultStehfestOrder);

} // namespace retrial
