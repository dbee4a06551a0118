#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "pdp/partition.hpp"
#include "pdp/rng.hpp"

namespace pdp {

inline constexpr std::int64_t kStickBreakingCap = 100000;

// Truncated size-biased realization: weights W_j * prod_{i<j}(1 - W_i) with
// W_j ~ Beta(1 - alpha, theta + alpha j). `residual` is the mass left when
// generation stopped (below `truncation_eps`, unless the term cap bit first).
struct MassSequence {
    std::vector<double> weights;
    double residual = 1.0;
    double truncation_eps = 0.0;
};

// Core generator; calls visitor(w_hat) per weight. Returns the residual.
template <typename Visitor>
double stick_break_visit(const PdpParams& params, double eps,
                         RandomStream& stream, Visitor&& visit,
                         std::int64_t cap = kStickBreakingCap) {
    if (!(eps > 0.0 && eps < 1.0))
        throw std::invalid_argument("stick breaking: eps must lie in (0, 1)");
    const double a = 1.0 - params.alpha();
    double remaining = 1.0;
    for (std::int64_t j = 1; j <= cap && remaining >= eps; ++j) {
        const double w =
            stream.beta(a, params.theta() + params.alpha() * static_cast<double>(j));
        visit(w * remaining);
        remaining *= (1.0 - w);
    }
    return remaining;
}

inline MassSequence stick_breaking_sample(const PdpParams& params, double eps,
                                          std::uint64_t seed) {
    RandomStream stream(seed);
    MassSequence seq;
    seq.truncation_eps = eps;
    seq.residual = stick_break_visit(params, eps, stream,
                                     [&](double w) { seq.weights.push_back(w); });
    return seq;
}

inline MassSequence stick_breaking_sample(const PdpParams& params, double eps,
                                          RandomStream& stream) {
    MassSequence seq;
    seq.truncation_eps = eps;
    seq.residual = stick_break_visit(params, eps, stream,
                                     [&](double w) { seq.weights.push_back(w); });
    return seq;
}

}  // namespace pdp
