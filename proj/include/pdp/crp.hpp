#pragma once

#include <cstdint>
#include <vector>

#include "pdp/partition.hpp"
#include "pdp/rng.hpp"

namespace pdp {

// Pitman transition kernel at state pi^n: entry j <= k is
// (pi^n(j) - alpha)/(theta + n), entry k+1 is (theta + alpha k)/(theta + n).
inline std::vector<double> transition_probabilities(const PdpParams& params,
                                                    const Abundance& a) {
    const double alpha = params.alpha();
    const double denom = params.theta() + static_cast<double>(a.n());
    std::vector<double> p;
    p.reserve(static_cast<std::size_t>(a.k()) + 1);
    for (const auto c : a.counts())
        p.push_back((static_cast<double>(c) - alpha) / denom);
    p.push_back((params.theta() + alpha * static_cast<double>(a.k())) / denom);
    return p;
}

// Inverse-CDF draw over the ordered categories (existing classes in
// discovery order, new class last); ties resolve by cumulative-sum order.
inline StepChoice sample_step(const PdpParams& params, const Abundance& a,
                              RandomStream& stream) {
    const double alpha = params.alpha();
    const double denom = params.theta() + static_cast<double>(a.n());
    const double u = stream.uniform();
    double cum = 0.0;
    std::int64_t j = 0;
    for (const auto c : a.counts()) {
        ++j;
        cum += (static_cast<double>(c) - alpha) / denom;
        if (u < cum) return StepChoice::existing(j);
    }
    return StepChoice::new_class();
}

inline Trajectory sample_trajectory(const PdpParams& params, std::int64_t n,
                                    std::uint64_t seed) {
    if (n < 1)
        throw std::invalid_argument("sample_trajectory: n must be >= 1");
    Trajectory t{params, {}, seed};
    t.steps.reserve(static_cast<std::size_t>(n));
    RandomStream stream(seed);
    Abundance a;
    for (std::int64_t i = 0; i < n; ++i) {
        const StepChoice c = sample_step(params, a, stream);
        a.apply(c);
        t.steps.push_back(c);
    }
    return t;
}

}  // namespace pdp
