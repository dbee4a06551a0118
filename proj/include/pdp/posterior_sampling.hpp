#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "pdp/diversity_index.hpp"
#include "pdp/parallel.hpp"
#include "pdp/partition.hpp"
#include "pdp/rng.hpp"
#include "pdp/stick_breaking.hpp"

namespace pdp {

// Normalized independent Gamma draws.
inline std::vector<double> sample_dirichlet(std::span<const double> shapes,
                                            RandomStream& stream) {
    if (shapes.empty())
        throw std::invalid_argument("sample_dirichlet: empty shape vector");
    std::vector<double> out;
    out.reserve(shapes.size());
    double total = 0.0;
    for (const double s : shapes) {
        if (!(s > 0.0))
            throw std::invalid_argument("sample_dirichlet: shapes must be positive");
        const double g = std::max(stream.gamma(s), 1e-300);
        out.push_back(g);
        total += g;
    }
    for (auto& x : out) x /= total;
    return out;
}

// Draw from the posterior law of the masses given pi^n:
// head ~ Dirichlet(pi(1)-alpha, ..., pi(k)-alpha, theta+alpha k), and the
// last head component scales an independent PDP(alpha, theta+alpha k) tail.
struct PosteriorSample {
    std::vector<double> head;      // length k+1
    MassSequence tail;             // stick-breaking draw at shifted parameters
    std::vector<double> combined;  // head[1..k] then head[k+1] * tail weights
    double scaled_residual = 0.0;  // head[k+1] * tail residual
};

inline PosteriorSample sample_posterior_masses(const PdpParams& params,
                                               const Abundance& a, double eps,
                                               std::uint64_t seed) {
    if (a.k() == 0)
        throw std::invalid_argument("sample_posterior_masses: empty abundance");
    const double alpha = params.alpha();
    const std::int64_t k = a.k();

    std::vector<double> shapes;
    shapes.reserve(static_cast<std::size_t>(k) + 1);
    for (const auto c : a.counts())
        shapes.push_back(static_cast<double>(c) - alpha);
    shapes.push_back(params.theta() + alpha * static_cast<double>(k));

    // Head and tail use disjoint derived streams, so they are independent.
    RandomStream head_stream(derive_seed(seed, 1));
    RandomStream tail_stream(derive_seed(seed, 2));

    PosteriorSample s;
    s.head = sample_dirichlet(shapes, head_stream);
    const PdpParams shifted(alpha,
                            params.theta() + alpha * static_cast<double>(k));
    s.tail = stick_breaking_sample(shifted, eps, tail_stream);

    const double scale = s.head.back();
    s.combined.assign(s.head.begin(), s.head.end() - 1);
    s.combined.reserve(s.combined.size() + s.tail.weights.size());
    for (const double w : s.tail.weights) s.combined.push_back(scale * w);
    s.scaled_residual = scale * s.tail.residual;
    return s;
}

// Reported allowance for the index mass dropped by truncation at scaled
// residual r, with the generation cap as the piece-count scale.
inline double truncation_bias_bound(double r, const DiversityIndex& idx) {
    if (!(r > 0.0)) return 0.0;
    const double cap = static_cast<double>(kStickBreakingCap);
    switch (idx.family()) {
        case DiversityIndex::Family::shannon:
            return r * (std::log(1.0 / r) + std::log(cap));
        case DiversityIndex::Family::generalized_gini:
        case DiversityIndex::Family::generalized_gini_real:
            return std::pow(r, idx.gini_exponent());
        case DiversityIndex::Family::renyi: {
            const double z = idx.zeta();
            const double dropped =
                z < 1.0 ? std::pow(cap, 1.0 - z) * std::pow(r, z) : std::pow(r, z);
            return dropped / std::abs(1.0 - z);
        }
    }
    return 0.0;
}

struct McEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
    std::int64_t samples = 0;
    double mean_scaled_residual = 0.0;
    double bias_bound = 0.0;
};

// Monte Carlo posterior mean of the index over m independent posterior
// draws. Deterministic in (params, a, idx, m, seed, eps) regardless of the
// number of worker threads: per-sample streams are derived from the global
// sample index and chunk partials fold in fixed order.
inline McEstimate posterior_mc_mean(const PdpParams& params, const Abundance& a,
                                    const DiversityIndex& idx, std::int64_t m,
                                    std::uint64_t seed, double eps = 1e-12) {
    if (m < 2) throw std::invalid_argument("posterior_mc_mean: m must be >= 2");

    struct Partial {
        double sum = 0.0, sumsq = 0.0, resid = 0.0;
    };
    const auto partials = map_chunks<Partial>(
        m, 1024, [&](std::int64_t, std::int64_t begin, std::int64_t end) {
            Partial p;
            for (std::int64_t i = begin; i < end; ++i) {
                const PosteriorSample s = sample_posterior_masses(
                    params, a, eps, derive_seed(seed, static_cast<std::uint64_t>(i)));
                const double x = plugin_value(s.combined, idx);
                p.sum += x;
                p.sumsq += x * x;
                p.resid += s.scaled_residual;
            }
            return p;
        });

    long double sum = 0.0L, sumsq = 0.0L, resid = 0.0L;
    for (const auto& p : partials) {
        sum += p.sum;
        sumsq += p.sumsq;
        resid += p.resid;
    }
    const long double md = static_cast<long double>(m);
    const double mean = static_cast<double>(sum / md);
    const long double var =
        std::max<long double>(0.0L, (sumsq - sum * sum / md) / (md - 1.0L));
    McEstimate est;
    est.estimate = mean;
    est.std_error = static_cast<double>(std::sqrt(static_cast<double>(var / md)));
    est.samples = m;
    est.mean_scaled_residual = static_cast<double>(resid / md);
    est.bias_bound = truncation_bias_bound(est.mean_scaled_residual, idx);
    return est;
}

}  // namespace pdp
