#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pdp/diversity_index.hpp"
#include "pdp/numeric.hpp"
#include "pdp/partition.hpp"
#include "pdp/special_functions.hpp"

namespace pdp {

struct PriorMoments {
    double mean = 0.0;
    std::optional<double> second_moment;
};

namespace detail {

// E[sum_{i != j} s(i)^2 s(j)^2] under PDP(alpha, theta); equals the exact
// partition probability of the pattern {1,2}{3,4}.
inline double gini_pair_moment(const PdpParams& p) {
    const double a = p.alpha(), t = p.theta();
    return (t + a) * (1.0 - a) * (1.0 - a) /
           ((t + 1.0) * (t + 2.0) * (t + 3.0));
}

inline double shannon_prior_second_moment(const PdpParams& p) {
    const double a = p.alpha(), t = p.theta();
    const double diag =
        (1.0 - a) / (t + 1.0) *
        ((trigamma(2.0 - a) - trigamma(t + 2.0)) +
         std::pow(digamma(2.0 - a) - digamma(t + 2.0), 2));
    const double d1 = digamma(t + 2.0) - digamma(1.0 - a);
    const double cross =
        (t + a) / (t + 1.0) *
        (d1 * (digamma(t + 1.0 + a) - digamma(1.0 - a)) +
         d1 * (digamma(t + 2.0) - digamma(t + a + 1.0)) - trigamma(t + 2.0));
    return diag + cross;
}

inline double gini_prior_second_moment(const PdpParams& p) {
    const double a = p.alpha(), t = p.theta();
    const double quad = (1.0 - a) * (2.0 - a) * (3.0 - a) /
                        ((t + 1.0) * (t + 2.0) * (t + 3.0));
    return 1.0 - 2.0 * (1.0 - a) / (t + 1.0) + quad + gini_pair_moment(p);
}

}  // namespace detail

// Closed-form prior mean (and, where available, second moment) of the index
// under PDP(alpha, theta).
inline PriorMoments prior_moments(const PdpParams& params,
                                  const DiversityIndex& idx) {
    const double a = params.alpha(), t = params.theta();
    PriorMoments out;
    switch (idx.family()) {
        case DiversityIndex::Family::shannon:
            out.mean = digamma(t + 1.0) - digamma(1.0 - a);
            out.second_moment = detail::shannon_prior_second_moment(params);
            return out;
        case DiversityIndex::Family::generalized_gini: {
            double prod = 1.0;
            for (std::int64_t r = 0; r < idx.kappa(); ++r)
                prod *= (1.0 - a + static_cast<double>(r)) /
                        (t + 1.0 + static_cast<double>(r));
            out.mean = 1.0 - prod;
            if (idx.kappa() == 1)
                out.second_moment = detail::gini_prior_second_moment(params);
            return out;
        }
        case DiversityIndex::Family::generalized_gini_real:
            out.mean = 1.0 - beta_power_moment_real(BetaParams(1.0 - a, t + a),
                                                    idx.kappa_real());
            return out;
        case DiversityIndex::Family::renyi:
            throw UnsupportedIndexError(
                "prior_moments: no closed form for the Renyi entropy");
    }
    throw std::logic_error("prior_moments: unknown index family");
}

// Bayesian posterior mean E(G | pi^n) for Shannon and integer-kappa Gini.
inline double posterior_mean(const PdpParams& params, const Abundance& a,
                             const DiversityIndex& idx) {
    if (a.k() == 0) return prior_moments(params, idx).mean;
    const double alpha = params.alpha(), theta = params.theta();
    const double n = static_cast<double>(a.n());
    const double k = static_cast<double>(a.k());

    switch (idx.family()) {
        case DiversityIndex::Family::shannon: {
            KahanAccumulator sum;
            for (const auto c : a.counts()) {
                const double x = static_cast<double>(c) - alpha;
                sum.add(x * digamma(x + 1.0));
            }
            return digamma(theta + n + 1.0) -
                   (theta + alpha * k) / (theta + n) * digamma(1.0 - alpha) -
                   sum.value() / (theta + n);
        }
        case DiversityIndex::Family::generalized_gini: {
            const std::int64_t kappa = idx.kappa();
            KahanAccumulator sum;
            for (const auto c : a.counts()) {
                double ratio = 1.0;
                for (std::int64_t r = 0; r <= kappa; ++r)
                    ratio *= (static_cast<double>(c) - alpha + static_cast<double>(r)) /
                             (theta + n + static_cast<double>(r));
                sum.add(ratio);
            }
            double tail = theta + alpha * k;
            for (std::int64_t r = 0; r <= kappa; ++r) {
                if (r < kappa) tail *= 1.0 - alpha + static_cast<double>(r);
                tail /= theta + n + static_cast<double>(r);
            }
            return std::clamp(1.0 - sum.value() - tail, 0.0, 1.0);
        }
        default:
            throw UnsupportedIndexError(
                "posterior_mean: closed form exists only for Shannon and "
                "integer-kappa Gini; use posterior Monte Carlo instead");
    }
}

// One-step difference of the posterior entropy, by direct subtraction of the
// closed form (normative path).
inline double entropy_step_difference(const PdpParams& params,
                                      const Abundance& a, StepChoice c) {
    const DiversityIndex idx = DiversityIndex::shannon();
    return posterior_mean(params, apply_step(a, c), idx) -
           posterior_mean(params, a, idx);
}

// Same quantity from the expanded form of the difference (validation path).
// The expansion follows from the closed form and the identity
// x psi(x+1) - (x-1) psi(x) = psi(x) + 1.
inline double entropy_step_difference_expansion(const PdpParams& params,
                                                const Abundance& a,
                                                StepChoice c) {
    const double alpha = params.alpha(), theta = params.theta();
    const double n = static_cast<double>(a.n());
    const double k = static_cast<double>(a.k());
    KahanAccumulator acc;
    for (const auto cnt : a.counts()) {
        const double x = static_cast<double>(cnt) - alpha;
        acc.add(x * digamma(x + 1.0));
    }
    const double base =
        digamma(theta + n + 2.0) - digamma(theta + n + 1.0) +
        ((theta + alpha * k) * digamma(1.0 - alpha) + acc.value()) /
            ((theta + n) * (theta + n + 1.0));
    if (c.is_new_class())
        return base - (digamma(1.0 - alpha) + 1.0) / (theta + n + 1.0);
    const double x = static_cast<double>(a.count(c.index())) - alpha;
    return base - (digamma(x + 1.0) + 1.0) / (theta + n + 1.0);
}

enum class RenyiIntegrability {
    integrable,
    sufficient_condition_holds,
    sufficient_condition_fails,
};

inline RenyiIntegrability renyi_integrability(const PdpParams& params,
                                              double zeta) {
    if (!(zeta > 0.0) || zeta == 1.0)
        throw std::invalid_argument("renyi_integrability: zeta must be positive and != 1");
    if (zeta > 1.0) return RenyiIntegrability::integrable;
    if (zeta > params.alpha()) return RenyiIntegrability::sufficient_condition_holds;
    return RenyiIntegrability::sufficient_condition_fails;
}

// Incremental posterior-mean evaluator along one trajectory: O(1) per step
// for Shannon (digamma values come from recurrence tables) and O(kappa) for
// integer Gini. Also yields the exact one-step conditional variance at the
// current state, via the finite successor set.
class PosteriorTracker {
public:
    PosteriorTracker(const PdpParams& params, const DiversityIndex& idx)
        : params_(params), idx_(idx) {
        if (!idx.has_closed_posterior())
            throw UnsupportedIndexError("PosteriorTracker: closed-form index required");
        if (idx.family() == DiversityIndex::Family::shannon) {
            psi_one_minus_alpha_ = digamma(1.0 - params.alpha());
            psi_by_count_.push_back(0.0);  // unused slot for count 0
            psi_by_count_.push_back(digamma(2.0 - params.alpha()));
            psi_theta_n1_ = digamma(params.theta() + 1.0);
        } else {
            const std::int64_t kappa = idx.kappa();
            pk_ = 1.0;
            for (std::int64_t r = 0; r < kappa; ++r)
                pk_ *= 1.0 - params.alpha() + static_cast<double>(r);
            pk1_ = pk_ * (1.0 - params.alpha() + static_cast<double>(kappa));
        }
    }

    std::int64_t n() const { return n_; }
    std::int64_t k() const { return static_cast<std::int64_t>(counts_.size()); }
    const std::vector<std::int64_t>& counts() const { return counts_; }

    void advance(StepChoice c) {
        if (shannon()) {
            if (c.is_new_class()) {
                accum_ += (1.0 - params_.alpha()) * psi_by_count_[1];
                counts_.push_back(1);
            } else {
                const auto j = static_cast<std::size_t>(c.index() - 1);
                if (j >= counts_.size())
                    throw std::out_of_range("PosteriorTracker: class index out of range");
                accum_ += psi_of_count(counts_[j]) + 1.0;
                ++counts_[j];
                ensure_psi(counts_[j]);
            }
            psi_theta_n1_ += 1.0 / (params_.theta() + static_cast<double>(n_) + 1.0);
        } else {
            if (c.is_new_class()) {
                accum_ += pk1_;
                counts_.push_back(1);
            } else {
                const auto j = static_cast<std::size_t>(c.index() - 1);
                if (j >= counts_.size())
                    throw std::out_of_range("PosteriorTracker: class index out of range");
                accum_ += gini_increment(counts_[j]);
                ++counts_[j];
            }
        }
        ++n_;
    }

    // E(G | pi^n) at the current state.
    double mean() const {
        if (n_ == 0) throw std::logic_error("PosteriorTracker: empty state");
        return shannon() ? shannon_mean(n_, k(), accum_, psi_theta_n1_)
                         : gini_mean(n_, k(), accum_);
    }

    // Posterior mean at the state reached by taking `c` from here.
    double successor_mean(StepChoice c) const {
        if (shannon()) {
            const double psi_next =
                psi_theta_n1_ + 1.0 / (params_.theta() + static_cast<double>(n_) + 1.0);
            if (c.is_new_class())
                return shannon_mean(n_ + 1, k() + 1,
                                    accum_ + (1.0 - params_.alpha()) * psi_by_count_[1],
                                    psi_next);
            const auto j = static_cast<std::size_t>(c.index() - 1);
            return shannon_mean(n_ + 1, k(),
                                accum_ + psi_of_count(counts_[j]) + 1.0, psi_next);
        }
        if (c.is_new_class()) return gini_mean(n_ + 1, k() + 1, accum_ + pk1_);
        const auto j = static_cast<std::size_t>(c.index() - 1);
        return gini_mean(n_ + 1, k(), accum_ + gini_increment(counts_[j]));
    }

    // Exact Var(Z_{n+1} | B_n) at the current state: probability-weighted
    // spread of the k+1 successor means about the tower mean.
    double conditional_variance() const {
        const double alpha = params_.alpha(), theta = params_.theta();
        const double denom = theta + static_cast<double>(n_);
        const double z = mean();
        double var = 0.0;
        for (std::int64_t j = 1; j <= k(); ++j) {
            const double p =
                (static_cast<double>(counts_[static_cast<std::size_t>(j - 1)]) - alpha) / denom;
            const double d = successor_mean(StepChoice::existing(j)) - z;
            var += p * d * d;
        }
        const double pnew = (theta + alpha * static_cast<double>(k())) / denom;
        const double dnew = successor_mean(StepChoice::new_class()) - z;
        return var + pnew * dnew * dnew;
    }

private:
    bool shannon() const {
        return idx_.family() == DiversityIndex::Family::shannon;
    }

    void ensure_psi(std::int64_t count) {
        while (static_cast<std::int64_t>(psi_by_count_.size()) <= count) {
            const double c = static_cast<double>(psi_by_count_.size()) - 1.0;
            psi_by_count_.push_back(psi_by_count_.back() +
                                    1.0 / (c - params_.alpha() + 1.0));
        }
    }

    // psi(count - alpha + 1) from the recurrence table.
    double psi_of_count(std::int64_t count) const {
        return psi_by_count_[static_cast<std::size_t>(count)];
    }

    double shannon_mean(std::int64_t n, std::int64_t k, double accum,
                        double psi_theta_n1) const {
        const double denom = params_.theta() + static_cast<double>(n);
        return psi_theta_n1 -
               (params_.theta() + params_.alpha() * static_cast<double>(k)) / denom *
                   psi_one_minus_alpha_ -
               accum / denom;
    }

    double gini_mean(std::int64_t n, std::int64_t k, double accum) const {
        double d = 1.0;
        for (std::int64_t r = 0; r <= idx_.kappa(); ++r)
            d *= params_.theta() + static_cast<double>(n) + static_cast<double>(r);
        const double num =
            accum + (params_.theta() + params_.alpha() * static_cast<double>(k)) * pk_;
        return std::clamp(1.0 - num / d, 0.0, 1.0);
    }

    // prod_{r=0}^{kappa}(c+1-alpha+r) - prod_{r=0}^{kappa}(c-alpha+r),
    // telescoped to (kappa+1) * prod_{r=0}^{kappa-1}(c+1-alpha+r).
    double gini_increment(std::int64_t count) const {
        double prod = 1.0;
        for (std::int64_t r = 0; r < idx_.kappa(); ++r)
            prod *= static_cast<double>(count) + 1.0 - params_.alpha() + static_cast<double>(r);
        return (static_cast<double>(idx_.kappa()) + 1.0) * prod;
    }

    PdpParams params_;
    DiversityIndex idx_;
    std::vector<std::int64_t> counts_;
    std::int64_t n_ = 0;
    double accum_ = 0.0;  // Shannon: sum (c-a) psi(c-a+1); Gini: sum prod (c-a+r)
    double psi_theta_n1_ = 0.0;
    double psi_one_minus_alpha_ = 0.0;
    std::vector<double> psi_by_count_;
    double pk_ = 0.0;   // prod_{r=0}^{kappa-1} (1-alpha+r)
    double pk1_ = 0.0;  // prod_{r=0}^{kappa}   (1-alpha+r)
};

// Plug-in index values along a trajectory, O(1) per step.
class PluginTracker {
public:
    explicit PluginTracker(const DiversityIndex& idx) : idx_(idx) {
        if (!idx.has_closed_posterior())
            throw UnsupportedIndexError("PluginTracker: Shannon or integer Gini required");
    }

    void advance(StepChoice c) {
        if (c.is_new_class()) {
            counts_.push_back(1);
        } else {
            const auto j = static_cast<std::size_t>(c.index() - 1);
            const double m = static_cast<double>(++counts_[j]);
            if (idx_.family() == DiversityIndex::Family::shannon)
                sum_ += m * std::log(m) - (m - 1.0) * std::log(m - 1.0);
            else
                sum_ += std::pow(m, idx_.gini_exponent()) -
                        std::pow(m - 1.0, idx_.gini_exponent());
        }
        ++n_;
    }

    // Index of the empirical frequencies pi^n / n.
    double value() const {
        const double n = static_cast<double>(n_);
        if (idx_.family() == DiversityIndex::Family::shannon)
            return std::log(n) - sum_ / n;
        return 1.0 - (sum_ + static_cast<double>(counts_.size())) /
                         std::pow(n, idx_.gini_exponent());
    }

private:
    DiversityIndex idx_;
    std::vector<std::int64_t> counts_;
    std::int64_t n_ = 0;
    // Shannon: sum c log c over classes; Gini: sum (c^(kappa+1) - 1).
    double sum_ = 0.0;
};

}  // namespace pdp
