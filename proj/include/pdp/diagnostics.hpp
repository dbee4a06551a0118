#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "pdp/crp.hpp"
#include "pdp/estimators.hpp"
#include "pdp/partition.hpp"

namespace pdp {

// Values of a structural sequence along one trajectory, with step-to-step
// increments and the steps where the increment sits inside the flatness
// tolerance. increments[i] = values[i] - values[i-1] (values[-1] := 0).
struct SequenceReport {
    std::vector<std::int64_t> times;
    std::vector<double> values;
    std::vector<double> increments;
    std::vector<std::int64_t> flat_steps;
};

namespace detail {

inline void finish_report(SequenceReport& r, double flat_tol) {
    r.increments.resize(r.values.size());
    double prev = 0.0;
    for (std::size_t i = 0; i < r.values.size(); ++i) {
        r.increments[i] = r.values[i] - prev;
        prev = r.values[i];
        if (std::abs(r.increments[i]) <= flat_tol)
            r.flat_steps.push_back(r.times[i]);
    }
}

inline void require_closed_form(const DiversityIndex& idx, const char* who) {
    if (!idx.has_closed_posterior())
        throw UnsupportedIndexError(std::string(who) +
                                    ": Shannon or integer-kappa Gini required");
}

}  // namespace detail

// l(pi^n) = n (G(1^n) - G(pi^n)) for the plug-in index: the departure of the
// sample from all-singletons. Shannon values are sum pi(j) log pi(j); Gini
// values are -n + sum pi(j)^(kappa+1). Accumulated by exact per-step
// increments, so new-class steps are flat to the last bit.
inline SequenceReport ell_sequence(const Trajectory& t,
                                   const DiversityIndex& idx,
                                   double flat_tol = 1e-9) {
    detail::require_closed_form(idx, "ell_sequence");
    const bool shannon = idx.family() == DiversityIndex::Family::shannon;
    SequenceReport r;
    r.times.reserve(t.steps.size());
    r.values.reserve(t.steps.size());
    std::vector<std::int64_t> counts;
    double value = 0.0;
    std::int64_t n = 0;
    for (const auto& c : t.steps) {
        if (c.is_new_class()) {
            counts.push_back(1);
        } else {
            const auto j = static_cast<std::size_t>(c.index() - 1);
            if (j >= counts.size())
                throw std::invalid_argument("ell_sequence: invalid trajectory step");
            const double m = static_cast<double>(++counts[j]);
            if (shannon)
                value += m * std::log(m) - (m - 1.0) * std::log(m - 1.0);
            else
                value += std::pow(m, idx.gini_exponent()) -
                         std::pow(m - 1.0, idx.gini_exponent()) - 1.0;
        }
        r.times.push_back(++n);
        r.values.push_back(value);
    }
    detail::finish_report(r, flat_tol);
    return r;
}

// L(pi^n) = (theta+n) (E(H|1^n) - E(H|pi^n)), and the
// prod_{r=0}^{kappa}(theta+n+r)-scaled analogue for integer Gini.
// Accumulated by the telescoped exact increments (psi(m-alpha) - psi(1-alpha)
// at an existing-class step of new count m; zero at new-class steps).
inline SequenceReport big_l_sequence(const PdpParams& params,
                                     const Trajectory& t,
                                     const DiversityIndex& idx,
                                     double flat_tol = 1e-9) {
    detail::require_closed_form(idx, "big_l_sequence");
    const bool shannon = idx.family() == DiversityIndex::Family::shannon;
    const double alpha = params.alpha();

    double pk = 1.0, pk1 = 0.0, akpk = 0.0;
    std::vector<double> psi_by_count;
    if (shannon) {
        psi_by_count.push_back(0.0);
        psi_by_count.push_back(digamma(1.0 - alpha));
    } else {
        for (std::int64_t r = 0; r < idx.kappa(); ++r)
            pk *= 1.0 - alpha + static_cast<double>(r);
        pk1 = pk * (1.0 - alpha + static_cast<double>(idx.kappa()));
        akpk = alpha * pk;
    }

    SequenceReport r;
    std::vector<std::int64_t> counts;
    double value = 0.0;
    std::int64_t n = 0;
    for (const auto& c : t.steps) {
        if (c.is_new_class()) {
            counts.push_back(1);
        } else {
            const auto j = static_cast<std::size_t>(c.index() - 1);
            if (j >= counts.size())
                throw std::invalid_argument("big_l_sequence: invalid trajectory step");
            const std::int64_t m = ++counts[j];
            if (shannon) {
                while (static_cast<std::int64_t>(psi_by_count.size()) <= m) {
                    const double prev = static_cast<double>(psi_by_count.size()) - 1.0;
                    psi_by_count.push_back(psi_by_count.back() + 1.0 / (prev - alpha));
                }
                value += psi_by_count[static_cast<std::size_t>(m)] - psi_by_count[1];
            } else {
                double prod = 1.0;
                for (std::int64_t q = 0; q < idx.kappa(); ++q)
                    prod *= static_cast<double>(m) - alpha + static_cast<double>(q);
                value += (static_cast<double>(idx.kappa()) + 1.0) * prod - pk1 - akpk;
            }
        }
        r.times.push_back(++n);
        r.values.push_back(value);
    }
    detail::finish_report(r, flat_tol);
    return r;
}

// Delta_n = (n+theta) E(G|pi^n) - (n-1+theta) E(G|pi^(n-1)) for Shannon,
// with the product scaling for integer Gini; E(G|pi^0) is the prior mean.
// Evaluated by the exact closed forms of the two branch cases.
inline SequenceReport delta_sequence(const PdpParams& params,
                                     const Trajectory& t,
                                     const DiversityIndex& idx,
                                     double flat_tol = 1e-9) {
    detail::require_closed_form(idx, "delta_sequence");
    const bool shannon = idx.family() == DiversityIndex::Family::shannon;
    const double alpha = params.alpha(), theta = params.theta();

    SequenceReport r;
    std::vector<std::int64_t> counts;
    std::int64_t n = 0;
    for (const auto& c : t.steps) {
        ++n;
        std::int64_t prev_count = 0;  // 0 marks a new class
        if (c.is_new_class()) {
            counts.push_back(1);
        } else {
            const auto j = static_cast<std::size_t>(c.index() - 1);
            if (j >= counts.size())
                throw std::invalid_argument("delta_sequence: invalid trajectory step");
            prev_count = counts[j]++;
        }
        double value;
        const double base = prev_count == 0
                                ? 1.0 - alpha
                                : static_cast<double>(prev_count) + 1.0 - alpha;
        if (shannon) {
            value = digamma(theta + static_cast<double>(n)) - digamma(base);
        } else {
            double dn = 1.0, cn = 1.0;
            for (std::int64_t q = 0; q < idx.kappa(); ++q) {
                dn *= theta + static_cast<double>(n) + static_cast<double>(q);
                cn *= base + static_cast<double>(q);
            }
            value = (static_cast<double>(idx.kappa()) + 1.0) * (dn - cn);
        }
        r.times.push_back(n);
        r.values.push_back(value);
    }
    detail::finish_report(r, flat_tol);
    return r;
}

enum class ExtremalKind { min_over_k, max_over_k };

// Extremal abundance over all pi^n with exactly k classes: the minimum
// concentrates n-k+1 individuals in one class with k-1 singletons; the
// maximum splits {1,..,n} as uniformly as possible.
inline Abundance extremal_abundance(std::int64_t n, std::int64_t k,
                                    ExtremalKind which) {
    if (k < 1 || k > n)
        throw std::invalid_argument("extremal_abundance: need 1 <= k <= n");
    std::vector<std::int64_t> counts;
    counts.reserve(static_cast<std::size_t>(k));
    if (which == ExtremalKind::min_over_k) {
        counts.push_back(n - k + 1);
        counts.insert(counts.end(), static_cast<std::size_t>(k - 1), 1);
    } else {
        const std::int64_t q = n / k, rem = n % k;
        counts.insert(counts.end(), static_cast<std::size_t>(rem), q + 1);
        counts.insert(counts.end(), static_cast<std::size_t>(k - rem), q);
    }
    return Abundance(std::move(counts));
}

struct TowerCheck {
    bool pass = false;
    double residual = 0.0;
};

// One-step conditional-expectation consistency of the posterior mean:
// E(G|pi^n) must equal the transition-weighted mean over all successors.
inline TowerCheck verify_tower(const PdpParams& params, const Abundance& a,
                               const DiversityIndex& idx, double tol) {
    detail::require_closed_form(idx, "verify_tower");
    const auto probs = transition_probabilities(params, a);
    KahanAccumulator mixed;
    for (std::int64_t j = 1; j <= a.k(); ++j)
        mixed.add(probs[static_cast<std::size_t>(j - 1)] *
                  posterior_mean(params, apply_step(a, StepChoice::existing(j)), idx));
    mixed.add(probs.back() *
              posterior_mean(params, apply_step(a, StepChoice::new_class()), idx));
    const double residual = std::abs(posterior_mean(params, a, idx) - mixed.value());
    return {residual <= tol, residual};
}

struct Corollary1Check {
    bool pass = true;
    std::int64_t counterexample_step = 0;  // 0 when none
};

// Five-way equivalence at every step n >= 2: flatness of the two ell
// sequences, a new-class step, and flatness of the two L sequences must all
// agree (flat means |increment| <= tol).
inline Corollary1Check verify_corollary1(const Trajectory& t,
                                         const PdpParams& params,
                                         double tol = 1e-9,
                                         std::int64_t kappa = 1) {
    const auto gg = DiversityIndex::generalized_gini(kappa);
    const auto sh = DiversityIndex::shannon();
    const SequenceReport ell_g = ell_sequence(t, gg, tol);
    const SequenceReport ell_h = ell_sequence(t, sh, tol);
    const SequenceReport big_g = big_l_sequence(params, t, gg, tol);
    const SequenceReport big_h = big_l_sequence(params, t, sh, tol);
    for (std::size_t i = 1; i < t.steps.size(); ++i) {
        const bool is_new = t.steps[i].is_new_class();
        const bool f1 = std::abs(ell_g.increments[i]) <= tol;
        const bool f2 = std::abs(ell_h.increments[i]) <= tol;
        const bool f4 = std::abs(big_g.increments[i]) <= tol;
        const bool f5 = std::abs(big_h.increments[i]) <= tol;
        if (f1 != is_new || f2 != is_new || f4 != is_new || f5 != is_new)
            return {false, static_cast<std::int64_t>(i) + 1};
    }
    return {};
}

}  // namespace pdp
