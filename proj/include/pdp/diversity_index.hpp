#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

#include "pdp/numeric.hpp"

namespace pdp {

struct UnsupportedIndexError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Selector for Shannon / GeneralizedGini(kappa) / Rényi(zeta). Gini means
// GeneralizedGini(1). Integer kappa keeps the closed-form posterior; real
// kappa and Rényi are plug-in / Monte Carlo only.
class DiversityIndex {
public:
    enum class Family { shannon, generalized_gini, generalized_gini_real, renyi };

    static DiversityIndex shannon() { return {Family::shannon, 0.0}; }
    static DiversityIndex gini() { return generalized_gini(1); }

    static DiversityIndex generalized_gini(std::int64_t kappa) {
        if (kappa < 1)
            throw std::invalid_argument("generalized_gini: kappa must be a positive integer");
        return {Family::generalized_gini, static_cast<double>(kappa)};
    }

    static DiversityIndex generalized_gini_real(double kappa) {
        if (!(kappa > 0.0) || !std::isfinite(kappa))
            throw std::invalid_argument("generalized_gini_real: kappa must be positive");
        return {Family::generalized_gini_real, kappa};
    }

    static DiversityIndex renyi(double zeta) {
        if (!(zeta > 0.0) || zeta == 1.0 || !std::isfinite(zeta))
            throw std::invalid_argument("renyi: zeta must be positive and != 1");
        return {Family::renyi, zeta};
    }

    Family family() const { return family_; }

    std::int64_t kappa() const { return static_cast<std::int64_t>(param_); }
    double kappa_real() const { return param_; }
    double zeta() const { return param_; }

    // Exponent kappa + 1 in sum_i s(i)^(kappa+1), for either Gini family.
    double gini_exponent() const { return param_ + 1.0; }

    bool has_closed_posterior() const {
        return family_ == Family::shannon || family_ == Family::generalized_gini;
    }
    bool has_prior_mean() const { return family_ != Family::renyi; }
    bool has_prior_second_moment() const {
        return family_ == Family::shannon ||
               (family_ == Family::generalized_gini && kappa() == 1);
    }

    std::string name() const {
        switch (family_) {
            case Family::shannon: return "shannon";
            case Family::generalized_gini:
                return kappa() == 1 ? "gini" : "ggini:" + std::to_string(kappa());
            case Family::generalized_gini_real:
                return "ggini:" + std::to_string(param_);
            case Family::renyi: return "renyi:" + std::to_string(param_);
        }
        return "?";
    }

    bool operator==(const DiversityIndex&) const = default;

private:
    DiversityIndex(Family f, double p) : family_(f), param_(p) {}
    Family family_;
    double param_;
};

// Index value at an explicit (possibly deficient) mass vector; entries >= 0,
// total in (0, 1]. 0 log 0 = 0.
inline double plugin_value(std::span<const double> masses,
                           const DiversityIndex& idx) {
    double total = 0.0;
    for (const double x : masses) {
        if (!(x >= 0.0))
            throw std::domain_error("plugin_value: masses must be nonnegative");
        total += x;
    }
    if (!(total > 0.0))
        throw std::domain_error("plugin_value: all entries are zero");
    if (total > 1.0 + 1e-9)
        throw std::domain_error("plugin_value: masses must sum to at most 1");

    KahanAccumulator acc;
    switch (idx.family()) {
        case DiversityIndex::Family::shannon:
            for (const double x : masses)
                if (x > 0.0) acc.add(-x * std::log(x));
            return acc.value();
        case DiversityIndex::Family::generalized_gini:
        case DiversityIndex::Family::generalized_gini_real: {
            const double e = idx.gini_exponent();
            for (const double x : masses)
                if (x > 0.0) acc.add(std::pow(x, e));
            return 1.0 - acc.value();
        }
        case DiversityIndex::Family::renyi: {
            const double z = idx.zeta();
            for (const double x : masses)
                if (x > 0.0) acc.add(std::pow(x, z));
            return std::log(acc.value()) / (1.0 - z);
        }
    }
    throw std::logic_error("plugin_value: unknown index family");
}

}  // namespace pdp
