#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace pdp {

// Prior parameters of PDP(alpha, theta): 0 <= alpha < 1, theta > -alpha.
class PdpParams {
public:
    PdpParams(double alpha, double theta) : alpha_(alpha), theta_(theta) {
        if (!(alpha >= 0.0 && alpha < 1.0) || !std::isfinite(alpha))
            throw std::invalid_argument("PdpParams: alpha must lie in [0, 1)");
        if (!(theta + alpha > 0.0) || !std::isfinite(theta))
            throw std::invalid_argument("PdpParams: theta must exceed -alpha");
    }

    double alpha() const { return alpha_; }
    double theta() const { return theta_; }

    bool operator==(const PdpParams&) const = default;

private:
    double alpha_;
    double theta_;
};

// One sequential update: either the next observation joins existing class j
// (1-based, discovery order) or it opens a new class.
class StepChoice {
public:
    static StepChoice new_class() { return StepChoice(0); }

    static StepChoice existing(std::int64_t j) {
        if (j < 1)
            throw std::invalid_argument("StepChoice: class index must be >= 1");
        return StepChoice(j);
    }

    bool is_new_class() const { return index_ == 0; }

    // Valid only when !is_new_class().
    std::int64_t index() const { return index_; }

    bool operator==(const StepChoice&) const = default;

private:
    explicit StepChoice(std::int64_t j) : index_(j) {}
    std::int64_t index_;
};

// Species counts in discovery order. The empty state is pi^0.
class Abundance {
public:
    Abundance() = default;

    explicit Abundance(std::vector<std::int64_t> counts)
        : counts_(std::move(counts)) {
        for (const auto c : counts_) {
            if (c < 1)
                throw std::invalid_argument("Abundance: every count must be >= 1");
            n_ += c;
        }
    }

    const std::vector<std::int64_t>& counts() const { return counts_; }
    std::int64_t n() const { return n_; }
    std::int64_t k() const { return static_cast<std::int64_t>(counts_.size()); }

    std::int64_t count(std::int64_t j) const {
        check_index(j);
        return counts_[static_cast<std::size_t>(j - 1)];
    }

    void apply(StepChoice c) {
        if (c.is_new_class()) {
            counts_.push_back(1);
        } else {
            check_index(c.index());
            ++counts_[static_cast<std::size_t>(c.index() - 1)];
        }
        ++n_;
    }

    bool operator==(const Abundance&) const = default;

private:
    void check_index(std::int64_t j) const {
        if (j < 1 || j > k())
            throw std::out_of_range("Abundance: class index out of range");
    }

    std::vector<std::int64_t> counts_;
    std::int64_t n_ = 0;
};

inline Abundance apply_step(Abundance a, StepChoice c) {
    a.apply(c);
    return a;
}

// Ordered record of CRP steps; replaying from pi^0 yields pi^n for every
// prefix. Step 1 is always NewClass.
struct Trajectory {
    PdpParams params;
    std::vector<StepChoice> steps;
    std::uint64_t seed = 0;
};

inline Abundance replay(std::span<const StepChoice> steps) {
    Abundance a;
    for (const auto& c : steps) a.apply(c);
    return a;
}

// Strictly increasing times tau^1 = 1 < tau^2 < ... at which a new species
// appears.
inline std::vector<std::int64_t> new_species_times(const Trajectory& t) {
    std::vector<std::int64_t> times;
    for (std::size_t i = 0; i < t.steps.size(); ++i)
        if (t.steps[i].is_new_class())
            times.push_back(static_cast<std::int64_t>(i) + 1);
    return times;
}

}  // namespace pdp
