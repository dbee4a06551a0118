#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "pdp/crp.hpp"
#include "pdp/diagnostics.hpp"
#include "pdp/estimators.hpp"
#include "pdp/parallel.hpp"
#include "pdp/posterior_sampling.hpp"
#include "pdp/stick_breaking.hpp"

namespace pdp {

struct DoobReport {
    double lhs = 0.0;     // MC mean of (max_{n<=horizon} E(G|pi^n))^2
    double lhs_se = 0.0;
    double rhs = 0.0;     // 4 E(G^2), closed form
    double ratio = 0.0;
    double variance_sum = 0.0;     // MC mean of sum_n Var(Z_{n+1}|B_n)
    double variance_sum_se = 0.0;
    double second_moment = 0.0;    // closed-form E(G^2)
    std::int64_t trajectories = 0;
};

// Doob maximal-inequality experiment plus the conditional-variance sum of
// the martingale differences (which must stay below E(G^2)). The one-step
// conditional variance is exact at each visited state; only the trajectory
// average is Monte Carlo.
inline DoobReport doob_experiment(const PdpParams& params,
                                  const DiversityIndex& idx,
                                  std::int64_t horizon, std::int64_t m,
                                  std::uint64_t seed) {
    if (!idx.has_prior_second_moment())
        throw UnsupportedIndexError(
            "doob_experiment: closed-form second moment required (Shannon or Gini)");
    if (horizon < 1 || m < 1)
        throw std::invalid_argument("doob_experiment: horizon and m must be >= 1");

    struct Partial {
        double max_sq = 0.0, max_sq_sq = 0.0, vsum = 0.0, vsum_sq = 0.0;
    };
    const auto partials = map_chunks<Partial>(
        m, 256, [&](std::int64_t, std::int64_t begin, std::int64_t end) {
            Partial p;
            for (std::int64_t i = begin; i < end; ++i) {
                RandomStream stream(derive_seed(seed, static_cast<std::uint64_t>(i)));
                PosteriorTracker tracker(params, idx);
                Abundance state;
                double running_max = 0.0;
                double var_sum = 0.0;
                for (std::int64_t n = 0; n < horizon; ++n) {
                    const StepChoice c = sample_step(params, state, stream);
                    state.apply(c);
                    tracker.advance(c);
                    running_max = std::max(running_max, tracker.mean());
                    if (n + 1 < horizon) var_sum += tracker.conditional_variance();
                }
                const double msq = running_max * running_max;
                p.max_sq += msq;
                p.max_sq_sq += msq * msq;
                p.vsum += var_sum;
                p.vsum_sq += var_sum * var_sum;
            }
            return p;
        });

    long double sx = 0.0L, sxx = 0.0L, sv = 0.0L, svv = 0.0L;
    for (const auto& p : partials) {
        sx += p.max_sq;
        sxx += p.max_sq_sq;
        sv += p.vsum;
        svv += p.vsum_sq;
    }
    const long double md = static_cast<long double>(m);
    auto se = [&](long double s, long double ss) {
        if (m < 2) return 0.0;
        const long double var = std::max<long double>(0.0L, (ss - s * s / md) / (md - 1.0L));
        return static_cast<double>(std::sqrt(static_cast<double>(var / md)));
    };

    DoobReport r;
    r.second_moment = *prior_moments(params, idx).second_moment;
    r.lhs = static_cast<double>(sx / md);
    r.lhs_se = se(sx, sxx);
    r.rhs = 4.0 * r.second_moment;
    r.ratio = r.lhs / r.rhs;
    r.variance_sum = static_cast<double>(sv / md);
    r.variance_sum_se = se(sv, svv);
    r.trajectories = m;
    return r;
}

struct ConvergenceRow {
    std::int64_t n = 0;
    double mean_abs_gap = 0.0;  // MC mean of |posterior - plugin|
    double gap_se = 0.0;
    double mean_posterior = 0.0;
    double posterior_se = 0.0;
};

// Tracks the Bayesian and plug-in estimators along sampled trajectories and
// reports, per checkpoint, the mean absolute gap and the mean posterior
// (constant in n for the martingale).
inline std::vector<ConvergenceRow> convergence_experiment(
    const PdpParams& params, const DiversityIndex& idx,
    std::vector<std::int64_t> checkpoints, std::int64_t m, std::uint64_t seed) {
    if (checkpoints.empty())
        throw std::invalid_argument("convergence_experiment: no checkpoints");
    std::sort(checkpoints.begin(), checkpoints.end());
    if (checkpoints.front() < 1)
        throw std::invalid_argument("convergence_experiment: checkpoints must be >= 1");
    const std::int64_t horizon = checkpoints.back();
    const std::size_t nc = checkpoints.size();

    struct Partial {
        std::vector<double> gap, gap_sq, post, post_sq;
    };
    const auto partials = map_chunks<Partial>(
        m, 64, [&](std::int64_t, std::int64_t begin, std::int64_t end) {
            Partial p;
            p.gap.assign(nc, 0.0);
            p.gap_sq.assign(nc, 0.0);
            p.post.assign(nc, 0.0);
            p.post_sq.assign(nc, 0.0);
            for (std::int64_t i = begin; i < end; ++i) {
                RandomStream stream(derive_seed(seed, static_cast<std::uint64_t>(i)));
                PosteriorTracker tracker(params, idx);
                PluginTracker plugin(idx);
                Abundance state;
                std::size_t next = 0;
                for (std::int64_t n = 1; n <= horizon; ++n) {
                    const StepChoice c = sample_step(params, state, stream);
                    state.apply(c);
                    tracker.advance(c);
                    plugin.advance(c);
                    if (next < nc && n == checkpoints[next]) {
                        const double z = tracker.mean();
                        const double g = std::abs(z - plugin.value());
                        p.gap[next] += g;
                        p.gap_sq[next] += g * g;
                        p.post[next] += z;
                        p.post_sq[next] += z * z;
                        ++next;
                    }
                }
            }
            return p;
        });

    std::vector<ConvergenceRow> rows(nc);
    const long double md = static_cast<long double>(m);
    for (std::size_t c = 0; c < nc; ++c) {
        long double sg = 0.0L, sgg = 0.0L, sp = 0.0L, spp = 0.0L;
        for (const auto& p : partials) {
            sg += p.gap[c];
            sgg += p.gap_sq[c];
            sp += p.post[c];
            spp += p.post_sq[c];
        }
        auto se = [&](long double s, long double ss) {
            if (m < 2) return 0.0;
            const long double var =
                std::max<long double>(0.0L, (ss - s * s / md) / (md - 1.0L));
            return static_cast<double>(std::sqrt(static_cast<double>(var / md)));
        };
        rows[c].n = checkpoints[c];
        rows[c].mean_abs_gap = static_cast<double>(sg / md);
        rows[c].gap_se = se(sg, sgg);
        rows[c].mean_posterior = static_cast<double>(sp / md);
        rows[c].posterior_se = se(sp, spp);
    }
    return rows;
}

struct MomentEstimate {
    double mean = 0.0;
    double mean_se = 0.0;
    double second = 0.0;
    double second_se = 0.0;
};

struct StickMomentReport {
    MomentEstimate shannon;
    MomentEstimate gini;
    double mean_residual = 0.0;
    double shannon_bias_bound = 0.0;
    std::int64_t samples = 0;
};

// Stick-breaking Monte Carlo of the prior Shannon and Gini moments; both
// indexes are evaluated on each sampled mass sequence on the fly, without
// materializing the weights.
inline StickMomentReport prior_moment_mc(const PdpParams& params,
                                         std::int64_t m, double eps,
                                         std::uint64_t seed) {
    if (m < 2) throw std::invalid_argument("prior_moment_mc: m must be >= 2");

    struct Partial {
        double h = 0.0, h2 = 0.0, h3 = 0.0, h4 = 0.0;
        double g = 0.0, g2 = 0.0, g3 = 0.0, g4 = 0.0;
        double resid = 0.0;
    };
    const auto partials = map_chunks<Partial>(
        m, 256, [&](std::int64_t, std::int64_t begin, std::int64_t end) {
            Partial p;
            for (std::int64_t i = begin; i < end; ++i) {
                RandomStream stream(derive_seed(seed, static_cast<std::uint64_t>(i)));
                double h = 0.0, t2 = 0.0;
                const double resid = stick_break_visit(
                    params, eps, stream, [&](double w) {
                        if (w > 0.0) h -= w * std::log(w);
                        t2 += w * w;
                    });
                const double g = 1.0 - t2;
                p.h += h;
                p.h2 += h * h;
                p.h3 += h * h * h;
                p.h4 += h * h * h * h;
                p.g += g;
                p.g2 += g * g;
                p.g3 += g * g * g;
                p.g4 += g * g * g * g;
                p.resid += resid;
            }
            return p;
        });

    long double sh = 0.0L, sh2 = 0.0L, sh3 = 0.0L, sh4 = 0.0L;
    long double sg = 0.0L, sg2 = 0.0L, sg3 = 0.0L, sg4 = 0.0L, sr = 0.0L;
    for (const auto& p : partials) {
        sh += p.h; sh2 += p.h2; sh3 += p.h3; sh4 += p.h4;
        sg += p.g; sg2 += p.g2; sg3 += p.g3; sg4 += p.g4;
        sr += p.resid;
    }
    const long double md = static_cast<long double>(m);
    auto se = [&](long double s, long double ss) {
        const long double var = std::max<long double>(0.0L, (ss - s * s / md) / (md - 1.0L));
        return static_cast<double>(std::sqrt(static_cast<double>(var / md)));
    };

    StickMomentReport r;
    r.shannon.mean = static_cast<double>(sh / md);
    r.shannon.mean_se = se(sh, sh2);
    r.shannon.second = static_cast<double>(sh2 / md);
    r.shannon.second_se = se(sh2, sh4);
    r.gini.mean = static_cast<double>(sg / md);
    r.gini.mean_se = se(sg, sg2);
    r.gini.second = static_cast<double>(sg2 / md);
    r.gini.second_se = se(sg2, sg4);
    r.mean_residual = static_cast<double>(sr / md);
    r.shannon_bias_bound =
        truncation_bias_bound(r.mean_residual, DiversityIndex::shannon());
    r.samples = m;
    return r;
}

struct StepDifferenceScan {
    double max_abs_first_block = 0.0;
    double max_abs_total = 0.0;
    std::int64_t argmax_step = 0;
    std::int64_t steps = 0;
};

// |Z_{n+1} - Z_n| for the posterior entropy along one sampled trajectory;
// reports the running bound over the first block and the overall maximum.
inline StepDifferenceScan step_difference_scan(const PdpParams& params,
                                               std::int64_t steps,
                                               std::int64_t first_block,
                                               std::uint64_t seed) {
    if (steps < 2 || first_block < 1 || first_block > steps)
        throw std::invalid_argument("step_difference_scan: invalid block sizes");
    RandomStream stream(seed);
    PosteriorTracker tracker(params, DiversityIndex::shannon());
    Abundance state;
    StepDifferenceScan scan;
    scan.steps = steps;
    double prev = 0.0;
    for (std::int64_t n = 1; n <= steps; ++n) {
        const StepChoice c = sample_step(params, state, stream);
        state.apply(c);
        tracker.advance(c);
        const double z = tracker.mean();
        if (n > 1) {
            const double d = std::abs(z - prev);
            if (n <= first_block)
                scan.max_abs_first_block = std::max(scan.max_abs_first_block, d);
            if (d > scan.max_abs_total) {
                scan.max_abs_total = d;
                scan.argmax_step = n;
            }
        }
        prev = z;
    }
    return scan;
}

}  // namespace pdp
