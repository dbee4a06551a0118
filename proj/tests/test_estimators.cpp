#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "pdp/crp.hpp"
#include "pdp/diagnostics.hpp"
#include "pdp/estimators.hpp"
#include "pdp/experiments.hpp"
#include "oracles.hpp"

using namespace pdp;

namespace {
const DiversityIndex kShannon = DiversityIndex::shannon();
const DiversityIndex kGini = DiversityIndex::gini();
const DiversityIndex kGini2 = DiversityIndex::generalized_gini(2);

Abundance abundance(std::initializer_list<std::int64_t> counts) {
    return Abundance(std::vector<std::int64_t>(counts));
}
}  // namespace

TEST_CASE("prior means") {
    CHECK_THAT(prior_moments(PdpParams(0.5, 1.0), kGini).mean,
               Catch::Matchers::WithinAbs(0.75, 1e-15));
    CHECK_THAT(prior_moments(PdpParams(0.0, 1.0), kShannon).mean,
               Catch::Matchers::WithinAbs(1.0, 1e-13));
    CHECK_THAT(prior_moments(PdpParams(0.5, 1.0), kShannon).mean,
               Catch::Matchers::WithinAbs(2.3862943611198906, 1e-12));
    // E(G^(2)) = 1 - (1-a)(2-a)/((t+1)(t+2))
    CHECK_THAT(prior_moments(PdpParams(0.0, 1.0), kGini2).mean,
               Catch::Matchers::WithinAbs(2.0 / 3.0, 1e-14));
}

TEST_CASE("real-kappa prior mean matches the integer product form") {
    RandomStream stream(41);
    for (int i = 0; i < 50; ++i) {
        const PdpParams params = oracle::random_params(stream);
        for (std::int64_t kappa : {1, 2, 5}) {
            const double integer_route =
                prior_moments(params, DiversityIndex::generalized_gini(kappa)).mean;
            const double real_route =
                prior_moments(params, DiversityIndex::generalized_gini_real(
                                          static_cast<double>(kappa)))
                    .mean;
            CHECK_THAT(real_route, Catch::Matchers::WithinAbs(integer_route, 1e-13));
        }
    }
}

TEST_CASE("prior second moments: frozen anchors") {
    // at (0, 1) the entropy second moment reduces to 2 - pi^2/12
    const double pi = std::numbers::pi;
    CHECK_THAT(*prior_moments(PdpParams(0.0, 1.0), kShannon).second_moment,
               Catch::Matchers::WithinAbs(2.0 - pi * pi / 12.0, 1e-12));
    CHECK_THAT(*prior_moments(PdpParams(0.5, 1.0), kShannon).second_moment,
               Catch::Matchers::WithinAbs(6.28316726120053, 1e-11));
    CHECK_THAT(*prior_moments(PdpParams(0.5, 1.0), kGini).second_moment,
               Catch::Matchers::WithinAbs(0.59375, 1e-14));
    CHECK_THAT(*prior_moments(PdpParams(0.0, 1.0), kGini).second_moment,
               Catch::Matchers::WithinAbs(7.0 / 24.0, 1e-14));
    CHECK(!prior_moments(PdpParams(0.5, 1.0), kGini2).second_moment.has_value());
    CHECK(prior_moments(PdpParams(0.3, 0.9), kShannon).second_moment.has_value());
}

TEST_CASE("prior second moments match size-biased quadrature") {
    // E(G^2) for a sum-type G(s) = sum g(s_i) decomposes over the first two
    // size-biased picks W1 ~ Beta(1-a, t+a), W2 ~ Beta(1-a, t+2a):
    //   E(G^2) = E[g(W1)^2/W1]
    //          + E[g(W1)(1-W1)/W1 * g(W2(1-W1))/(W2(1-W1))]
    // with the second factor expanded over the independent pair.
    RandomStream stream(42);
    for (int i = 0; i < 12; ++i) {
        const PdpParams params = oracle::random_params(stream, 0.8);
        const long double a = 1.0L - params.alpha();
        const long double b1 = params.theta() + params.alpha();
        const long double b2 = params.theta() + 2.0L * params.alpha();

        SECTION("case " + std::to_string(i)) {
            // Shannon: g(x) = -x log x
            const long double diag = oracle::beta_mean(
                a, b1, [](long double x, long double) { return x * std::log(x) * std::log(x); });
            const long double c1 = oracle::beta_mean(
                a, b1, [](long double x, long double xm) { return -xm * std::log(x); });
            const long double c2 = oracle::beta_mean(
                a, b2, [](long double x, long double) { return -std::log(x); });
            const long double c3 = oracle::beta_mean(a, b1, [](long double x, long double xm) {
                return std::log(x) * std::log(xm) * xm;
            });
            const double want_h2 = static_cast<double>(diag + c1 * c2 + c3);
            CHECK_THAT(*prior_moments(params, kShannon).second_moment,
                       Catch::Matchers::WithinAbs(want_h2, 1e-9));

            // Gini: g(x) = x^2, E(T^2) with T = sum s_i^2
            const long double t_diag =
                oracle::beta_mean(a, b1, [](long double x, long double) { return x * x * x; });
            const long double t_c1 = oracle::beta_mean(
                a, b1, [](long double x, long double xm) { return x * xm * xm; });
            const long double t_c2 =
                oracle::beta_mean(a, b2, [](long double x, long double) { return x; });
            const long double t_mean =
                oracle::beta_mean(a, b1, [](long double x, long double) { return x; });
            const double want_g2 = static_cast<double>(
                1.0L - 2.0L * t_mean + t_diag + t_c1 * t_c2);
            CHECK_THAT(*prior_moments(params, kGini).second_moment,
                       Catch::Matchers::WithinAbs(want_g2, 1e-10));
        }
    }
}

TEST_CASE("prior moments reject the Renyi index") {
    CHECK_THROWS_AS(prior_moments(PdpParams(0.5, 1.0), DiversityIndex::renyi(2.0)),
                    UnsupportedIndexError);
}

TEST_CASE("posterior mean hand values") {
    const PdpParams params(0.0, 1.0);
    CHECK_THAT(posterior_mean(params, abundance({1}), kShannon),
               Catch::Matchers::WithinAbs(1.0, 1e-13));
    CHECK_THAT(posterior_mean(params, abundance({2}), kShannon),
               Catch::Matchers::WithinAbs(5.0 / 6.0, 1e-13));
    CHECK_THAT(posterior_mean(params, abundance({2, 1}), kShannon),
               Catch::Matchers::WithinAbs(13.0 / 12.0, 1e-13));
    CHECK_THAT(posterior_mean(params, abundance({1, 1}), kShannon),
               Catch::Matchers::WithinAbs(7.0 / 6.0, 1e-13));
    CHECK_THAT(posterior_mean(params, abundance({2, 1}), kGini),
               Catch::Matchers::WithinAbs(0.55, 1e-14));
}

TEST_CASE("posterior at n = 1 equals the prior mean") {
    RandomStream stream(43);
    for (int i = 0; i < 300; ++i) {
        const PdpParams params = oracle::random_params(stream);
        for (const auto& idx : {kShannon, kGini, kGini2}) {
            CHECK_THAT(posterior_mean(params, abundance({1}), idx),
                       Catch::Matchers::WithinAbs(prior_moments(params, idx).mean,
                                                  1e-12));
        }
    }
}

TEST_CASE("tower identity over random states") {
    RandomStream stream(44);
    for (int i = 0; i < 1000; ++i) {
        const PdpParams params = oracle::random_params(stream);
        Abundance a;
        const std::int64_t n = 1 + static_cast<std::int64_t>(stream.uniform() * 50);
        for (std::int64_t s = 0; s < n; ++s) a.apply(sample_step(params, a, stream));
        const auto& idx = (i % 2 == 0) ? kShannon : kGini;
        const TowerCheck check = verify_tower(params, a, idx, 1e-10);
        CHECK(check.pass);
    }
}

TEST_CASE("Gini posterior stays in [0, 1]") {
    RandomStream stream(45);
    for (int i = 0; i < 300; ++i) {
        const PdpParams params = oracle::random_params(stream);
        Abundance a;
        const std::int64_t n = 1 + static_cast<std::int64_t>(stream.uniform() * 60);
        for (std::int64_t s = 0; s < n; ++s) a.apply(sample_step(params, a, stream));
        for (const auto& idx : {kGini, kGini2}) {
            const double v = posterior_mean(params, a, idx);
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
    CHECK(posterior_mean(PdpParams(0.0, 0.01), abundance({1000000}), kGini) >= 0.0);
}

TEST_CASE("posterior mean rejects indexes without a closed form") {
    const PdpParams params(0.5, 1.0);
    CHECK_THROWS_AS(posterior_mean(params, abundance({2, 1}), DiversityIndex::renyi(2.0)),
                    UnsupportedIndexError);
    CHECK_THROWS_AS(posterior_mean(params, abundance({2, 1}),
                                   DiversityIndex::generalized_gini_real(1.5)),
                    UnsupportedIndexError);
}

TEST_CASE("plugin values") {
    const std::vector<double> v{2.0 / 3.0, 1.0 / 3.0};
    CHECK_THAT(plugin_value(v, kShannon),
               Catch::Matchers::WithinAbs(0.6365141682948129, 1e-12));
    CHECK_THAT(plugin_value(v, kGini),
               Catch::Matchers::WithinAbs(4.0 / 9.0, 1e-14));

    const std::vector<double> single{1.0};
    for (const auto& idx :
         {kShannon, kGini, kGini2, DiversityIndex::generalized_gini_real(2.5),
          DiversityIndex::renyi(2.0), DiversityIndex::renyi(0.5)}) {
        CHECK_THAT(plugin_value(single, idx), Catch::Matchers::WithinAbs(0.0, 1e-14));
    }

    const std::vector<double> zeros{0.0, 0.0};
    CHECK_THROWS_AS(plugin_value(zeros, kShannon), std::domain_error);
    const std::vector<double> neg{0.5, -0.1};
    CHECK_THROWS_AS(plugin_value(neg, kShannon), std::domain_error);
    const std::vector<double> over{0.9, 0.4};
    CHECK_THROWS_AS(plugin_value(over, kShannon), std::domain_error);

    // Renyi at an explicit two-mass vector
    const double z = 2.0;
    CHECK_THAT(plugin_value(v, DiversityIndex::renyi(z)),
               Catch::Matchers::WithinAbs(std::log(5.0 / 9.0) / (1.0 - z), 1e-13));
}

TEST_CASE("plugin bounds over all abundance vectors with n <= 10") {
    for (std::int64_t n = 1; n <= 10; ++n) {
        oracle::for_each_composition(n, [&](const std::vector<std::int64_t>& parts) {
            std::vector<double> masses;
            masses.reserve(parts.size());
            for (const auto c : parts)
                masses.push_back(static_cast<double>(c) / static_cast<double>(n));
            const double h = plugin_value(masses, kShannon);
            const bool all_singletons =
                static_cast<std::int64_t>(parts.size()) == n;
            CHECK(h <= std::log(static_cast<double>(n)) + 1e-12);
            if (all_singletons)
                CHECK_THAT(h, Catch::Matchers::WithinAbs(
                                  std::log(static_cast<double>(n)), 1e-12));
            else if (n > 1)
                CHECK(h < std::log(static_cast<double>(n)) - 1e-12);
            const double g = plugin_value(masses, kGini);
            if (parts.size() == 1) {
                CHECK_THAT(h, Catch::Matchers::WithinAbs(0.0, 1e-14));
                CHECK_THAT(g, Catch::Matchers::WithinAbs(0.0, 1e-14));
            } else {
                CHECK(h > 1e-12);
                CHECK(g > 1e-12);
            }
        });
    }
}

TEST_CASE("one-unit exchange never decreases the plug-in index") {
    for (std::int64_t n = 2; n <= 10; ++n) {
        oracle::for_each_composition(n, [&](const std::vector<std::int64_t>& parts) {
            const std::int64_t k = static_cast<std::int64_t>(parts.size());
            for (std::int64_t j = 0; j < k; ++j) {
                for (std::int64_t l = 0; l < k; ++l) {
                    if (j == l || parts[static_cast<std::size_t>(j)] <
                                      parts[static_cast<std::size_t>(l)] + 2)
                        continue;
                    auto moved = parts;
                    --moved[static_cast<std::size_t>(j)];
                    ++moved[static_cast<std::size_t>(l)];
                    std::vector<double> m0, m1;
                    for (const auto c : parts)
                        m0.push_back(static_cast<double>(c) / static_cast<double>(n));
                    for (const auto c : moved)
                        m1.push_back(static_cast<double>(c) / static_cast<double>(n));
                    for (const auto& idx : {kShannon, kGini, kGini2}) {
                        CHECK(plugin_value(m1, idx) >= plugin_value(m0, idx) - 1e-12);
                    }
                }
            }
        });
    }
}

TEST_CASE("entropy step difference: direct subtraction and expansion agree") {
    RandomStream stream(46);
    for (int i = 0; i < 400; ++i) {
        const PdpParams params = oracle::random_params(stream);
        Abundance a;
        const std::int64_t n = 1 + static_cast<std::int64_t>(stream.uniform() * 40);
        for (std::int64_t s = 0; s < n; ++s) a.apply(sample_step(params, a, stream));
        const StepChoice c =
            stream.uniform() < 0.5
                ? StepChoice::new_class()
                : StepChoice::existing(
                      1 + static_cast<std::int64_t>(stream.uniform() *
                                                    static_cast<double>(a.k())));
        const double direct = entropy_step_difference(params, a, c);
        const double expanded = entropy_step_difference_expansion(params, a, c);
        CHECK_THAT(expanded, Catch::Matchers::WithinAbs(direct, 1e-9));
    }
}

TEST_CASE("entropy step difference is definitional") {
    const PdpParams params(0.0, 1.0);
    const Abundance one = abundance({1});
    const double d = entropy_step_difference(params, one, StepChoice::new_class());
    CHECK_THAT(d, Catch::Matchers::WithinAbs(
                      posterior_mean(params, abundance({1, 1}), kShannon) -
                          posterior_mean(params, one, kShannon),
                      1e-15));
}

TEST_CASE("new-class minus existing-class difference at (2,1)") {
    // psi(pi(1)+1-alpha) - psi(1-alpha) over (theta+n+1): (psi(3)-psi(1))/5
    const PdpParams params(0.0, 1.0);
    const Abundance a = abundance({2, 1});
    const double gap =
        entropy_step_difference(params, a, StepChoice::new_class()) -
        entropy_step_difference(params, a, StepChoice::existing(1));
    CHECK_THAT(gap, Catch::Matchers::WithinAbs(0.3, 1e-12));
}

TEST_CASE("step differences stay bounded along a sweep") {
    const auto scan = step_difference_scan(PdpParams(0.5, 1.0), 10000, 1000, 7);
    CHECK(scan.max_abs_total > 0.0);
    CHECK(std::isfinite(scan.max_abs_total));
    INFO("observed bound C = " << scan.max_abs_total
                               << " (first block " << scan.max_abs_first_block << ")");
    CHECK(scan.max_abs_total <= 10.0 * scan.max_abs_first_block);
}

TEST_CASE("Renyi integrability classification") {
    const PdpParams params(0.5, 1.0);
    CHECK(renyi_integrability(params, 2.0) == RenyiIntegrability::integrable);
    CHECK(renyi_integrability(params, 0.7) ==
          RenyiIntegrability::sufficient_condition_holds);
    CHECK(renyi_integrability(params, 0.3) ==
          RenyiIntegrability::sufficient_condition_fails);
    CHECK(renyi_integrability(params, 0.5) ==
          RenyiIntegrability::sufficient_condition_fails);
    CHECK_THROWS_AS(renyi_integrability(params, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(renyi_integrability(params, -0.2), std::invalid_argument);
}

TEST_CASE("posterior tracker agrees with the closed form along trajectories") {
    RandomStream stream(47);
    for (int rep = 0; rep < 6; ++rep) {
        const PdpParams params = oracle::random_params(stream, 0.7);
        const Trajectory t = sample_trajectory(params, 1500, stream.bits());
        for (const auto& idx : {kShannon, kGini, kGini2}) {
            PosteriorTracker tracker(params, idx);
            Abundance a;
            for (std::size_t s = 0; s < t.steps.size(); ++s) {
                tracker.advance(t.steps[s]);
                a.apply(t.steps[s]);
                if ((s + 1) % 375 == 0 || s + 1 == t.steps.size()) {
                    CHECK_THAT(tracker.mean(),
                               Catch::Matchers::WithinAbs(
                                   posterior_mean(params, a, idx), 1e-9));
                }
            }
            // successor means match one-step closed forms at the final state
            CHECK_THAT(tracker.successor_mean(StepChoice::new_class()),
                       Catch::Matchers::WithinAbs(
                           posterior_mean(params,
                                          apply_step(a, StepChoice::new_class()), idx),
                           1e-9));
            CHECK_THAT(tracker.successor_mean(StepChoice::existing(1)),
                       Catch::Matchers::WithinAbs(
                           posterior_mean(params,
                                          apply_step(a, StepChoice::existing(1)), idx),
                           1e-9));
        }
    }
}

TEST_CASE("tracker conditional variance matches a direct computation") {
    RandomStream stream(48);
    for (int i = 0; i < 100; ++i) {
        const PdpParams params = oracle::random_params(stream, 0.7);
        Abundance a;
        const std::int64_t n = 1 + static_cast<std::int64_t>(stream.uniform() * 30);
        Trajectory t{params, {}, 0};
        for (std::int64_t s = 0; s < n; ++s) {
            const auto c = sample_step(params, a, stream);
            a.apply(c);
            t.steps.push_back(c);
        }
        for (const auto& idx : {kShannon, kGini}) {
            PosteriorTracker tracker(params, idx);
            for (const auto& c : t.steps) tracker.advance(c);
            const auto probs = transition_probabilities(params, a);
            const double z = posterior_mean(params, a, idx);
            double want = 0.0;
            for (std::int64_t j = 1; j <= a.k(); ++j) {
                const double d =
                    posterior_mean(params, apply_step(a, StepChoice::existing(j)), idx) - z;
                want += probs[static_cast<std::size_t>(j - 1)] * d * d;
            }
            const double dn =
                posterior_mean(params, apply_step(a, StepChoice::new_class()), idx) - z;
            want += probs.back() * dn * dn;
            CHECK_THAT(tracker.conditional_variance(),
                       Catch::Matchers::WithinAbs(want, 1e-10));
        }
    }
}

TEST_CASE("plugin tracker agrees with plugin_value") {
    RandomStream stream(49);
    for (int rep = 0; rep < 10; ++rep) {
        const PdpParams params = oracle::random_params(stream);
        const Trajectory t = sample_trajectory(params, 300, stream.bits());
        for (const auto& idx : {kShannon, kGini, kGini2}) {
            PluginTracker tracker(idx);
            Abundance a;
            for (const auto& c : t.steps) {
                tracker.advance(c);
                a.apply(c);
            }
            std::vector<double> masses;
            for (const auto cnt : a.counts())
                masses.push_back(static_cast<double>(cnt) /
                                 static_cast<double>(a.n()));
            CHECK_THAT(tracker.value(),
                       Catch::Matchers::WithinAbs(plugin_value(masses, idx), 1e-11));
        }
    }
}
