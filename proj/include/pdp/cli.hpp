#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pdp/crp.hpp"
#include "pdp/diagnostics.hpp"
#include "pdp/diversity_index.hpp"
#include "pdp/estimators.hpp"
#include "pdp/experiments.hpp"
#include "pdp/io.hpp"
#include "pdp/posterior_sampling.hpp"

namespace pdp {

enum class Command { sample, estimate, posterior_mc, sequences, extremal, verify };
enum class VerifyMode { tower, corollary1, doob, convergence, identities };

struct RunConfig {
    Command command = Command::estimate;
    VerifyMode verify_mode = VerifyMode::tower;
    std::optional<double> alpha;
    std::optional<double> theta;
    std::string index = "shannon";
    std::vector<std::int64_t> counts;
    std::string input;
    std::int64_t n = 0;             // sample size / horizon
    std::int64_t k = 0;             // class count (extremal)
    std::int64_t trajectories = 0;  // trajectory or sample count m
    std::uint64_t seed = 0;
    double eps = 1e-12;
    double tol = 1e-9;
    std::vector<std::int64_t> checkpoints;
    std::string output;
};

struct Report {
    nlohmann::json body;
    int exit_code = 0;
};

inline DiversityIndex parse_index(const std::string& s) {
    if (s == "shannon") return DiversityIndex::shannon();
    if (s == "gini" || s == "ggini") return DiversityIndex::gini();
    const auto colon = s.find(':');
    if (colon != std::string::npos) {
        const std::string head = s.substr(0, colon);
        const std::string arg = s.substr(colon + 1);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(arg, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != arg.size() || !(v > 0.0))
            throw std::invalid_argument("index: bad parameter in '" + s + "'");
        if (head == "ggini") {
            if (v == std::floor(v) && v <= 1e9)
                return DiversityIndex::generalized_gini(static_cast<std::int64_t>(v));
            return DiversityIndex::generalized_gini_real(v);
        }
        if (head == "renyi") return DiversityIndex::renyi(v);
    }
    throw std::invalid_argument(
        "index: expected shannon | gini | ggini:<kappa> | renyi:<zeta>, got '" + s + "'");
}

inline std::vector<std::int64_t> parse_int_list(const std::string& s,
                                                const char* what) {
    std::vector<std::int64_t> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stoll(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw std::invalid_argument(std::string(what) + ": bad integer '" + tok + "'");
        }
    }
    if (out.empty())
        throw std::invalid_argument(std::string(what) + ": empty list");
    return out;
}

namespace detail {

inline double finite(double x) {
    if (!std::isfinite(x))
        throw std::runtime_error("non-finite value in report");
    return x;
}

inline PdpParams params_of(const RunConfig& cfg) {
    return PdpParams(cfg.alpha.value_or(0.0), cfg.theta.value_or(1.0));
}

inline nlohmann::json config_echo(const RunConfig& cfg) {
    nlohmann::json j;
    j["alpha"] = cfg.alpha.value_or(0.0);
    j["theta"] = cfg.theta.value_or(1.0);
    j["index"] = cfg.index;
    if (!cfg.counts.empty()) j["counts"] = cfg.counts;
    if (!cfg.input.empty()) j["input"] = cfg.input;
    if (cfg.n > 0) j["n"] = cfg.n;
    if (cfg.trajectories > 0) j["trajectories"] = cfg.trajectories;
    j["seed"] = cfg.seed;
    j["eps"] = cfg.eps;
    j["tol"] = cfg.tol;
    if (!cfg.checkpoints.empty()) j["checkpoints"] = cfg.checkpoints;
    if (!cfg.output.empty()) j["output"] = cfg.output;
    return j;
}

inline Abundance abundance_of(const RunConfig& cfg) {
    if (!cfg.counts.empty()) return Abundance(cfg.counts);
    if (!cfg.input.empty()) {
        std::ifstream in(cfg.input);
        if (!in) throw std::runtime_error("cannot open input file " + cfg.input);
        return ingest_observations(in).abundance;
    }
    throw std::invalid_argument("need --counts or --input");
}

inline Trajectory trajectory_of(const RunConfig& cfg) {
    const PdpParams params = params_of(cfg);
    if (!cfg.input.empty()) {
        std::ifstream in(cfg.input);
        if (!in) throw std::runtime_error("cannot open input file " + cfg.input);
        auto ingested = ingest_observations(in);
        return Trajectory{params, std::move(ingested.steps), cfg.seed};
    }
    if (cfg.n < 1) throw std::invalid_argument("need --input or --n");
    return sample_trajectory(params, cfg.n, cfg.seed);
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file " + path);
    return out;
}

inline nlohmann::json run_sample(const RunConfig& cfg) {
    if (cfg.n < 1) throw std::invalid_argument("sample: need --n >= 1");
    const Trajectory t = sample_trajectory(params_of(cfg), cfg.n, cfg.seed);
    const Abundance a = replay(t.steps);
    nlohmann::json j;
    j["n"] = a.n();
    j["k"] = a.k();
    j["new_species_times"] = new_species_times(t).size();
    if (!cfg.output.empty()) {
        auto out = open_output(cfg.output);
        write_trajectory(out, t.steps);
        j["trajectory_file"] = cfg.output;
        const std::string counts_path = cfg.output + ".counts.csv";
        auto cout_ = open_output(counts_path);
        CsvWriter csv(cout_);
        const std::vector<std::string> cols{"class", "count"};
        csv.header(cols);
        for (std::int64_t i = 1; i <= a.k(); ++i) {
            csv.cell(i);
            csv.cell(a.count(i));
            csv.end_row();
        }
        j["counts_file"] = counts_path;
    } else {
        std::ostringstream os;
        write_trajectory(os, t.steps);
        j["trajectory"] = os.str();
    }
    return j;
}

inline nlohmann::json run_estimate(const RunConfig& cfg) {
    const PdpParams params = params_of(cfg);
    const DiversityIndex idx = parse_index(cfg.index);
    const Abundance a = abundance_of(cfg);

    std::vector<double> masses;
    masses.reserve(static_cast<std::size_t>(a.k()));
    for (const auto c : a.counts())
        masses.push_back(static_cast<double>(c) / static_cast<double>(a.n()));

    nlohmann::json j;
    j["n"] = a.n();
    j["k"] = a.k();
    j["plugin"] = finite(plugin_value(masses, idx));
    if (idx.has_closed_posterior())
        j["posterior"] = finite(posterior_mean(params, a, idx));
    else
        j["posterior_unsupported"] =
            "no closed-form posterior mean; use the posterior-mc command";
    if (idx.has_prior_mean()) {
        const PriorMoments pm = prior_moments(params, idx);
        j["prior_mean"] = finite(pm.mean);
        if (pm.second_moment) j["prior_second_moment"] = finite(*pm.second_moment);
    }
    if (idx.family() == DiversityIndex::Family::renyi) {
        switch (renyi_integrability(params, idx.zeta())) {
            case RenyiIntegrability::integrable:
                j["renyi_integrability"] = "integrable";
                break;
            case RenyiIntegrability::sufficient_condition_holds:
                j["renyi_integrability"] = "sufficient_condition_holds";
                break;
            case RenyiIntegrability::sufficient_condition_fails:
                j["renyi_integrability"] = "sufficient_condition_fails";
                break;
        }
    }
    return j;
}

inline nlohmann::json run_posterior_mc(const RunConfig& cfg) {
    const PdpParams params = params_of(cfg);
    const DiversityIndex idx = parse_index(cfg.index);
    const Abundance a = abundance_of(cfg);
    const std::int64_t m = cfg.trajectories > 0 ? cfg.trajectories : 10000;
    const McEstimate est = posterior_mc_mean(params, a, idx, m, cfg.seed, cfg.eps);
    nlohmann::json j;
    j["estimate"] = finite(est.estimate);
    j["std_error"] = finite(est.std_error);
    j["samples"] = est.samples;
    j["mean_scaled_residual"] = finite(est.mean_scaled_residual);
    j["truncation_bias_bound"] = finite(est.bias_bound);
    if (idx.has_closed_posterior())
        j["closed_form"] = finite(posterior_mean(params, a, idx));
    return j;
}

inline nlohmann::json run_sequences(const RunConfig& cfg) {
    const PdpParams params = params_of(cfg);
    const DiversityIndex idx = parse_index(cfg.index);
    const Trajectory t = trajectory_of(cfg);
    const SequenceReport ell = ell_sequence(t, idx, cfg.tol);
    const SequenceReport big = big_l_sequence(params, t, idx, cfg.tol);
    const SequenceReport delta = delta_sequence(params, t, idx, cfg.tol);

    nlohmann::json j;
    j["steps"] = static_cast<std::int64_t>(t.steps.size());
    j["ell_flat_steps"] = ell.flat_steps.size();
    j["big_l_flat_steps"] = big.flat_steps.size();
    j["new_species"] = new_species_times(t).size();
    if (!cfg.output.empty()) {
        auto out = open_output(cfg.output);
        CsvWriter csv(out);
        const std::vector<std::string> cols{
            "n",     "new_class",       "ell",  "ell_increment",
            "big_l", "big_l_increment", "delta"};
        csv.header(cols);
        for (std::size_t i = 0; i < t.steps.size(); ++i) {
            csv.cell(ell.times[i]);
            csv.cell(static_cast<std::int64_t>(t.steps[i].is_new_class() ? 1 : 0));
            csv.cell(ell.values[i]);
            csv.cell(ell.increments[i]);
            csv.cell(big.values[i]);
            csv.cell(big.increments[i]);
            csv.cell(delta.values[i]);
            csv.end_row();
        }
        j["csv"] = cfg.output;
    }
    return j;
}

inline nlohmann::json run_extremal(const RunConfig& cfg) {
    if (cfg.n < 1) throw std::invalid_argument("extremal: need --n >= 1");
    const std::int64_t k = cfg.k;
    if (k < 1) throw std::invalid_argument("extremal: need --k >= 1");
    const PdpParams params = params_of(cfg);
    const DiversityIndex idx = parse_index(cfg.index);
    nlohmann::json j;
    for (const auto which : {ExtremalKind::min_over_k, ExtremalKind::max_over_k}) {
        const Abundance a = extremal_abundance(cfg.n, k, which);
        nlohmann::json e;
        e["counts"] = a.counts();
        std::vector<double> masses;
        for (const auto c : a.counts())
            masses.push_back(static_cast<double>(c) / static_cast<double>(a.n()));
        e["plugin"] = finite(plugin_value(masses, idx));
        if (idx.has_closed_posterior())
            e["posterior"] = finite(posterior_mean(params, a, idx));
        j[which == ExtremalKind::min_over_k ? "min" : "max"] = e;
    }
    return j;
}

inline PdpParams random_params(RandomStream& stream) {
    const double alpha = 0.9 * stream.uniform();
    const double theta = -alpha + 0.1 + 3.0 * stream.uniform();
    return PdpParams(alpha, theta);
}

inline Abundance random_abundance(const PdpParams& params, RandomStream& stream,
                                  std::int64_t max_n) {
    const std::int64_t n =
        1 + static_cast<std::int64_t>(stream.uniform() * static_cast<double>(max_n));
    Abundance a;
    for (std::int64_t i = 0; i < n; ++i) a.apply(sample_step(params, a, stream));
    return a;
}

inline nlohmann::json verify_tower_cases(const RunConfig& cfg, bool& pass) {
    const std::int64_t cases = cfg.trajectories > 0 ? cfg.trajectories : 1000;
    const bool randomize = !cfg.alpha && !cfg.theta;
    RandomStream stream(cfg.seed);
    const DiversityIndex indexes[] = {DiversityIndex::shannon(),
                                      DiversityIndex::gini(),
                                      DiversityIndex::generalized_gini(2)};
    double max_residual = 0.0;
    std::int64_t failures = 0;
    for (std::int64_t i = 0; i < cases; ++i) {
        const PdpParams params = randomize ? random_params(stream) : params_of(cfg);
        const Abundance a = random_abundance(params, stream, 50);
        const auto& idx = indexes[static_cast<std::size_t>(i % 3)];
        const TowerCheck check = verify_tower(params, a, idx, cfg.tol);
        max_residual = std::max(max_residual, check.residual);
        if (!check.pass) ++failures;
    }
    pass = failures == 0;
    nlohmann::json j;
    j["cases"] = cases;
    j["failures"] = failures;
    j["max_residual"] = finite(max_residual);
    j["pass"] = pass;
    return j;
}

inline nlohmann::json verify_corollary1_cases(const RunConfig& cfg, bool& pass) {
    const PdpParams params = params_of(cfg);
    const std::int64_t m = cfg.trajectories > 0 ? cfg.trajectories : 100;
    const std::int64_t len = cfg.n > 0 ? cfg.n : 1000;
    std::int64_t counterexamples = 0;
    nlohmann::json first;
    for (std::int64_t i = 0; i < m; ++i) {
        const Trajectory t =
            sample_trajectory(params, len, derive_seed(cfg.seed, static_cast<std::uint64_t>(i)));
        const Corollary1Check check = verify_corollary1(t, params, cfg.tol);
        if (!check.pass) {
            ++counterexamples;
            if (first.is_null()) {
                first["trajectory"] = i;
                first["step"] = check.counterexample_step;
            }
        }
    }
    pass = counterexamples == 0;
    nlohmann::json j;
    j["trajectories"] = m;
    j["length"] = len;
    j["counterexamples"] = counterexamples;
    if (!first.is_null()) j["first_counterexample"] = first;
    j["pass"] = pass;
    return j;
}

inline nlohmann::json verify_doob_cases(const RunConfig& cfg, bool& pass) {
    const PdpParams params = params_of(cfg);
    const DiversityIndex idx = parse_index(cfg.index);
    const std::int64_t horizon = cfg.n > 0 ? cfg.n : 1000;
    const std::int64_t m = cfg.trajectories > 0 ? cfg.trajectories : 10000;
    const DoobReport r = doob_experiment(params, idx, horizon, m, cfg.seed);
    const bool pass_ratio = r.ratio <= 1.0;
    const bool pass_variance =
        r.variance_sum <= r.second_moment + 3.0 * r.variance_sum_se;
    pass = pass_ratio && pass_variance;
    nlohmann::json j;
    j["horizon"] = horizon;
    j["trajectories"] = m;
    j["lhs"] = finite(r.lhs);
    j["lhs_std_error"] = finite(r.lhs_se);
    j["rhs"] = finite(r.rhs);
    j["ratio"] = finite(r.ratio);
    j["pass_ratio"] = pass_ratio;
    j["variance_sum"] = finite(r.variance_sum);
    j["variance_sum_std_error"] = finite(r.variance_sum_se);
    j["second_moment"] = finite(r.second_moment);
    j["pass_variance"] = pass_variance;
    j["pass"] = pass;
    return j;
}

inline nlohmann::json verify_convergence_cases(const RunConfig& cfg, bool& pass) {
    const PdpParams params = params_of(cfg);
    const DiversityIndex idx = parse_index(cfg.index);
    std::vector<std::int64_t> checkpoints =
        cfg.checkpoints.empty() ? std::vector<std::int64_t>{100, 1000, 10000}
                                : cfg.checkpoints;
    const std::int64_t m = cfg.trajectories > 0 ? cfg.trajectories : 1000;
    const auto rows = convergence_experiment(params, idx, checkpoints, m, cfg.seed);
    const double prior = prior_moments(params, idx).mean;

    bool monotone = true;
    bool constant_mean = true;
    nlohmann::json jrows = nlohmann::json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (i > 0 && !(r.mean_abs_gap < rows[i - 1].mean_abs_gap)) monotone = false;
        if (std::abs(r.mean_posterior - prior) > 4.0 * r.posterior_se)
            constant_mean = false;
        nlohmann::json row;
        row["n"] = r.n;
        row["mean_abs_gap"] = finite(r.mean_abs_gap);
        row["gap_std_error"] = finite(r.gap_se);
        row["mean_posterior"] = finite(r.mean_posterior);
        row["posterior_std_error"] = finite(r.posterior_se);
        jrows.push_back(row);
    }
    pass = monotone && constant_mean;

    if (!cfg.output.empty()) {
        auto out = open_output(cfg.output);
        CsvWriter csv(out);
        const std::vector<std::string> cols{"n", "mean_abs_gap", "gap_std_error",
                                            "mean_posterior", "posterior_std_error"};
        csv.header(cols);
        for (const auto& r : rows) {
            csv.cell(r.n);
            csv.cell(r.mean_abs_gap);
            csv.cell(r.gap_se);
            csv.cell(r.mean_posterior);
            csv.cell(r.posterior_se);
            csv.end_row();
        }
    }
    nlohmann::json j;
    j["trajectories"] = m;
    j["prior_mean"] = finite(prior);
    j["rows"] = jrows;
    j["monotone_gap"] = monotone;
    j["constant_mean"] = constant_mean;
    j["pass"] = pass;
    if (!cfg.output.empty()) j["csv"] = cfg.output;
    return j;
}

inline nlohmann::json verify_identity_cases(const RunConfig& cfg, bool& pass) {
    RandomStream stream(derive_seed(cfg.seed, 77));
    const std::int64_t points = 10000;
    double max_eq17 = 0.0;
    for (std::int64_t i = 0; i < points; ++i) {
        // log-uniform over [1e-3, 1e3]
        const double x = std::pow(10.0, -3.0 + 6.0 * stream.uniform());
        const double lhs = x * digamma(x + 1.0) - (x - 1.0) * digamma(x);
        max_eq17 = std::max(max_eq17, std::abs(lhs - (digamma(x) + 1.0)));
    }
    const bool pass_eq17 = max_eq17 <= 1e-10;

    RunConfig tower_cfg = cfg;
    tower_cfg.tol = 1e-10;
    bool pass_tower = false;
    const nlohmann::json tower = verify_tower_cases(tower_cfg, pass_tower);

    double max_anchor = 0.0;
    for (std::int64_t i = 0; i < 200; ++i) {
        const PdpParams params = random_params(stream);
        const Abundance one(std::vector<std::int64_t>{1});
        for (const auto& idx : {DiversityIndex::shannon(), DiversityIndex::gini(),
                                DiversityIndex::generalized_gini(2)}) {
            max_anchor = std::max(
                max_anchor, std::abs(posterior_mean(params, one, idx) -
                                     prior_moments(params, idx).mean));
        }
    }
    const bool pass_anchor = max_anchor <= 1e-12;

    pass = pass_eq17 && pass_tower && pass_anchor;
    nlohmann::json j;
    j["eq17_points"] = points;
    j["eq17_max_residual"] = finite(max_eq17);
    j["pass_eq17"] = pass_eq17;
    j["tower"] = tower;
    j["anchor_max_residual"] = finite(max_anchor);
    j["pass_anchor"] = pass_anchor;
    j["pass"] = pass;
    return j;
}

}  // namespace detail

inline Report run_command(const RunConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    Report report;
    nlohmann::json& j = report.body;
    try {
        switch (cfg.command) {
            case Command::sample:
                j = detail::run_sample(cfg);
                j["command"] = "sample";
                break;
            case Command::estimate:
                j = detail::run_estimate(cfg);
                j["command"] = "estimate";
                break;
            case Command::posterior_mc:
                j = detail::run_posterior_mc(cfg);
                j["command"] = "posterior-mc";
                break;
            case Command::sequences:
                j = detail::run_sequences(cfg);
                j["command"] = "sequences";
                break;
            case Command::extremal:
                j = detail::run_extremal(cfg);
                j["command"] = "extremal";
                break;
            case Command::verify: {
                bool pass = false;
                switch (cfg.verify_mode) {
                    case VerifyMode::tower:
                        j = detail::verify_tower_cases(cfg, pass);
                        j["mode"] = "tower";
                        break;
                    case VerifyMode::corollary1:
                        j = detail::verify_corollary1_cases(cfg, pass);
                        j["mode"] = "corollary1";
                        break;
                    case VerifyMode::doob:
                        j = detail::verify_doob_cases(cfg, pass);
                        j["mode"] = "doob";
                        break;
                    case VerifyMode::convergence:
                        j = detail::verify_convergence_cases(cfg, pass);
                        j["mode"] = "convergence";
                        break;
                    case VerifyMode::identities:
                        j = detail::verify_identity_cases(cfg, pass);
                        j["mode"] = "identities";
                        break;
                }
                j["command"] = "verify";
                report.exit_code = pass ? 0 : 1;
                break;
            }
        }
    } catch (const ParseError& e) {
        j = {{"error", {{"code", "parse_error"}, {"message", e.what()}, {"line", e.line}}}};
        report.exit_code = 2;
        return report;
    } catch (const UnsupportedIndexError& e) {
        j = {{"error", {{"code", "unsupported_index"}, {"message", e.what()}}}};
        report.exit_code = 2;
        return report;
    } catch (const std::domain_error& e) {
        j = {{"error", {{"code", "domain_error"}, {"message", e.what()}}}};
        report.exit_code = 2;
        return report;
    } catch (const std::invalid_argument& e) {
        j = {{"error", {{"code", "invalid_argument"}, {"message", e.what()}}}};
        report.exit_code = 2;
        return report;
    } catch (const std::exception& e) {
        j = {{"error", {{"code", "runtime_error"}, {"message", e.what()}}}};
        report.exit_code = 2;
        return report;
    }
    j["config"] = detail::config_echo(cfg);
    const auto elapsed = std::chrono::steady_clock::now() - start;
    j["duration_seconds"] =
        std::chrono::duration_cast<std::chrono::duration<double>>(elapsed).count();
    return report;
}

}  // namespace pdp
