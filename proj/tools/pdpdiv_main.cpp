#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pdp/cli.hpp"

namespace {

void add_common_flags(CLI::App* app, pdp::RunConfig& cfg, double& alpha,
                      double& theta, std::string& counts,
                      std::string& checkpoints) {
    app->add_option("--alpha", alpha, "PDP discount parameter in [0, 1)");
    app->add_option("--theta", theta, "PDP concentration parameter (> -alpha)");
    app->add_option("--index", cfg.index,
                    "diversity index: shannon | gini | ggini:<kappa> | renyi:<zeta>");
    app->add_option("--counts", counts, "abundance counts, comma separated (e.g. 2,1)");
    app->add_option("--input", cfg.input, "observation or trajectory file");
    app->add_option("--n", cfg.n, "sample size / horizon");
    app->add_option("--k", cfg.k, "class count (extremal)");
    app->add_option("--trajectories", cfg.trajectories,
                    "trajectory / Monte Carlo sample count");
    app->add_option("--seed", cfg.seed, "master seed (default 0)");
    app->add_option("--eps", cfg.eps, "stick-breaking truncation (default 1e-12)");
    app->add_option("--tol", cfg.tol, "verification tolerance (default 1e-9)");
    app->add_option("--checkpoints", checkpoints, "checkpoint list, comma separated");
    app->add_option("--output", cfg.output, "output file path");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Poisson-Dirichlet partition sampling, Bayesian and plug-in diversity "
        "estimation, and martingale verification"};
    app.require_subcommand(1);

    pdp::RunConfig cfg;
    double alpha = -1.0, theta = -1e300;
    std::string counts, checkpoints;

    auto* sample = app.add_subcommand("sample", "sample a CRP trajectory");
    auto* estimate =
        app.add_subcommand("estimate", "closed-form posterior and plug-in values");
    auto* pmc = app.add_subcommand("posterior-mc",
                                   "Monte Carlo posterior mean of an index");
    auto* sequences =
        app.add_subcommand("sequences", "ell / L / Delta sequences along a trajectory");
    auto* extremal =
        app.add_subcommand("extremal", "extremal abundance configurations for (n, k)");
    auto* verify = app.add_subcommand(
        "verify", "run a verifier: tower | corollary1 | doob | convergence | identities");
    std::string mode;
    verify->add_option("mode", mode, "verifier name")->required();

    for (auto* sub : {sample, estimate, pmc, sequences, extremal, verify})
        add_common_flags(sub, cfg, alpha, theta, counts, checkpoints);

    CLI11_PARSE(app, argc, argv);

    if (alpha >= 0.0) cfg.alpha = alpha;
    if (theta > -1e299) cfg.theta = theta;
    try {
        if (!counts.empty()) cfg.counts = pdp::parse_int_list(counts, "counts");
        if (!checkpoints.empty())
            cfg.checkpoints = pdp::parse_int_list(checkpoints, "checkpoints");
        if (verify->parsed()) {
            cfg.command = pdp::Command::verify;
            if (mode == "tower") cfg.verify_mode = pdp::VerifyMode::tower;
            else if (mode == "corollary1") cfg.verify_mode = pdp::VerifyMode::corollary1;
            else if (mode == "doob") cfg.verify_mode = pdp::VerifyMode::doob;
            else if (mode == "convergence") cfg.verify_mode = pdp::VerifyMode::convergence;
            else if (mode == "identities") cfg.verify_mode = pdp::VerifyMode::identities;
            else throw std::invalid_argument("unknown verify mode '" + mode + "'");
        } else if (sample->parsed()) {
            cfg.command = pdp::Command::sample;
        } else if (estimate->parsed()) {
            cfg.command = pdp::Command::estimate;
        } else if (pmc->parsed()) {
            cfg.command = pdp::Command::posterior_mc;
        } else if (sequences->parsed()) {
            cfg.command = pdp::Command::sequences;
        } else if (extremal->parsed()) {
            cfg.command = pdp::Command::extremal;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    const pdp::Report report = pdp::run_command(cfg);
    std::cout << report.body.dump(2) << std::endl;
    return report.exit_code;
}
