// Command-line front end: simulate | predict | compare | normality | reproduce-figures.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "l1rls/io/commands.hpp"

namespace {

struct Args {
    std::string config;
    std::string out;
    std::string empirical;
    std::string theoretical;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> runs;
    bool overwrite = false;
};

void add_overrides(CLI::App* cmd, Args& a) {
    cmd->add_option("--seed", a.seed, "Override run.seed");
    cmd->add_option("--runs", a.runs, "Override run.n_runs");
}

}  // namespace

int main(int argc, char** argv) {
    using namespace l1rls::io;
    CLI::App app{"l1-RLS adaptive filter: Monte Carlo simulation and transient model"};
    app.set_version_flag("--version", tool_version());
    app.require_subcommand(1);
    Args a;

    auto* sim = app.add_subcommand("simulate", "Monte Carlo ensemble; writes empirical.csv");
    sim->add_option("--config", a.config, "Configuration file (JSON)")->required()->check(CLI::ExistingFile);
    sim->add_option("--out", a.out, "Output directory")->required();
    add_overrides(sim, a);

    auto* pred = app.add_subcommand("predict", "Transient model; writes theoretical.csv");
    pred->add_option("--config", a.config, "Configuration file (JSON)")->required()->check(CLI::ExistingFile);
    pred->add_option("--out", a.out, "Output directory")->required();
    add_overrides(pred, a);

    auto* cmp = app.add_subcommand("compare", "Deviation report and learning-curve plots");
    cmp->add_option("empirical", a.empirical, "empirical.csv")->required();
    cmp->add_option("theoretical", a.theoretical, "theoretical.csv")->required();
    cmp->add_option("--out", a.out, "Output directory")->required();
    cmp->add_option("--config", a.config, "Configuration file supplying compare tolerances");

    auto* norm = app.add_subcommand("normality", "Capture weight-error pairs and run the Henze-Zirkler test");
    norm->add_option("--config", a.config, "Configuration file (JSON)")->required()->check(CLI::ExistingFile);
    norm->add_option("--out", a.out, "Output directory")->required();
    add_overrides(norm, a);

    auto* rep = app.add_subcommand("reproduce-figures", "Full pipeline on the built-in preset with a verdict");
    rep->add_option("--out", a.out, "Output directory")->required();
    rep->add_flag("--overwrite", a.overwrite, "Allow a non-empty output directory");
    add_overrides(rep, a);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    const Overrides ov{a.seed, a.runs};
    if (*sim) return cmd_simulate(a.config, a.out, ov);
    if (*pred) return cmd_predict(a.config, a.out, ov);
    if (*cmp)
        return cmd_compare(a.empirical, a.theoretical, a.out,
                           a.config.empty() ? std::nullopt : std::optional<std::filesystem::path>(a.config));
    if (*norm) return cmd_normality(a.config, a.out, ov);
    ReproduceOptions opts;
    opts.overwrite = a.overwrite;
    opts.overrides = ov;
    return cmd_reproduce_figures(a.out, opts);
}
