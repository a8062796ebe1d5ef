// Command-line driver: generate -> train -> estimate -> report.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lid/config.hpp"
#include "lid/errors.hpp"
#include "lid/io.hpp"
#include "lid/pipeline.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;

struct Common {
    std::string config_path;
    std::string out_dir;
    int workers = 0;
    std::optional<std::uint64_t> seed;
    bool force = false;
    bool quiet = false;
};

void add_common(CLI::App* cmd, Common& c)
{
    cmd->add_option("--config", c.config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", c.out_dir, "run directory (defaults to the config's output_dir)");
    cmd->add_option("--workers", c.workers, "OpenMP threads for batch estimation (0 = runtime default)")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--seed", c.seed, "override the config's global seed");
    cmd->add_flag("--force", c.force, "overwrite existing artifacts");
    cmd->add_flag("--quiet", c.quiet, "suppress progress output");
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Local intrinsic dimension estimation with diffusion models"};
    app.require_subcommand(1);

    Common common;
    std::string estimator;
    auto* gen = app.add_subcommand("generate", "sample the configured dataset");
    auto* trn = app.add_subcommand("train", "train the score network on the run's dataset");
    auto* est = app.add_subcommand("estimate", "run one LID estimator on the evaluation subsample");
    auto* rep = app.add_subcommand("report", "summarise results (MAE, concordance) and write FLIPD curves");
    for (auto* cmd : {gen, trn, est, rep}) add_common(cmd, common);
    est->add_option("--estimator", estimator, "flipd | flipd_auto | lidl | nb | lpca | mle")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        auto cfg = lid::load_config(common.config_path);
        if (common.seed) {
            cfg.seed = *common.seed;
            cfg.validate();
        }
        lid::RunOptions opts;
        opts.out_dir = common.out_dir.empty() ? cfg.output_dir : common.out_dir;
        opts.workers = common.workers;
        opts.force = common.force;
        opts.log = common.quiet ? nullptr : &std::cerr;

        if (gen->parsed()) lid::cmd_generate(cfg, opts);
        if (trn->parsed()) lid::cmd_train(cfg, opts);
        if (est->parsed()) lid::cmd_estimate(cfg, opts, estimator);
        if (rep->parsed()) lid::cmd_report(cfg, opts);
    } catch (const lid::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const lid::IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const lid::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitValidation;
    }
    return 0;
}
