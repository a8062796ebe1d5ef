#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "lid/config.hpp"
#include "lid/score_model.hpp"

namespace lid {

struct RunOptions {
    /// Run directory; every artifact of a run lives here.
    std::filesystem::path out_dir;
    int workers = 0;
    bool force = false;
    /// Progress messages; nothing is written when null.
    std::ostream* log = nullptr;
};

namespace artifact {
inline const char* const kConfig = "config.json";
inline const char* const kDataset = "dataset.csv";
inline const char* const kCheckpoint = "model.ckpt";
inline const char* const kLoss = "loss.csv";
inline const char* const kReportCsv = "report.csv";
inline const char* const kReportText = "report.txt";
inline const char* const kCurves = "flipd_curves.csv";
std::string results(const std::string& estimator);
}  // namespace artifact

/// Writes the dataset CSV and a frozen copy of the config.
void cmd_generate(const ExperimentConfig& cfg, const RunOptions& opts);
/// Trains the configured MLP on the run's dataset; writes checkpoint and loss trace.
void cmd_train(const ExperimentConfig& cfg, const RunOptions& opts);
/// Runs one estimator on the evaluation subsample and writes its results CSV.
void cmd_estimate(const ExperimentConfig& cfg, const RunOptions& opts, const std::string& estimator);
/// Summarises every results CSV in the run directory.
void cmd_report(const ExperimentConfig& cfg, const RunOptions& opts);

/// Frozen config text: the config plus its hash, accepted by load_config.
std::string frozen_config(const ExperimentConfig& cfg);

/// Sorted indices of the evaluation subsample.
std::vector<Eigen::Index> evaluation_subsample(Eigen::Index n, Eigen::Index size, std::uint64_t seed);

/// The score model a run estimates with: the trained checkpoint or the oracle.
std::shared_ptr<const ScoreModel> load_run_model(const ExperimentConfig& cfg, const std::filesystem::path& dir);

bool is_model_based(const std::string& estimator);

}  // namespace lid
