#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lid/bench.hpp"
#include "lid/record.hpp"

namespace lid {

/// Raised for unreadable or unwritable files and malformed file contents.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double value);

std::string read_file(const std::filesystem::path& path);
/// Writes atomically enough for our purposes (temp file then rename). Refuses
/// to replace an existing file unless `force` is set.
void write_file(const std::filesystem::path& path, const std::string& content, bool force);

/// "# key=value" provenance lines at the top of CSV outputs.
using Metadata = std::vector<std::pair<std::string, std::string>>;

/// Columns x_0..x_{D-1}, lid_label, component_id; one row per point.
std::string dataset_csv(const LabeledDataset& ds, const Metadata& meta);
LabeledDataset parse_dataset_csv(const std::string& text);

struct ResultRow {
    Eigen::Index point_index = 0;
    std::string estimator;
    double lid = 0.0;
    double t0 = 0.0;
    int label = 0;
    std::string trace_mode;
    bool fallback = false;
    std::vector<std::pair<std::string, double>> extra;
};

struct ResultTable {
    Metadata meta;
    std::vector<ResultRow> rows;

    /// Value of a metadata key, or empty.
    std::string get(const std::string& key) const;
};

/// point_index, estimator, lid_estimate, t0_or_knee, lid_label, trace_mode,
/// fallback, then the estimator's extra columns.
std::string results_csv(const ResultTable& table);
ResultTable parse_results_csv(const std::string& text);

}  // namespace lid
