#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace entsac {

// One training-log row; fields missing at a given step stay empty in the CSV.
struct MetricsRow {
    std::uint64_t env_step = 0;
    std::optional<double> episode_return;
    std::optional<double> alpha;
    std::optional<double> log_alpha;
    std::optional<double> mean_batch_entropy;
    std::optional<double> critic_loss;
    std::optional<double> actor_loss;
    std::optional<double> temperature_loss;
    std::optional<double> eval_return_mean;
    std::optional<double> eval_return_std;
};

extern const char* const kMetricsHeader;

class MetricsWriter {
public:
    explicit MetricsWriter(const std::filesystem::path& file);

    void write(const MetricsRow& row);
    void flush() { out_.flush(); }

private:
    std::ofstream out_;
};

struct MetricsTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::optional<double>>> rows;

    std::size_t column_index(const std::string& name) const;
    // Non-empty (x = env_step, y = column) pairs.
    std::vector<std::pair<double, double>> series(const std::string& column) const;
};

MetricsTable read_metrics_csv(const std::filesystem::path& file);

}  // namespace entsac
