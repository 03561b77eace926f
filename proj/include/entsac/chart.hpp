#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace entsac {

struct ChartSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;  // (x, y)
};

struct ChartSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<ChartSeries> series;
};

// Standalone SVG line chart with linear axes and a legend. Output bytes are
// deterministic for identical inputs.
std::string render_line_chart(const ChartSpec& spec);

void write_chart(const ChartSpec& spec, const std::filesystem::path& file);

// Builds a chart from a run directory's metrics.csv: env_step on x, one
// series per requested column; the legend names the run directory and the
// run's backup variant. Returns the output path.
std::filesystem::path plot_metrics(const std::filesystem::path& run_dir,
                                   const std::vector<std::string>& columns,
                                   const std::filesystem::path& out_file);

}  // namespace entsac
