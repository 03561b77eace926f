#include "entsac/metrics.hpp"

#include <cstdio>
#include <sstream>

#include "entsac/errors.hpp"

namespace entsac {

const char* const kMetricsHeader =
    "env_step,episode_return,alpha,log_alpha,mean_batch_entropy,critic_loss,actor_loss,"
    "temperature_loss,eval_return_mean,eval_return_std";

MetricsWriter::MetricsWriter(const std::filesystem::path& file) : out_(file) {
    if (!out_) throw IoError("cannot open '" + file.string() + "' for writing");
    out_ << kMetricsHeader << '\n';
}

namespace {

void append_field(std::string& line, const std::optional<double>& value) {
    line.push_back(',');
    if (!value) return;
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", *value);
    line += buf;
}

}  // namespace

void MetricsWriter::write(const MetricsRow& row) {
    std::string line = std::to_string(row.env_step);
    append_field(line, row.episode_return);
    append_field(line, row.alpha);
    append_field(line, row.log_alpha);
    append_field(line, row.mean_batch_entropy);
    append_field(line, row.critic_loss);
    append_field(line, row.actor_loss);
    append_field(line, row.temperature_loss);
    append_field(line, row.eval_return_mean);
    append_field(line, row.eval_return_std);
    out_ << line << '\n';
}

std::size_t MetricsTable::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return i;
    throw ConfigError("metrics: unknown column '" + name + "'");
}

std::vector<std::pair<double, double>> MetricsTable::series(const std::string& column) const {
    std::size_t step_col = column_index("env_step");
    std::size_t value_col = column_index(column);
    std::vector<std::pair<double, double>> out;
    for (const auto& row : rows) {
        if (!row[step_col] || !row[value_col]) continue;
        out.emplace_back(*row[step_col], *row[value_col]);
    }
    return out;
}

MetricsTable read_metrics_csv(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open '" + file.string() + "'");

    MetricsTable table;
    std::string line;
    if (!std::getline(in, line)) throw IoError("metrics file '" + file.string() + "' is empty");
    std::stringstream header(line);
    std::string cell;
    while (std::getline(header, cell, ',')) table.columns.push_back(cell);

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::optional<double>> row;
        std::size_t start = 0;
        while (true) {
            std::size_t comma = line.find(',', start);
            std::string field = line.substr(start, comma == std::string::npos
                                                       ? std::string::npos
                                                       : comma - start);
            if (field.empty())
                row.emplace_back(std::nullopt);
            else
                row.emplace_back(std::stod(field));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        while (row.size() < table.columns.size()) row.emplace_back(std::nullopt);
        if (row.size() != table.columns.size())
            throw IoError("metrics file '" + file.string() + "': ragged row");
        table.rows.push_back(std::move(row));
    }
    return table;
}

}  // namespace entsac
