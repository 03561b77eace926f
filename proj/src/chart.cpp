#include "entsac/chart.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "entsac/config.hpp"
#include "entsac/errors.hpp"
#include "entsac/metrics.hpp"

namespace entsac {

namespace {

constexpr double kWidth = 960.0;
constexpr double kHeight = 540.0;
constexpr double kMarginLeft = 80.0;
constexpr double kMarginRight = 30.0;
constexpr double kMarginTop = 50.0;
constexpr double kMarginBottom = 60.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

// 1/2/5 * 10^k tick spacing near range/5.
double nice_step(double range) {
    double raw = range / 5.0;
    double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double frac = raw / mag;
    double nice = frac < 1.5 ? 1.0 : frac < 3.5 ? 2.0 : frac < 7.5 ? 5.0 : 10.0;
    return nice * mag;
}

}  // namespace

std::string render_line_chart(const ChartSpec& spec) {
    if (spec.series.empty()) throw ContractError("render_line_chart: no series");
    for (const auto& s : spec.series)
        if (s.points.empty())
            throw ContractError("render_line_chart: series '" + s.label + "' is empty");

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : spec.series)
        for (auto [x, y] : s.points) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    if (xmin == xmax) {
        xmin -= 1.0;
        xmax += 1.0;
    }
    if (ymin == ymax) {
        double pad = std::max(1.0, std::abs(ymin) * 0.1);
        ymin -= pad;
        ymax += pad;
    }
    double xpad = 0.02 * (xmax - xmin), ypad = 0.05 * (ymax - ymin);
    xmin -= xpad;
    xmax += xpad;
    ymin -= ypad;
    ymax += ypad;

    double plot_w = kWidth - kMarginLeft - kMarginRight;
    double plot_h = kHeight - kMarginTop - kMarginBottom;
    auto sx = [&](double x) { return kMarginLeft + (x - xmin) / (xmax - xmin) * plot_w; };
    auto sy = [&](double y) { return kMarginTop + (ymax - y) / (ymax - ymin) * plot_h; };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kWidth) + "\" height=\"" +
           fmt(kHeight) + "\" viewBox=\"0 0 " + fmt(kWidth) + " " + fmt(kHeight) + "\">\n";
    svg += "<rect width=\"" + fmt(kWidth) + "\" height=\"" + fmt(kHeight) +
           "\" fill=\"white\"/>\n";
    if (!spec.title.empty())
        svg += "<text x=\"" + fmt(kWidth / 2) +
               "\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"18\">" +
               escape_xml(spec.title) + "</text>\n";

    // Axes box.
    svg += "<rect x=\"" + fmt(kMarginLeft) + "\" y=\"" + fmt(kMarginTop) + "\" width=\"" +
           fmt(plot_w) + "\" height=\"" + fmt(plot_h) +
           "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";

    double xstep = nice_step(xmax - xmin);
    for (double tick = std::ceil(xmin / xstep) * xstep; tick <= xmax + 1e-12 * xstep;
         tick += xstep) {
        double px = sx(tick);
        svg += "<line x1=\"" + fmt(px) + "\" y1=\"" + fmt(kMarginTop + plot_h) + "\" x2=\"" +
               fmt(px) + "\" y2=\"" + fmt(kMarginTop + plot_h + 6) +
               "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
        svg += "<text x=\"" + fmt(px) + "\" y=\"" + fmt(kMarginTop + plot_h + 22) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
               fmt(tick) + "</text>\n";
    }
    double ystep = nice_step(ymax - ymin);
    for (double tick = std::ceil(ymin / ystep) * ystep; tick <= ymax + 1e-12 * ystep;
         tick += ystep) {
        double py = sy(tick);
        svg += "<line x1=\"" + fmt(kMarginLeft - 6) + "\" y1=\"" + fmt(py) + "\" x2=\"" +
               fmt(kMarginLeft) + "\" y2=\"" + fmt(py) +
               "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
        svg += "<text x=\"" + fmt(kMarginLeft - 10) + "\" y=\"" + fmt(py + 4) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" + fmt(tick) +
               "</text>\n";
    }
    if (!spec.x_label.empty())
        svg += "<text x=\"" + fmt(kMarginLeft + plot_w / 2) + "\" y=\"" + fmt(kHeight - 14) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" +
               escape_xml(spec.x_label) + "</text>\n";
    if (!spec.y_label.empty())
        svg += "<text x=\"20\" y=\"" + fmt(kMarginTop + plot_h / 2) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\" "
               "transform=\"rotate(-90 20 " +
               fmt(kMarginTop + plot_h / 2) + ")\">" + escape_xml(spec.y_label) + "</text>\n";

    for (std::size_t i = 0; i < spec.series.size(); ++i) {
        const auto& s = spec.series[i];
        const char* color = kPalette[i % (sizeof(kPalette) / sizeof(kPalette[0]))];
        if (s.points.size() > 1) {
            std::string points;
            for (auto [x, y] : s.points)
                points += fmt(sx(x)) + "," + fmt(sy(y)) + " ";
            svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
                   "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
        }
        if (s.points.size() <= 10)
            for (auto [x, y] : s.points)
                svg += "<circle cx=\"" + fmt(sx(x)) + "\" cy=\"" + fmt(sy(y)) +
                       "\" r=\"3\" fill=\"" + std::string(color) + "\"/>\n";
    }

    // Legend, top-right inside the plot area.
    double lx = kMarginLeft + plot_w - 250.0, ly = kMarginTop + 16.0;
    for (std::size_t i = 0; i < spec.series.size(); ++i) {
        const char* color = kPalette[i % (sizeof(kPalette) / sizeof(kPalette[0]))];
        svg += "<line x1=\"" + fmt(lx) + "\" y1=\"" + fmt(ly) + "\" x2=\"" + fmt(lx + 24) +
               "\" y2=\"" + fmt(ly) + "\" stroke=\"" + std::string(color) +
               "\" stroke-width=\"2\"/>\n";
        svg += "<text x=\"" + fmt(lx + 30) + "\" y=\"" + fmt(ly + 4) +
               "\" font-family=\"sans-serif\" font-size=\"12\">" + escape_xml(spec.series[i].label) +
               "</text>\n";
        ly += 18.0;
    }

    svg += "</svg>\n";
    return svg;
}

void write_chart(const ChartSpec& spec, const std::filesystem::path& file) {
    std::string svg = render_line_chart(spec);
    std::ofstream out(file);
    if (!out) throw IoError("cannot open '" + file.string() + "' for writing");
    out << svg;
    if (!out) throw IoError("failed writing '" + file.string() + "'");
}

std::filesystem::path plot_metrics(const std::filesystem::path& run_dir,
                                   const std::vector<std::string>& columns,
                                   const std::filesystem::path& out_file) {
    std::filesystem::path csv = run_dir / "metrics.csv";
    MetricsTable table = read_metrics_csv(csv);
    if (table.rows.empty())
        throw ConfigError("plot: '" + csv.string() + "' contains no data rows");

    std::string variant;
    std::filesystem::path config_path = run_dir / "config.json";
    if (std::filesystem::exists(config_path))
        variant = to_string(RunConfig::load(config_path.string()).variant);

    std::string run_name = run_dir.filename().string();
    if (run_name.empty()) run_name = run_dir.parent_path().filename().string();

    ChartSpec spec;
    spec.title = run_name;
    spec.x_label = "env_step";
    spec.y_label = columns.size() == 1 ? columns.front() : "value";
    for (const auto& column : columns) {
        ChartSeries series;
        series.label = run_name + (variant.empty() ? "" : " (" + variant + ")") + ": " + column;
        series.points = table.series(column);
        if (series.points.empty())
            throw ConfigError("plot: column '" + column + "' has no values in '" + csv.string() +
                              "'");
        spec.series.push_back(std::move(series));
    }

    write_chart(spec, out_file);
    return out_file;
}

}  // namespace entsac
