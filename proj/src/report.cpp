#include "credo/report.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "credo/io.hpp"

namespace credo::cli {

namespace {

constexpr const char* kMetricNames[] = {"top",          "medium",      "diversity",
                                        "emb_similarity", "mean_return", "mean_entropy",
                                        "buffer_min",   "buffer_max",  "oracle_top"};

double metric_value(const optimizer::RoundRow& row, const std::string& name) {
    if (name == "top") return row.metrics.top;
    if (name == "medium") return row.metrics.medium;
    if (name == "diversity") return row.metrics.diversity;
    if (name == "emb_similarity") return row.metrics.emb_similarity;
    if (name == "mean_return") return row.mean_return;
    if (name == "mean_entropy") return row.mean_entropy;
    if (name == "buffer_min") return row.buffer_min;
    if (name == "buffer_max") return row.buffer_max;
    if (name == "oracle_top") return row.oracle_top;
    throw std::invalid_argument("unknown metric: " + name);
}

}  // namespace

ReportData aggregate_logs(const std::vector<optimizer::RunLog>& logs) {
    if (logs.empty()) throw std::invalid_argument("report: no run logs given");
    const size_t rounds = logs[0].rows.size();
    if (rounds == 0) throw std::invalid_argument("report: empty run log");
    for (const auto& log : logs)
        if (log.rows.size() != rounds)
            throw std::invalid_argument("report: run logs disagree on round count");

    ReportData data;
    data.rounds.reserve(rounds);
    for (const auto& row : logs[0].rows) data.rounds.push_back(row.round);

    for (const char* name : kMetricNames) {
        AggregatedSeries series;
        series.name = name;
        series.mean.resize(rounds, 0.0);
        series.sd.resize(rounds, 0.0);
        for (size_t r = 0; r < rounds; ++r) {
            double mean = 0.0;
            for (const auto& log : logs) mean += metric_value(log.rows[r], name);
            mean /= static_cast<double>(logs.size());
            double var = 0.0;
            if (logs.size() > 1) {
                for (const auto& log : logs) {
                    const double d = metric_value(log.rows[r], name) - mean;
                    var += d * d;
                }
                var /= static_cast<double>(logs.size() - 1);
            }
            series.mean[r] = mean;
            series.sd[r] = std::sqrt(var);
        }
        data.series.push_back(std::move(series));
    }
    return data;
}

std::string report_to_csv(const ReportData& data) {
    std::string out = "round";
    for (const auto& s : data.series) out += "," + s.name + "_mean," + s.name + "_sd";
    out += "\n";
    for (size_t r = 0; r < data.rounds.size(); ++r) {
        out += std::to_string(data.rounds[r]);
        for (const auto& s : data.series)
            out += "," + io::fmt_f6(s.mean[r]) + "," + io::fmt_f6(s.sd[r]);
        out += "\n";
    }
    return out;
}

namespace {

struct ChartGeometry {
    double width = 640, height = 400;
    double margin_left = 64, margin_right = 16, margin_top = 36, margin_bottom = 44;

    double plot_w() const { return width - margin_left - margin_right; }
    double plot_h() const { return height - margin_top - margin_bottom; }
};

std::string fmt_coord(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string fmt_tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

}  // namespace

std::string render_svg_chart(const std::string& title, const std::vector<int>& rounds,
                             const std::vector<AggregatedSeries>& series) {
    if (rounds.empty() || series.empty()) throw std::invalid_argument("chart: empty data");
    ChartGeometry g;

    double lo = series[0].mean[0] - series[0].sd[0];
    double hi = series[0].mean[0] + series[0].sd[0];
    for (const auto& s : series) {
        for (size_t i = 0; i < s.mean.size(); ++i) {
            lo = std::min(lo, s.mean[i] - s.sd[i]);
            hi = std::max(hi, s.mean[i] + s.sd[i]);
        }
    }
    if (hi <= lo) hi = lo + 1.0;
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;

    const double x_min = rounds.front(), x_max = std::max<double>(rounds.back(), x_min + 1);
    auto sx = [&](double r) { return g.margin_left + (r - x_min) / (x_max - x_min) * g.plot_w(); };
    auto sy = [&](double v) { return g.margin_top + (hi - v) / (hi - lo) * g.plot_h(); };

    static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt_coord(g.width) +
           "\" height=\"" + fmt_coord(g.height) + "\" viewBox=\"0 0 " + fmt_coord(g.width) + " " +
           fmt_coord(g.height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + fmt_coord(g.width / 2) + "\" y=\"20\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"14\">" + title + "</text>\n";

    // axes
    svg += "<line x1=\"" + fmt_coord(g.margin_left) + "\" y1=\"" + fmt_coord(g.margin_top) +
           "\" x2=\"" + fmt_coord(g.margin_left) + "\" y2=\"" +
           fmt_coord(g.margin_top + g.plot_h()) + "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + fmt_coord(g.margin_left) + "\" y1=\"" +
           fmt_coord(g.margin_top + g.plot_h()) + "\" x2=\"" +
           fmt_coord(g.margin_left + g.plot_w()) + "\" y2=\"" +
           fmt_coord(g.margin_top + g.plot_h()) + "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double v = lo + (hi - lo) * t / 4.0;
        const double y = sy(v);
        svg += "<line x1=\"" + fmt_coord(g.margin_left - 4) + "\" y1=\"" + fmt_coord(y) +
               "\" x2=\"" + fmt_coord(g.margin_left) + "\" y2=\"" + fmt_coord(y) +
               "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + fmt_coord(g.margin_left - 8) + "\" y=\"" + fmt_coord(y + 4) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
               fmt_tick(v) + "</text>\n";
        const double xr = x_min + (x_max - x_min) * t / 4.0;
        const double x = sx(xr);
        svg += "<line x1=\"" + fmt_coord(x) + "\" y1=\"" + fmt_coord(g.margin_top + g.plot_h()) +
               "\" x2=\"" + fmt_coord(x) + "\" y2=\"" + fmt_coord(g.margin_top + g.plot_h() + 4) +
               "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + fmt_coord(x) + "\" y=\"" + fmt_coord(g.margin_top + g.plot_h() + 18) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
               fmt_tick(xr) + "</text>\n";
    }
    svg += "<text x=\"" + fmt_coord(g.margin_left + g.plot_w() / 2) + "\" y=\"" +
           fmt_coord(g.height - 8) + "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"12\">round</text>\n";

    for (size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* color = kColors[si % 4];
        bool has_band = false;
        for (double sd : s.sd) has_band = has_band || sd > 0;
        if (has_band) {
            std::string band = "<polygon fill=\"" + std::string(color) +
                               "\" fill-opacity=\"0.15\" stroke=\"none\" points=\"";
            for (size_t i = 0; i < s.mean.size(); ++i)
                band += fmt_coord(sx(rounds[i])) + "," + fmt_coord(sy(s.mean[i] + s.sd[i])) + " ";
            for (size_t i = s.mean.size(); i-- > 0;)
                band += fmt_coord(sx(rounds[i])) + "," + fmt_coord(sy(s.mean[i] - s.sd[i])) + " ";
            band += "\"/>\n";
            svg += band;
        }
        std::string line = "<polyline fill=\"none\" stroke=\"" + std::string(color) +
                           "\" stroke-width=\"1.5\" points=\"";
        for (size_t i = 0; i < s.mean.size(); ++i)
            line += fmt_coord(sx(rounds[i])) + "," + fmt_coord(sy(s.mean[i])) + " ";
        line += "\"/>\n";
        svg += line;
        svg += "<text x=\"" + fmt_coord(g.margin_left + 8) + "\" y=\"" +
               fmt_coord(g.margin_top + 14 + 14 * static_cast<double>(si)) +
               "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" + color + "\">" + s.name +
               "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

std::vector<std::filesystem::path> write_report(const std::vector<optimizer::RunLog>& logs,
                                                const std::filesystem::path& out_dir) {
    const ReportData data = aggregate_logs(logs);
    std::filesystem::create_directories(out_dir);
    std::vector<std::filesystem::path> written;

    const auto csv_path = out_dir / "report.csv";
    io::write_file(csv_path, report_to_csv(data));
    written.push_back(csv_path);

    for (const auto& s : data.series) {
        std::vector<AggregatedSeries> group{s};
        // the surrogate-scored and oracle-scored Top
        // curves share one chart in offline runs.
        if (s.name == "top") {
            for (const auto& other : data.series)
                if (other.name == "oracle_top") group.push_back(other);
        }
        const auto path = out_dir / (s.name + ".svg");
        io::write_file(path, render_svg_chart(s.name + " by round", data.rounds, group));
        written.push_back(path);
    }
    return written;
}

}  // namespace credo::cli
