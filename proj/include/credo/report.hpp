#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "credo/optimizer.hpp"

namespace credo::cli {

// Mean and sample standard deviation per round per metric across several run
// logs (logs must agree on round count).
struct AggregatedSeries {
    std::string name;
    std::vector<double> mean;
    std::vector<double> sd;
};

struct ReportData {
    std::vector<int> rounds;
    std::vector<AggregatedSeries> series;
};

ReportData aggregate_logs(const std::vector<optimizer::RunLog>& logs);
std::string report_to_csv(const ReportData& data);

// Simple polyline chart with a +/- sd band; byte-stable output (fixed-format
// numbers, no timestamps) so golden tests can compare bytes.
std::string render_svg_chart(const std::string& title, const std::vector<int>& rounds,
                             const std::vector<AggregatedSeries>& series);

// Writes report.csv plus one SVG per metric to out_dir; returns written paths.
std::vector<std::filesystem::path> write_report(const std::vector<optimizer::RunLog>& logs,
                                                const std::filesystem::path& out_dir);

}  // namespace credo::cli
