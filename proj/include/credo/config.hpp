#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "credo/attribution.hpp"
#include "credo/motifs.hpp"
#include "credo/optimizer.hpp"
#include "credo/policy.hpp"
#include "credo/surrogate.hpp"

namespace credo::cli {

// The single structured configuration tree shared by every subcommand.
// Defaults mirror the desk-scale experiment: L=80, 16 motifs (6 activators,
// 6 repressors, 4 neutral), 5000 records, K=256, E=100, alpha=0.01.
nlohmann::json default_config();

// Config file plus "--set key.path=value" overrides (dotted paths; values
// parsed as JSON when possible, else kept as strings).
nlohmann::json load_config(const std::filesystem::path& path,
                           const std::vector<std::string>& overrides);
nlohmann::json apply_overrides(nlohmann::json config, const std::vector<std::string>& overrides);

struct LandscapeConfig {
    int length = 80;
    int num_motifs = 16;
    int activators = 6;
    int repressors = 6;
    double weight = 1.0;
    double intercept = 0.0;
    double saturation_bound = 10.0;
    double label_noise_sd = 0.0;
    double embed_rate = 1.0;
    int dataset_size = 5000;
    int motif_min_len = 8;
    int motif_max_len = 10;
    uint64_t vocab_seed = 7;
    uint64_t seed = 1;
};

LandscapeConfig landscape_config(const nlohmann::json& config);
motifs::ScanConfig scan_config(const nlohmann::json& config);
surrogate::Config surrogate_config(const nlohmann::json& config);
policy::Shape policy_shape(const nlohmann::json& config);
policy::PretrainConfig pretrain_config(const nlohmann::json& config);
optimizer::RunConfig run_config(const nlohmann::json& config);

struct AttributionConfig {
    attribution::RoleTableOptions options;
    int sample_size = 256;
    std::string background = "zeros";  // "zeros" or "train"
    int background_size = 64;
};

AttributionConfig attribution_config(const nlohmann::json& config);

}  // namespace credo::cli
