#include "credo/config.hpp"

#include <stdexcept>

#include "credo/io.hpp"

namespace credo::cli {

nlohmann::json default_config() {
    return nlohmann::json{
        {"landscape",
         {{"length", 80},
          {"num_motifs", 16},
          {"activators", 6},
          {"repressors", 6},
          {"weight", 1.0},
          {"intercept", 0.0},
          {"saturation_bound", 10.0},
          {"label_noise_sd", 0.0},
          {"embed_rate", 1.0},
          {"dataset_size", 5000},
          {"motif_min_len", 8},
          {"motif_max_len", 10},
          {"vocab_seed", 7},
          {"seed", 1}}},
        {"scanner", {{"threshold_fraction", 0.85}, {"pseudocount", 0.1}, {"score", "probability"}}},
        {"surrogate",
         {{"rounds", 200},
          {"max_leaves", 63},
          {"learning_rate", 0.05},
          {"feature_fraction", 0.7},
          {"loss", "mae"},
          {"min_samples_leaf", 5},
          {"seed", 42}}},
        {"attribution",
         {{"alpha", 0.01},
          {"sample_size", 256},
          {"background", "zeros"},
          {"background_size", 64},
          {"mode", "exact"},
          {"permutations", 2000},
          {"seed", 5}}},
        {"policy",
         {{"context_window", 8},
          {"embedding_dim", 16},
          {"hidden_size", 64},
          {"init_seed", 3},
          {"pretrain",
           {{"epochs", 6}, {"lr", 0.05}, {"batch_size", 64}, {"clip_norm", 1.0}, {"seed", 3}}}}},
        {"optimize",
         {{"K", 256},
          {"E", 100},
          {"alpha", 0.01},
          {"policy_lr", 0.3},
          {"entropy_coef", 0.01},
          {"replay_fraction", 0.25},
          {"replay_capacity", 64},
          {"use_baseline", true},
          {"baseline_decay", 0.9},
          {"mode", "oracle_guided"},
          {"seed", 11},
          {"top_k", 16},
          {"best_m", 128},
          {"kmer_k", 4}}},
    };
}

namespace {

void merge_defaults(nlohmann::json& config, const nlohmann::json& defaults) {
    for (auto it = defaults.begin(); it != defaults.end(); ++it) {
        if (!config.contains(it.key())) {
            config[it.key()] = it.value();
        } else if (it.value().is_object() && config[it.key()].is_object()) {
            merge_defaults(config[it.key()], it.value());
        }
    }
}

}  // namespace

nlohmann::json apply_overrides(nlohmann::json config, const std::vector<std::string>& overrides) {
    for (const auto& kv : overrides) {
        const size_t eq = kv.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("--set expects key.path=value, got: " + kv);
        const std::string path = kv.substr(0, eq);
        const std::string raw = kv.substr(eq + 1);

        nlohmann::json* node = &config;
        size_t start = 0;
        while (true) {
            const size_t dot = path.find('.', start);
            const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
            if (key.empty()) throw std::invalid_argument("--set: empty key segment in " + path);
            if (dot == std::string::npos) {
                nlohmann::json value = nlohmann::json::parse(raw, nullptr, false);
                (*node)[key] = value.is_discarded() ? nlohmann::json(raw) : value;
                break;
            }
            node = &(*node)[key];
            start = dot + 1;
        }
    }
    return config;
}

nlohmann::json load_config(const std::filesystem::path& path,
                           const std::vector<std::string>& overrides) {
    nlohmann::json config;
    if (path.empty()) {
        config = nlohmann::json::object();
    } else {
        if (!std::filesystem::exists(path))
            throw std::invalid_argument("config file not found: " + path.string());
        config = nlohmann::json::parse(io::read_file(path));
    }
    merge_defaults(config, default_config());
    return apply_overrides(std::move(config), overrides);
}

LandscapeConfig landscape_config(const nlohmann::json& config) {
    const auto& j = config.at("landscape");
    LandscapeConfig lc;
    lc.length = j.at("length").get<int>();
    lc.num_motifs = j.at("num_motifs").get<int>();
    lc.activators = j.at("activators").get<int>();
    lc.repressors = j.at("repressors").get<int>();
    lc.weight = j.at("weight").get<double>();
    lc.intercept = j.at("intercept").get<double>();
    lc.saturation_bound = j.at("saturation_bound").get<double>();
    lc.label_noise_sd = j.at("label_noise_sd").get<double>();
    lc.embed_rate = j.at("embed_rate").get<double>();
    lc.dataset_size = j.at("dataset_size").get<int>();
    lc.motif_min_len = j.at("motif_min_len").get<int>();
    lc.motif_max_len = j.at("motif_max_len").get<int>();
    lc.vocab_seed = j.at("vocab_seed").get<uint64_t>();
    lc.seed = j.at("seed").get<uint64_t>();
    return lc;
}

motifs::ScanConfig scan_config(const nlohmann::json& config) {
    const auto& j = config.at("scanner");
    motifs::ScanConfig sc;
    sc.threshold_fraction = j.at("threshold_fraction").get<double>();
    const std::string score = j.at("score").get<std::string>();
    if (score == "probability")
        sc.score = motifs::ScoreKind::probability;
    else if (score == "log_odds")
        sc.score = motifs::ScoreKind::log_odds;
    else
        throw std::invalid_argument("scanner.score must be 'probability' or 'log_odds'");
    return sc;
}

surrogate::Config surrogate_config(const nlohmann::json& config) {
    const auto& j = config.at("surrogate");
    surrogate::Config sc;
    sc.rounds = j.at("rounds").get<int>();
    sc.max_leaves = j.at("max_leaves").get<int>();
    sc.learning_rate = j.at("learning_rate").get<double>();
    sc.feature_fraction = j.at("feature_fraction").get<double>();
    const std::string loss = j.at("loss").get<std::string>();
    if (loss == "mae")
        sc.loss = surrogate::Loss::mae;
    else if (loss == "rmse")
        sc.loss = surrogate::Loss::rmse;
    else
        throw std::invalid_argument("surrogate.loss must be 'mae' or 'rmse'");
    sc.min_samples_leaf = j.at("min_samples_leaf").get<int>();
    sc.seed = j.at("seed").get<uint64_t>();
    return sc;
}

policy::Shape policy_shape(const nlohmann::json& config) {
    const auto& j = config.at("policy");
    policy::Shape s;
    s.context_window = j.at("context_window").get<int>();
    s.embedding_dim = j.at("embedding_dim").get<int>();
    s.hidden_size = j.at("hidden_size").get<int>();
    return s;
}

policy::PretrainConfig pretrain_config(const nlohmann::json& config) {
    const auto& j = config.at("policy").at("pretrain");
    policy::PretrainConfig pc;
    pc.epochs = j.at("epochs").get<int>();
    pc.lr = j.at("lr").get<double>();
    pc.batch_size = j.at("batch_size").get<int>();
    pc.clip_norm = j.at("clip_norm").get<double>();
    pc.seed = j.at("seed").get<uint64_t>();
    return pc;
}

optimizer::RunConfig run_config(const nlohmann::json& config) {
    const auto& j = config.at("optimize");
    optimizer::RunConfig rc;
    rc.K = j.at("K").get<int>();
    rc.E = j.at("E").get<int>();
    rc.alpha = j.at("alpha").get<double>();
    rc.policy_lr = j.at("policy_lr").get<double>();
    rc.entropy_coef = j.at("entropy_coef").get<double>();
    rc.replay_fraction = j.at("replay_fraction").get<double>();
    rc.replay_capacity = j.at("replay_capacity").get<int>();
    rc.use_baseline = j.at("use_baseline").get<bool>();
    rc.baseline_decay = j.at("baseline_decay").get<double>();
    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "oracle_guided")
        rc.mode = optimizer::Mode::oracle_guided;
    else if (mode == "offline_mbo")
        rc.mode = optimizer::Mode::offline_mbo;
    else
        throw std::invalid_argument("optimize.mode must be 'oracle_guided' or 'offline_mbo'");
    rc.seed = j.at("seed").get<uint64_t>();
    rc.sequence_length = config.at("landscape").at("length").get<int>();
    rc.top_k = j.at("top_k").get<int>();
    rc.best_m = j.at("best_m").get<int>();
    rc.kmer_k = j.at("kmer_k").get<int>();
    return rc;
}

AttributionConfig attribution_config(const nlohmann::json& config) {
    const auto& j = config.at("attribution");
    AttributionConfig ac;
    ac.options.alpha = j.at("alpha").get<double>();
    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "exact")
        ac.options.mode = attribution::ShapMode::exact;
    else if (mode == "sampled")
        ac.options.mode = attribution::ShapMode::sampled;
    else
        throw std::invalid_argument("attribution.mode must be 'exact' or 'sampled'");
    ac.options.permutations = j.at("permutations").get<int>();
    ac.options.seed = j.at("seed").get<uint64_t>();
    ac.sample_size = j.at("sample_size").get<int>();
    ac.background = j.at("background").get<std::string>();
    if (ac.background != "zeros" && ac.background != "train")
        throw std::invalid_argument("attribution.background must be 'zeros' or 'train'");
    ac.background_size = j.at("background_size").get<int>();
    return ac;
}

}  // namespace credo::cli
