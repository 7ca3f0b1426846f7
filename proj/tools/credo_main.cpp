// credo: TFBS-aware cis-regulatory element optimization pipeline.
//
// Subcommands: gen-data | pretrain | fit-surrogate | infer-roles | optimize |
// evaluate | report. Exit codes: 0 success, 1 runtime/numeric failure,
// 2 usage or configuration error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "credo/attribution.hpp"
#include "credo/config.hpp"
#include "credo/io.hpp"
#include "credo/landscape.hpp"
#include "credo/manifest.hpp"
#include "credo/metrics.hpp"
#include "credo/motifs.hpp"
#include "credo/optimizer.hpp"
#include "credo/policy.hpp"
#include "credo/report.hpp"
#include "credo/surrogate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir = "out";
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path,
                    "JSON config file (defaults from CREDO_CONFIG, else built-ins)");
    cmd->add_option("--set", args.overrides, "Override config keys, e.g. --set optimize.E=10");
    cmd->add_option("-o,--out-dir", args.out_dir, "Output directory");
}

json resolve_config(const CommonArgs& args) {
    std::string path = args.config_path;
    if (path.empty()) {
        if (const char* env = std::getenv("CREDO_CONFIG")) path = env;
    }
    return credo::cli::load_config(path, args.overrides);
}

struct DatasetBundle {
    credo::motifs::Vocabulary vocab;
    credo::landscape::LandscapeSpec spec;
    credo::motifs::ScanConfig scan_cfg;
    credo::landscape::Normalization bounds;
    json manifest;
};

DatasetBundle load_dataset_manifest(const fs::path& path) {
    DatasetBundle bundle;
    bundle.manifest = json::parse(credo::io::read_file(path));
    const auto& m = bundle.manifest;
    const double pseudocount = m.at("scanner").at("pseudocount").get<double>();
    bundle.vocab =
        credo::motifs::parse_jaspar(m.at("vocabulary_jaspar").get<std::string>(), pseudocount);
    bundle.spec = credo::landscape::spec_from_json(m.at("landscape_spec"));
    bundle.scan_cfg.threshold_fraction = m.at("scanner").at("threshold_fraction").get<double>();
    bundle.scan_cfg.score = m.at("scanner").at("score").get<std::string>() == "log_odds"
                                ? credo::motifs::ScoreKind::log_odds
                                : credo::motifs::ScoreKind::probability;
    bundle.bounds.min = m.at("normalization").at("min").get<double>();
    bundle.bounds.max = m.at("normalization").at("max").get<double>();
    return bundle;
}

std::vector<std::vector<double>> feature_matrix(const credo::landscape::LabeledDataset& ds,
                                                const credo::motifs::Vocabulary& vocab,
                                                const credo::motifs::ScanConfig& scan_cfg) {
    std::vector<std::vector<double>> X;
    X.reserve(ds.records.size());
    for (const auto& r : ds.records) {
        const auto counts = credo::motifs::extract_features(r.sequence, vocab, scan_cfg);
        X.emplace_back(counts.begin(), counts.end());
    }
    return X;
}

int cmd_gen_data(const CommonArgs& args, const std::string& partition_name) {
    const json config = resolve_config(args);
    const auto lc = credo::cli::landscape_config(config);
    const auto scan_cfg = credo::cli::scan_config(config);
    const double pseudocount = config.at("scanner").at("pseudocount").get<double>();

    const auto vocab = credo::landscape::make_vocabulary(lc.num_motifs, lc.motif_min_len,
                                                         lc.motif_max_len, lc.vocab_seed,
                                                         pseudocount);
    std::vector<std::string> vocab_ids;
    for (const auto& pfm : vocab) vocab_ids.push_back(pfm.id());
    auto spec = credo::landscape::make_planted_spec(vocab_ids, lc.activators, lc.repressors,
                                                    lc.weight);
    spec.intercept = lc.intercept;
    spec.saturation_bound = lc.saturation_bound;
    spec.label_noise_sd = lc.label_noise_sd;
    spec.seed = lc.seed;

    std::cerr << "gen-data: " << lc.dataset_size << " sequences of length " << lc.length << "\n";
    const auto ds = credo::landscape::generate_dataset(lc.dataset_size, lc.length, spec, vocab,
                                                       lc.embed_rate, lc.seed, scan_cfg);
    const auto normalized = credo::landscape::minmax_normalize(ds);

    const fs::path out(args.out_dir);
    fs::create_directories(out);
    const auto csv_path = out / "dataset.csv";
    const auto fasta_path = out / "dataset.fasta";
    const auto vocab_path = out / "vocab.jaspar";
    credo::io::write_file(csv_path, credo::landscape::dataset_to_csv(ds));
    std::vector<std::string> seqs;
    for (const auto& r : ds.records) seqs.push_back(r.sequence);
    credo::io::write_file(fasta_path, credo::io::to_fasta(seqs));
    credo::io::write_file(vocab_path, credo::motifs::to_jaspar(vocab));

    credo::cli::ManifestBuilder mb("gen-data", config);
    mb.add_field("landscape_spec", credo::landscape::spec_to_json(spec));
    mb.add_field("vocabulary_jaspar", credo::motifs::to_jaspar(vocab));
    mb.add_field("scanner", config.at("scanner"));
    mb.add_field("generation", json{{"n", lc.dataset_size},
                                    {"length", lc.length},
                                    {"embed_rate", lc.embed_rate},
                                    {"seed", lc.seed}});
    mb.add_field("normalization", json{{"min", normalized.normalization->min},
                                       {"max", normalized.normalization->max}});
    mb.add_output("dataset_csv", csv_path);
    mb.add_output("dataset_fasta", fasta_path);
    mb.add_output("vocabulary", vocab_path);

    if (!partition_name.empty()) {
        const auto pspec = credo::landscape::PartitionSpec::named(partition_name);
        const auto subset = credo::landscape::partition(ds, pspec);
        const auto subset_path = out / ("dataset_" + partition_name + ".csv");
        credo::io::write_file(subset_path, credo::landscape::dataset_to_csv(subset));
        mb.add_output("partition_" + partition_name, subset_path);
        std::cerr << "gen-data: partition " << partition_name << " kept " << subset.records.size()
                  << " records\n";
    }
    mb.write(out / "dataset.manifest.json");
    return 0;
}

int cmd_pretrain(const CommonArgs& args, const std::string& dataset_path) {
    const json config = resolve_config(args);
    const auto shape = credo::cli::policy_shape(config);
    const auto pc = credo::cli::pretrain_config(config);
    const uint64_t init_seed = config.at("policy").at("init_seed").get<uint64_t>();

    const auto ds = credo::landscape::dataset_from_csv(credo::io::read_file(dataset_path));
    std::vector<std::string> seqs;
    for (const auto& r : ds.records) seqs.push_back(r.sequence);

    std::cerr << "pretrain: " << seqs.size() << " sequences, " << pc.epochs << " epochs\n";
    const auto init = credo::policy::init_params(shape, init_seed);
    const auto result = credo::policy::pretrain(init, seqs, pc);
    if (!result.epoch_losses.empty())
        std::cerr << "pretrain: NLL " << result.epoch_losses.front() << " -> "
                  << result.epoch_losses.back() << "\n";

    const fs::path out(args.out_dir);
    fs::create_directories(out);
    const auto ckpt_path = out / "checkpoint.json";
    const auto curve_path = out / "pretrain_curve.csv";
    credo::io::write_file(ckpt_path, credo::policy::params_to_json(result.params).dump(2) + "\n");
    std::string curve = "epoch,nll\n";
    for (size_t e = 0; e < result.epoch_losses.size(); ++e)
        curve += std::to_string(e + 1) + "," + credo::io::fmt_g17(result.epoch_losses[e]) + "\n";
    credo::io::write_file(curve_path, curve);

    credo::cli::ManifestBuilder mb("pretrain", config);
    mb.add_input("dataset", dataset_path);
    mb.add_output("checkpoint", ckpt_path);
    mb.add_output("loss_curve", curve_path);
    mb.write(out / "pretrain.manifest.json");
    return 0;
}

int cmd_fit_surrogate(const CommonArgs& args, const std::string& dataset_path,
                      const std::string& manifest_path) {
    const json config = resolve_config(args);
    const auto sc = credo::cli::surrogate_config(config);
    const auto bundle = load_dataset_manifest(manifest_path);

    const auto ds = credo::landscape::dataset_from_csv(credo::io::read_file(dataset_path));
    std::cerr << "fit-surrogate: extracting features for " << ds.records.size() << " records\n";
    const auto X = feature_matrix(ds, bundle.vocab, bundle.scan_cfg);
    std::vector<double> y;
    for (const auto& r : ds.records) y.push_back(r.fitness);

    const auto model = credo::surrogate::fit(X, y, sc);
    const auto stats = credo::surrogate::evaluate(model, X, y);
    std::cerr << "fit-surrogate: training pearson " << stats.pearson << ", mae " << stats.mae
              << "\n";

    const fs::path out(args.out_dir);
    fs::create_directories(out);
    const auto model_path = out / "surrogate.json";
    const auto eval_path = out / "surrogate_eval.csv";
    credo::io::write_file(model_path, credo::surrogate::model_to_json(model).dump() + "\n");
    credo::io::write_file(eval_path, "pearson,mae,rmse\n" + credo::io::fmt_g17(stats.pearson) +
                                         "," + credo::io::fmt_g17(stats.mae) + "," +
                                         credo::io::fmt_g17(stats.rmse) + "\n");

    credo::cli::ManifestBuilder mb("fit-surrogate", config);
    mb.add_input("dataset", dataset_path);
    mb.add_input("dataset_manifest", manifest_path);
    mb.add_output("model", model_path);
    mb.add_output("eval", eval_path);
    mb.write(out / "surrogate.manifest.json");
    return 0;
}

int cmd_infer_roles(const CommonArgs& args, const std::string& model_path,
                    const std::string& dataset_path, const std::string& manifest_path) {
    const json config = resolve_config(args);
    const auto ac = credo::cli::attribution_config(config);
    const auto bundle = load_dataset_manifest(manifest_path);
    const auto model =
        credo::surrogate::model_from_json(json::parse(credo::io::read_file(model_path)));
    const auto ds = credo::landscape::dataset_from_csv(credo::io::read_file(dataset_path));

    std::cerr << "infer-roles: explaining " << ac.sample_size << " records ("
              << (ac.options.mode == credo::attribution::ShapMode::exact ? "exact" : "sampled")
              << " mode, " << ac.background << " background)\n";

    credo::Rng rng(credo::mix_seed(ac.options.seed, 0x5a6eULL));
    std::vector<size_t> order(ds.records.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);

    const size_t m = std::min<size_t>(static_cast<size_t>(ac.sample_size), order.size());
    credo::attribution::Matrix sample;
    for (size_t i = 0; i < m; ++i) {
        const auto counts = credo::motifs::extract_features(ds.records[order[i]].sequence,
                                                            bundle.vocab, bundle.scan_cfg);
        sample.emplace_back(counts.begin(), counts.end());
    }

    credo::attribution::Matrix background;
    if (ac.background == "zeros") {
        background.push_back(std::vector<double>(bundle.vocab.size(), 0.0));
    } else {
        const size_t bg = std::min<size_t>(static_cast<size_t>(ac.background_size),
                                           order.size() - m);
        for (size_t i = 0; i < bg; ++i) {
            const auto counts = credo::motifs::extract_features(ds.records[order[m + i]].sequence,
                                                                bundle.vocab, bundle.scan_cfg);
            background.emplace_back(counts.begin(), counts.end());
        }
    }

    const credo::attribution::PredictFn predict = [&](const std::vector<double>& x) {
        return model.predict(x);
    };
    std::vector<std::string> ids;
    for (const auto& pfm : bundle.vocab) ids.push_back(pfm.id());
    const auto table =
        credo::attribution::build_role_table(predict, sample, background, ids, ac.options);

    const fs::path out(args.out_dir);
    fs::create_directories(out);
    const auto roles_path = out / "roles.csv";
    credo::io::write_file(roles_path, credo::attribution::role_table_to_csv(table));

    credo::cli::ManifestBuilder mb("infer-roles", config);
    mb.add_input("model", model_path);
    mb.add_input("dataset", dataset_path);
    mb.add_input("dataset_manifest", manifest_path);
    mb.add_output("role_table", roles_path);
    mb.write(out / "roles.manifest.json");
    return 0;
}

int cmd_optimize(const CommonArgs& args, const std::string& checkpoint_path,
                 const std::string& roles_path, const std::string& manifest_path,
                 const std::string& surrogate_path) {
    const json config = resolve_config(args);
    auto rc = credo::cli::run_config(config);
    const auto bundle = load_dataset_manifest(manifest_path);
    rc.sequence_length = bundle.manifest.at("generation").at("length").get<int>();

    const auto params =
        credo::policy::params_from_json(json::parse(credo::io::read_file(checkpoint_path)));
    auto table = credo::attribution::role_table_from_csv(credo::io::read_file(roles_path));
    // rewards are alpha * mean_shap for gate-passing motifs; rescale them to
    // this run's alpha (alpha = 0 disables shaping entirely)
    table.alpha = rc.alpha;
    for (auto& e : table.entries) {
        e.reward = e.reward != 0.0 ? rc.alpha * e.mean_shap : 0.0;
        e.role = e.reward > 0   ? credo::attribution::Role::activator
                 : e.reward < 0 ? credo::attribution::Role::repressor
                                : credo::attribution::Role::neutral;
    }

    const credo::optimizer::GuideFn oracle = [&](const std::string& seq) {
        return credo::landscape::oracle_fitness(seq, bundle.spec, bundle.vocab, bundle.scan_cfg);
    };

    credo::optimizer::RunInputs inputs;
    inputs.pretrained = &params;
    inputs.role_table = &table;
    inputs.vocab = &bundle.vocab;
    inputs.scan_cfg = bundle.scan_cfg;
    inputs.bounds = bundle.bounds;
    inputs.oracle = oracle;

    std::optional<credo::surrogate::GBDTModel> model;
    if (rc.mode == credo::optimizer::Mode::offline_mbo) {
        if (surrogate_path.empty())
            throw std::invalid_argument("optimize: offline_mbo mode requires --surrogate");
        model = credo::surrogate::model_from_json(
            json::parse(credo::io::read_file(surrogate_path)));
        inputs.guide = [&](const std::string& seq) {
            const auto counts =
                credo::motifs::extract_features(seq, bundle.vocab, bundle.scan_cfg);
            const std::vector<double> x(counts.begin(), counts.end());
            return model->predict(x);
        };
    } else {
        inputs.guide = oracle;
    }

    std::cerr << "optimize: " << rc.E << " rounds of K=" << rc.K << " ("
              << (rc.mode == credo::optimizer::Mode::offline_mbo ? "offline_mbo" : "oracle_guided")
              << ", alpha=" << rc.alpha << ")\n";
    const auto log = credo::optimizer::run_optimization(rc, inputs);
    std::cerr << "optimize: final top " << log.rows.back().metrics.top << ", diversity "
              << log.rows.back().metrics.diversity << "\n";

    const fs::path out(args.out_dir);
    fs::create_directories(out);
    const auto log_path = out / "run_log.csv";
    const auto proposals_path = out / "proposals.csv";
    const auto fasta_path = out / "proposals.fasta";
    credo::io::write_file(log_path, credo::optimizer::run_log_to_csv(log));
    credo::io::write_file(proposals_path, credo::optimizer::proposals_to_csv(log.final_proposals));
    std::vector<std::string> seqs;
    for (const auto& p : log.final_proposals) seqs.push_back(p.sequence);
    credo::io::write_file(fasta_path, credo::io::to_fasta(seqs));

    credo::cli::ManifestBuilder mb("optimize", config);
    mb.add_input("checkpoint", checkpoint_path);
    mb.add_input("role_table", roles_path);
    mb.add_input("dataset_manifest", manifest_path);
    if (!surrogate_path.empty()) mb.add_input("surrogate", surrogate_path);
    mb.add_output("run_log", log_path);
    mb.add_output("proposals_csv", proposals_path);
    mb.add_output("proposals_fasta", fasta_path);
    mb.write(out / "optimize.manifest.json");
    return 0;
}

int cmd_evaluate(const CommonArgs& args, const std::string& fasta_path,
                 const std::string& scores_path) {
    const json config = resolve_config(args);
    const auto rc = credo::cli::run_config(config);

    const auto seqs = credo::io::parse_fasta(credo::io::read_file(fasta_path));
    const auto rows = credo::io::parse_csv(credo::io::read_file(scores_path));
    if (rows.size() < 2) throw std::invalid_argument("evaluate: empty score CSV");
    int score_col = -1;
    for (size_t c = 0; c < rows[0].size(); ++c)
        if (rows[0][c] == "score" || rows[0][c] == "guide_score" || rows[0][c] == "fitness")
            score_col = static_cast<int>(c);
    if (score_col < 0)
        throw std::invalid_argument("evaluate: score CSV needs a score/guide_score/fitness column");
    if (rows.size() - 1 != seqs.size())
        throw std::invalid_argument("evaluate: FASTA and score CSV row counts differ");

    std::vector<credo::metrics::Scored> scored;
    for (size_t i = 0; i < seqs.size(); ++i)
        scored.push_back({seqs[i], std::stod(rows[i + 1][static_cast<size_t>(score_col)])});

    const auto rm = credo::metrics::compute_round_metrics(scored, rc.top_k, rc.best_m, rc.kmer_k);
    const std::string out_csv = "top,medium,diversity,emb_similarity\n" +
                                credo::io::fmt_f6(rm.top) + "," + credo::io::fmt_f6(rm.medium) +
                                "," + credo::io::fmt_f6(rm.diversity) + "," +
                                credo::io::fmt_f6(rm.emb_similarity) + "\n";
    const fs::path out(args.out_dir);
    fs::create_directories(out);
    credo::io::write_file(out / "metrics.csv", out_csv);
    std::cout << out_csv;
    return 0;
}

int cmd_report(const CommonArgs& args, const std::vector<std::string>& log_paths,
               const std::vector<std::string>& role_table_paths) {
    if (log_paths.empty() && role_table_paths.empty())
        throw std::invalid_argument("report: no run logs or role tables given");

    const fs::path out(args.out_dir);
    if (!log_paths.empty()) {
        std::vector<credo::optimizer::RunLog> logs;
        for (const auto& p : log_paths)
            logs.push_back(credo::optimizer::run_log_from_csv(credo::io::read_file(p)));
        const auto written = credo::cli::write_report(logs, out);
        std::cerr << "report: wrote " << written.size() << " files to " << out.string() << "\n";
    }
    if (!role_table_paths.empty()) {
        if (role_table_paths.size() < 2)
            throw std::invalid_argument("report: need at least 2 role tables for a comparison");
        std::vector<credo::attribution::RoleTable> tables;
        std::vector<std::string> names;
        for (const auto& p : role_table_paths) {
            tables.push_back(
                credo::attribution::role_table_from_csv(credo::io::read_file(p)));
            names.push_back(fs::path(p).stem().string());
        }
        const auto cmp = credo::attribution::compare_roles(tables, names);
        fs::create_directories(out);
        credo::io::write_file(out / "role_venn.csv", credo::attribution::comparison_to_csv(cmp));
        std::cerr << "report: wrote role comparison to " << (out / "role_venn.csv").string()
                  << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"TFBS-aware cis-regulatory element optimization"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string partition_name, dataset_path, manifest_path, model_path, checkpoint_path;
    std::string roles_path, surrogate_path, fasta_path, scores_path;
    std::vector<std::string> log_paths, role_table_paths;

    auto* gen = app.add_subcommand("gen-data", "Generate a synthetic labeled dataset");
    add_common(gen, args);
    gen->add_option("--partition", partition_name,
                    "Also write a percentile partition (easy|middle|hard|offline95)");

    auto* pre = app.add_subcommand("pretrain", "Pretrain the autoregressive policy");
    add_common(pre, args);
    pre->add_option("--dataset", dataset_path, "Dataset CSV (sequences used, labels ignored)")
        ->required();

    auto* fitcmd = app.add_subcommand("fit-surrogate", "Fit the GBDT surrogate on TFBS features");
    add_common(fitcmd, args);
    fitcmd->add_option("--dataset", dataset_path, "Dataset CSV")->required();
    fitcmd->add_option("--manifest", manifest_path, "Dataset manifest JSON")->required();

    auto* roles = app.add_subcommand("infer-roles", "Infer motif roles via Shapley attribution");
    add_common(roles, args);
    roles->add_option("--model", model_path, "Surrogate model JSON")->required();
    roles->add_option("--dataset", dataset_path, "Dataset CSV")->required();
    roles->add_option("--manifest", manifest_path, "Dataset manifest JSON")->required();

    auto* opt = app.add_subcommand("optimize", "RL fine-tuning of the policy");
    add_common(opt, args);
    opt->add_option("--checkpoint", checkpoint_path, "Pretrained policy checkpoint")->required();
    opt->add_option("--roles", roles_path, "Role table CSV")->required();
    opt->add_option("--manifest", manifest_path, "Dataset manifest JSON")->required();
    opt->add_option("--surrogate", surrogate_path, "Surrogate model JSON (offline_mbo mode)");

    auto* eval = app.add_subcommand("evaluate", "Compute round metrics for FASTA + scores");
    add_common(eval, args);
    eval->add_option("--fasta", fasta_path, "Proposal FASTA")->required();
    eval->add_option("--scores", scores_path, "Score CSV")->required();

    auto* rep = app.add_subcommand("report", "Aggregate run logs into CSV + SVG charts");
    add_common(rep, args);
    rep->add_option("--logs", log_paths, "Run log CSVs");
    rep->add_option("--role-tables", role_table_paths, "Role table CSVs for a Venn comparison");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed()) return cmd_gen_data(args, partition_name);
        if (pre->parsed()) return cmd_pretrain(args, dataset_path);
        if (fitcmd->parsed()) return cmd_fit_surrogate(args, dataset_path, manifest_path);
        if (roles->parsed()) return cmd_infer_roles(args, model_path, dataset_path, manifest_path);
        if (opt->parsed())
            return cmd_optimize(args, checkpoint_path, roles_path, manifest_path, surrogate_path);
        if (eval->parsed()) return cmd_evaluate(args, fasta_path, scores_path);
        if (rep->parsed()) return cmd_report(args, log_paths, role_table_paths);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
