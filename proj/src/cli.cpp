#include "gcl/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "gcl/config.hpp"
#include "gcl/io.hpp"
#include "gcl/pipeline.hpp"

namespace fs = std::filesystem;

namespace gcl {

namespace {

using nlohmann::json;

struct ConfigArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
};

RunConfig resolve_config(const ConfigArgs& args) {
    json doc = json::object();
    if (!args.config_path.empty()) {
        std::ifstream in(args.config_path);
        if (!in) throw SchemaError("config: cannot open " + args.config_path);
        try {
            in >> doc;
        } catch (const json::exception& e) {
            throw SchemaError("config: " + args.config_path + ": " + e.what());
        }
    }
    for (const std::string& kv : args.overrides) apply_override(doc, kv);
    if (args.seed) doc["seed"] = *args.seed;
    return parse_run_config(doc);
}

void add_config_options(CLI::App* cmd, ConfigArgs& args) {
    cmd->add_option("--config", args.config_path, "Run configuration (JSON)");
    cmd->add_option("--set", args.overrides,
                    "Override a config key, e.g. --set train.epochs=100");
    cmd->add_option("--seed", args.seed, "Override the config seed");
}

std::vector<int> collect_graph_labels(const std::vector<Graph>& graphs) {
    std::vector<int> labels;
    labels.reserve(graphs.size());
    for (const Graph& g : graphs) {
        if (!g.graph_label)
            throw SchemaError("dataset: graph without a label cannot be probed");
        labels.push_back(*g.graph_label);
    }
    return labels;
}

void write_resolved_config(const RunConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    std::ofstream out(cfg.out_dir + "/resolved_config.json");
    if (!out) throw SchemaError("cannot write " + cfg.out_dir + "/resolved_config.json");
    out << resolved_config_json(cfg).dump(2) << '\n';
}

int cmd_pretrain(const ConfigArgs& args) {
    const RunConfig cfg = resolve_config(args);
    if (cfg.dataset.empty()) throw SchemaError("pretrain: config needs a dataset path");
    fs::create_directories(cfg.out_dir);
    write_resolved_config(cfg);

    CheckpointSink sink;
    if (cfg.train.checkpoint_every > 0) {
        const std::string out_dir = cfg.out_dir;
        sink = [out_dir](int epoch, const ModelParams& params) {
            char name[64];
            std::snprintf(name, sizeof(name), "checkpoint_%06d.bin", epoch);
            save_params(params, out_dir + "/" + name);
        };
    }

    PretrainResult result;
    if (cfg.task == Task::node) {
        const NodeDataset data = load_node_dataset(cfg.dataset);
        result = pretrain(data.graph, cfg.train, {}, sink);
    } else {
        const std::vector<Graph> graphs = load_tu_dataset(cfg.dataset);
        result = pretrain(std::span<const Graph>(graphs), cfg.train, {}, sink);
    }
    save_params(result.params, cfg.out_dir + "/params.bin");
    write_trace(result.trace, cfg.out_dir + "/trace.csv", cfg.trace_wall_time);
    std::cout << "pretrain: " << result.trace.epochs.size() << " epochs, final loss "
              << result.trace.epochs.back().loss << ", artifacts in " << cfg.out_dir << "\n";
    return 0;
}

int cmd_probe(const ConfigArgs& args, const std::string& params_override) {
    const RunConfig cfg = resolve_config(args);
    if (cfg.dataset.empty()) throw SchemaError("probe: config needs a dataset path");
    const std::string params_path =
        params_override.empty() ? cfg.out_dir + "/params.bin" : params_override;
    ModelParams params = load_params(params_path);
    Rng rng(cfg.train.seed);
    Rng probe_rng = rng.split("probe");

    ProbeReport report;
    if (cfg.task == Task::node) {
        const NodeDataset data = load_node_dataset(cfg.dataset);
        if (data.graph.node_labels.empty())
            throw SchemaError("probe: dataset has no node labels");
        const Matrix emb = embed(data.graph, params);
        report = linear_probe(emb, data.graph.node_labels, data.split, cfg.probe_l2,
                              cfg.probe_runs, probe_rng);
    } else {
        const std::vector<Graph> graphs = load_tu_dataset(cfg.dataset);
        const Matrix emb = embed(std::span<const Graph>(graphs), params);
        report = kfold_graph_probe(emb, collect_graph_labels(graphs), cfg.kfold_k,
                                   cfg.kfold_runs, cfg.probe_l2, probe_rng);
    }

    json doc;
    doc["task"] = cfg.task == Task::node ? "node" : "graph";
    doc["accuracy_mean"] = report.accuracy_mean;
    doc["accuracy_std"] = report.accuracy_std;
    doc["accuracies"] = report.accuracies;
    doc["runs"] = report.runs;
    doc["folds"] = report.folds;
    doc["resolved_config"] = resolved_config_json(cfg);
    fs::create_directories(cfg.out_dir);
    std::ofstream out(cfg.out_dir + "/report.json");
    if (!out) throw SchemaError("cannot write " + cfg.out_dir + "/report.json");
    out << doc.dump(2) << '\n';
    std::cout << "probe: accuracy " << report.accuracy_mean << " +/- " << report.accuracy_std
              << " over " << report.accuracies.size() << " evaluations\n";
    return 0;
}

int cmd_metrics(const ConfigArgs& args) {
    const RunConfig cfg = resolve_config(args);
    if (cfg.dataset.empty()) throw SchemaError("metrics: config needs a dataset path");

    std::vector<std::pair<int, std::string>> checkpoints;
    for (const auto& entry : fs::directory_iterator(cfg.out_dir)) {
        const std::string name = entry.path().filename().string();
        int epoch = 0;
        if (std::sscanf(name.c_str(), "checkpoint_%d.bin", &epoch) == 1)
            checkpoints.emplace_back(epoch, entry.path().string());
    }
    if (checkpoints.empty())
        throw SchemaError("metrics: no checkpoint_*.bin files in " + cfg.out_dir +
                          " (pretrain with train.checkpoint_every > 0)");
    std::sort(checkpoints.begin(), checkpoints.end());

    std::optional<NodeDataset> node_data;
    std::vector<Graph> graphs;
    if (cfg.task == Task::node)
        node_data = load_node_dataset(cfg.dataset);
    else
        graphs = load_tu_dataset(cfg.dataset);

    std::ofstream out(cfg.out_dir + "/metrics.csv");
    if (!out) throw SchemaError("cannot write " + cfg.out_dir + "/metrics.csv");
    out << "epoch,align,uniform\n";
    for (const auto& [epoch, path] : checkpoints) {
        const ModelParams params = load_params(path);
        const auto [align, uniform] =
            cfg.task == Task::node
                ? recompute_metrics(node_data->graph, params, cfg.train, epoch)
                : recompute_metrics(std::span<const Graph>(graphs), params, cfg.train, epoch);
        char align_buf[64], uniform_buf[64];
        std::snprintf(align_buf, sizeof(align_buf), "%.6g", align);
        std::snprintf(uniform_buf, sizeof(uniform_buf), "%.6g", uniform);
        out << epoch << ',' << align_buf << ',' << uniform_buf << '\n';
    }
    std::cout << "metrics: " << checkpoints.size() << " checkpoints -> " << cfg.out_dir
              << "/metrics.csv\n";
    return 0;
}

int cmd_gradcheck(std::uint64_t seed, double eps) {
    const double err = reference_gradient_check(seed, eps);
    std::cout << "gradcheck: max relative error " << err << " (seed " << seed << ", eps " << eps
              << ")\n";
    if (!(err < 1e-4)) {
        std::cerr << "gradcheck: error " << err << " exceeds 1e-4\n";
        return 3;
    }
    return 0;
}

int cmd_gen_synthetic(const std::string& blocks_csv, double p_in, double p_out,
                      std::uint64_t seed, const std::string& out_dir,
                      const std::string& feature_mode, double train_frac) {
    std::vector<int> blocks;
    {
        std::stringstream ss(blocks_csv);
        std::string part;
        while (std::getline(ss, part, ',')) {
            try {
                blocks.push_back(std::stoi(part));
            } catch (const std::exception&) {
                throw SchemaError("gen-synthetic: bad block size \"" + part + "\"");
            }
        }
    }
    FeatureMode mode;
    if (feature_mode == "onehot")
        mode = FeatureMode::onehot_block_noisy;
    else if (feature_mode == "random")
        mode = FeatureMode::random;
    else
        throw SchemaError("gen-synthetic: unknown feature mode \"" + feature_mode + "\"");
    if (train_frac <= 0.0 || train_frac >= 1.0)
        throw SchemaError("gen-synthetic: train fraction must lie in (0,1)");

    Rng rng(seed);
    const Graph g = sbm_generate(blocks, p_in, p_out, mode, rng);

    // Stratified split: shuffle within each block, take the head as train.
    SplitIdx split;
    Rng split_rng = rng.split("split");
    const int k = static_cast<int>(blocks.size());
    for (int b = 0; b < k; ++b) {
        std::vector<int> members;
        for (int i = 0; i < g.n; ++i)
            if (g.node_labels[i] == b) members.push_back(i);
        const auto perm = split_rng.permutation(members.size());
        const std::size_t n_train = std::max<std::size_t>(
            1, static_cast<std::size_t>(train_frac * static_cast<double>(members.size()) + 0.5));
        for (std::size_t p = 0; p < members.size(); ++p) {
            if (p < n_train)
                split.train.push_back(members[perm[p]]);
            else
                split.test.push_back(members[perm[p]]);
        }
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());

    write_node_dataset(out_dir, g, split);
    std::cout << "gen-synthetic: " << g.n << " nodes, " << g.edges.size() << " edges -> "
              << out_dir << "\n";
    return 0;
}

} // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"Self-supervised graph representation learning with identity-mixup "
                 "contrastive pretraining"};
    app.require_subcommand(1);

    ConfigArgs pretrain_args, probe_args, metrics_args;
    std::string probe_params;

    CLI::App* pretrain_cmd =
        app.add_subcommand("pretrain", "Pretrain an encoder; writes params.bin and trace.csv");
    add_config_options(pretrain_cmd, pretrain_args);

    CLI::App* probe_cmd =
        app.add_subcommand("probe", "Linear-probe frozen embeddings; writes report.json");
    add_config_options(probe_cmd, probe_args);
    probe_cmd->add_option("--params", probe_params, "Parameter file (default out_dir/params.bin)");

    CLI::App* metrics_cmd = app.add_subcommand(
        "metrics", "Recompute alignment/uniformity on saved checkpoints; writes metrics.csv");
    add_config_options(metrics_cmd, metrics_args);

    std::uint64_t gc_seed = 7;
    double gc_eps = 1e-5;
    CLI::App* gradcheck_cmd = app.add_subcommand(
        "gradcheck", "Finite-difference check of the full loss gradient on a seeded instance");
    gradcheck_cmd->add_option("--seed", gc_seed, "Instance seed");
    gradcheck_cmd->add_option("--eps", gc_eps, "Central-difference step");

    std::string gs_blocks = "150,150,150", gs_out = "data/synthetic", gs_mode = "onehot";
    double gs_p_in = 0.3, gs_p_out = 0.01, gs_train_frac = 0.1;
    std::uint64_t gs_seed = 1;
    CLI::App* gen_cmd =
        app.add_subcommand("gen-synthetic", "Write a planted-partition node dataset directory");
    gen_cmd->add_option("--blocks", gs_blocks, "Comma-separated block sizes");
    gen_cmd->add_option("--p-in", gs_p_in, "Intra-block edge probability");
    gen_cmd->add_option("--p-out", gs_p_out, "Inter-block edge probability");
    gen_cmd->add_option("--seed", gs_seed, "Generator seed");
    gen_cmd->add_option("--out", gs_out, "Output directory");
    gen_cmd->add_option("--feature-mode", gs_mode, "onehot | random");
    gen_cmd->add_option("--train-frac", gs_train_frac, "Train fraction of the split");

    std::vector<std::string> argv(args);
    try {
        std::vector<const char*> raw;
        raw.push_back("gcl");
        for (const std::string& a : argv) raw.push_back(a.c_str());
        app.parse(static_cast<int>(raw.size()), raw.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (pretrain_cmd->parsed()) return cmd_pretrain(pretrain_args);
        if (probe_cmd->parsed()) return cmd_probe(probe_args, probe_params);
        if (metrics_cmd->parsed()) return cmd_metrics(metrics_args);
        if (gradcheck_cmd->parsed()) return cmd_gradcheck(gc_seed, gc_eps);
        if (gen_cmd->parsed())
            return cmd_gen_synthetic(gs_blocks, gs_p_in, gs_p_out, gs_seed, gs_out, gs_mode,
                                     gs_train_frac);
    } catch (const SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DimensionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 1;
}

} // namespace gcl
