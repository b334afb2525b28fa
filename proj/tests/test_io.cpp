#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <unistd.h>

#include <json.hpp>

#include "gcl/cli.hpp"
#include "gcl/config.hpp"
#include "gcl/io.hpp"

using namespace gcl;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("gcl_test_" + tag + "_" +
                                            std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str() const { return path.string(); }
};

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p);
    out << content;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_toy_node_dataset(const fs::path& dir) {
    write_file(dir / "edges.tsv", "0\t1\n1\t2\n");
    write_file(dir / "features.csv", "1.0,0.5\n0.25,1.0\n0.0,2.0\n");
    write_file(dir / "labels.csv", "0\n1\n0\n");
    write_file(dir / "split.json", R"({"train": [0, 1], "test": [2]})");
}

void write_toy_tu_dataset(const fs::path& dir) {
    // Two graphs: a triangle and a single edge, edges listed in both directions.
    write_file(dir / "TOY_A.txt", "1, 2\n2, 1\n2, 3\n3, 2\n1, 3\n3, 1\n4, 5\n5, 4\n");
    write_file(dir / "TOY_graph_indicator.txt", "1\n1\n1\n2\n2\n");
    write_file(dir / "TOY_graph_labels.txt", "1\n-1\n");
}

} // namespace

TEST_CASE("a toy node dataset loads with the expected shape") {
    TempDir dir("node");
    write_toy_node_dataset(dir.path);
    const NodeDataset data = load_node_dataset(dir.str());
    CHECK(data.graph.n == 3);
    CHECK(data.graph.edges.size() == 2);
    CHECK(data.graph.feature_dim() == 2);
    CHECK(data.graph.node_labels == std::vector<int>{0, 1, 0});
    CHECK(data.split.train == std::vector<int>{0, 1});
    CHECK(data.split.test == std::vector<int>{2});
}

TEST_CASE("node loader failures carry file and line") {
    TempDir dir("node_bad");
    write_toy_node_dataset(dir.path);
    write_file(dir.path / "edges.tsv", "0\t1\n1\t99\n");
    CHECK_THROWS_WITH_AS(load_node_dataset(dir.str()), doctest::Contains("edges.tsv:2"),
                         SchemaError);

    write_toy_node_dataset(dir.path);
    write_file(dir.path / "labels.csv", "0\n1\n");
    CHECK_THROWS_WITH_AS(load_node_dataset(dir.str()), doctest::Contains("labels.csv"),
                         SchemaError);

    write_toy_node_dataset(dir.path);
    write_file(dir.path / "features.csv", "1.0,0.5\n0.25,abc\n0.0,2.0\n");
    CHECK_THROWS_WITH_AS(load_node_dataset(dir.str()), doctest::Contains("features.csv:2"),
                         SchemaError);

    write_toy_node_dataset(dir.path);
    write_file(dir.path / "split.json", R"({"train": [0], "test": [2], "extra": []})");
    CHECK_THROWS_WITH_AS(load_node_dataset(dir.str()), doctest::Contains("extra"), SchemaError);
}

TEST_CASE("node datasets round-trip exactly through write and load") {
    TempDir dir("roundtrip");
    Rng rng(3);
    Matrix x(5, 3);
    for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
    const Graph g = make_graph(5, x, {{0, 1}, {1, 4}, {2, 3}}, {0, 1, 0, 1, 2});
    SplitIdx split;
    split.train = {0, 2, 4};
    split.test = {1, 3};
    write_node_dataset(dir.str(), g, split);
    const NodeDataset loaded = load_node_dataset(dir.str());
    CHECK(loaded.graph.edges == g.edges);
    CHECK(loaded.graph.features == g.features);
    CHECK(loaded.graph.node_labels == g.node_labels);
    CHECK(loaded.split.train == split.train);
    CHECK(loaded.split.test == split.test);
}

TEST_CASE("the TU loader partitions the toy fixture into two graphs") {
    TempDir dir("tu");
    write_toy_tu_dataset(dir.path);
    const std::vector<Graph> graphs = load_tu_dataset(dir.str());
    REQUIRE(graphs.size() == 2);
    CHECK(graphs[0].n == 3);
    CHECK(graphs[0].edges.size() == 3);
    CHECK(graphs[1].n == 2);
    CHECK(graphs[1].edges.size() == 1);
    CHECK(graphs[0].graph_label == 1);
    CHECK(graphs[1].graph_label == -1);
    // No attributes, no node labels: constant-1 feature of width 1.
    CHECK(graphs[0].feature_dim() == 1);
    CHECK(graphs[0].features(0, 0) == 1.0);
}

TEST_CASE("TU loader rejects 0-based ids and cross-graph edges") {
    TempDir dir("tu_bad");
    write_toy_tu_dataset(dir.path);
    write_file(dir.path / "TOY_A.txt", "0, 1\n");
    CHECK_THROWS_WITH_AS(load_tu_dataset(dir.str()), doctest::Contains("TOY_A.txt:1"),
                         SchemaError);

    write_toy_tu_dataset(dir.path);
    write_file(dir.path / "TOY_A.txt", "1, 2\n2, 1\n3, 4\n4, 3\n");
    CHECK_THROWS_WITH_AS(load_tu_dataset(dir.str()), doctest::Contains("crosses"), SchemaError);
}

TEST_CASE("TU node labels become one-hot features; attributes win over labels") {
    TempDir dir("tu_feat");
    write_toy_tu_dataset(dir.path);
    write_file(dir.path / "TOY_node_labels.txt", "7\n9\n7\n9\n7\n");
    {
        const std::vector<Graph> graphs = load_tu_dataset(dir.str());
        CHECK(graphs[0].feature_dim() == 2);
        CHECK(graphs[0].features(0, 0) == 1.0);  // label 7 -> column 0
        CHECK(graphs[0].features(1, 1) == 1.0);  // label 9 -> column 1
        CHECK(graphs[0].features(1, 0) == 0.0);
    }
    write_file(dir.path / "TOY_node_attributes.txt",
               "0.5, 1.5\n1.0, 2.0\n0.0, 0.0\n3.0, 4.0\n5.0, 6.0\n");
    {
        const std::vector<Graph> graphs = load_tu_dataset(dir.str());
        CHECK(graphs[0].feature_dim() == 2);
        CHECK(graphs[0].features(0, 1) == 1.5);
        CHECK(graphs[1].features(1, 0) == 5.0);
    }
}

TEST_CASE("traces serialize deterministically with six significant digits") {
    TempDir dir("trace");
    TrainTrace trace;
    trace.epochs.push_back({1, 1.23456789, 0.111111111, -3.999999999, 0.123456});
    const std::string path = (dir.path / "trace.csv").string();
    write_trace(trace, path, false);
    const std::string content = read_file(path);
    CHECK(content == "epoch,loss,align,uniform,seconds\n1,1.23457,0.111111,-4,0\n");
    write_trace(trace, path, false);
    CHECK(read_file(path) == content);

    write_trace(trace, path, true);
    CHECK(read_file(path) ==
          "epoch,loss,align,uniform,seconds\n1,1.23457,0.111111,-4,0.123456\n");

    TrainTrace empty;
    CHECK_THROWS_AS(write_trace(empty, path, false), StateError);
}

TEST_CASE("model parameters round-trip bit-exactly through the binary format") {
    TempDir dir("params");
    Rng rng(5);
    ModelParams params;
    params.encoder = EncoderParams::glorot({4, 8, 6}, Activation::leaky_relu, false, rng);
    params.projection = ProjectionParams::glorot(6, 8, 5, Activation::leaky_relu, rng);
    const std::string path = (dir.path / "params.bin").string();
    save_params(params, path);
    ModelParams loaded = load_params(path);
    CHECK(loaded.encoder.activation == Activation::leaky_relu);
    CHECK(loaded.encoder.activate_final == false);
    REQUIRE(loaded.encoder.weights.size() == 2);
    CHECK(loaded.encoder.weights[0].value == params.encoder.weights[0].value);
    CHECK(loaded.encoder.weights[1].value == params.encoder.weights[1].value);
    CHECK(loaded.projection.w1.value == params.projection.w1.value);
    CHECK(loaded.projection.w2.value == params.projection.w2.value);

    write_file(dir.path / "junk.bin", "not a parameter file at all");
    CHECK_THROWS_AS(load_params((dir.path / "junk.bin").string()), SchemaError);
}

TEST_CASE("config parsing: defaults, strict keys, dotted overrides") {
    const RunConfig defaults = parse_run_config(json::object());
    CHECK(defaults.train.epochs == 200);
    CHECK(defaults.train.lr == 5e-4);
    CHECK(defaults.train.weight_decay == 1e-5);
    CHECK(defaults.train.loss.tau == 0.2);
    CHECK(defaults.train.aug_a.p_edge == 0.2);
    CHECK(defaults.train.aug_a.p_feat == 0.3);
    CHECK(defaults.probe_runs == 20);
    CHECK(defaults.kfold_k == 10);

    CHECK_THROWS_WITH_AS(parse_run_config({{"tasks", "node"}}), doctest::Contains("tasks"),
                         SchemaError);
    CHECK_THROWS_WITH_AS(parse_run_config({{"train", {{"epoks", 3}}}}),
                         doctest::Contains("train.epoks"), SchemaError);

    json doc = json::object();
    apply_override(doc, "train.epochs=42");
    apply_override(doc, "mixup.strategy=cut");
    apply_override(doc, "loss.tau=0.4");
    apply_override(doc, "train.view_mode=single");
    const RunConfig cfg = parse_run_config(doc);
    CHECK(cfg.train.epochs == 42);
    CHECK(cfg.train.mixup.strategy == MixStrategy::cut);
    CHECK(cfg.train.loss.tau == 0.4);
    CHECK(cfg.train.view_mode == ViewMode::single);

    CHECK_THROWS_AS(apply_override(doc, "no_equals_sign"), SchemaError);
    CHECK_THROWS_AS(parse_run_config({{"task", "nodes"}}), SchemaError);
    CHECK_THROWS_AS(parse_run_config({{"mixup", {{"strategy", "swap"}}}}), SchemaError);

    // The resolved echo parses back to the same configuration.
    const json echoed = resolved_config_json(cfg);
    const RunConfig reparsed = parse_run_config(echoed);
    CHECK(resolved_config_json(reparsed) == echoed);
}

TEST_CASE("the CLI wires subcommands to exit codes") {
    CHECK(run_cli({"frobnicate"}) == 1);
    CHECK(run_cli({}) == 1);
    CHECK(run_cli({"gradcheck", "--seed", "7"}) == 0);

    TempDir dir("cli");
    const std::string data_dir = (dir.path / "data").string();
    const std::string out_dir = (dir.path / "out").string();
    CHECK(run_cli({"gen-synthetic", "--blocks", "20,20", "--p-in", "0.4", "--p-out", "0.02",
                   "--seed", "3", "--out", data_dir}) == 0);
    CHECK(fs::exists(fs::path(data_dir) / "edges.tsv"));
    CHECK(fs::exists(fs::path(data_dir) / "split.json"));

    const std::string cfg_path = (dir.path / "run.json").string();
    write_file(cfg_path, json{{"task", "node"},
                              {"dataset", data_dir},
                              {"out_dir", out_dir},
                              {"seed", 5},
                              {"train", {{"epochs", 4}, {"checkpoint_every", 2}}},
                              {"encoder", {{"hidden", 16}, {"out", 16}}},
                              {"projection", {{"hidden", 16}, {"out", 16}}},
                              {"probe", {{"runs", 3}}}}
                             .dump());
    CHECK(run_cli({"pretrain", "--config", cfg_path}) == 0);
    CHECK(fs::exists(fs::path(out_dir) / "params.bin"));
    CHECK(fs::exists(fs::path(out_dir) / "trace.csv"));
    CHECK(fs::exists(fs::path(out_dir) / "resolved_config.json"));

    CHECK(run_cli({"probe", "--config", cfg_path}) == 0);
    const json report = json::parse(read_file(fs::path(out_dir) / "report.json"));
    CHECK(report.contains("accuracy_mean"));
    CHECK(report["task"] == "node");
    CHECK(report["runs"] == 3);
    CHECK(report.contains("resolved_config"));

    CHECK(run_cli({"metrics", "--config", cfg_path}) == 0);
    const std::string metrics = read_file(fs::path(out_dir) / "metrics.csv");
    CHECK(metrics.starts_with("epoch,align,uniform\n"));

    // Schema failures exit 2: dataset directory without files.
    const std::string empty_dir = (dir.path / "empty").string();
    fs::create_directories(empty_dir);
    CHECK(run_cli({"pretrain", "--config", cfg_path, "--set",
                   std::string("dataset=") + empty_dir}) == 2);
    // Config typos exit 2 as well.
    CHECK(run_cli({"pretrain", "--config", cfg_path, "--set", "train.epoks=3"}) == 2);
}
