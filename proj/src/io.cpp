#include "gcl/io.hpp"

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;

namespace gcl {

namespace {

using nlohmann::json;

[[noreturn]] void fail_at(const std::string& file, std::size_t line, const std::string& what) {
    throw SchemaError(file + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

long parse_int(const std::string& token, const std::string& file, std::size_t line) {
    std::size_t used = 0;
    long value = 0;
    try {
        value = std::stol(token, &used);
    } catch (const std::exception&) {
        fail_at(file, line, "expected an integer, got \"" + token + "\"");
    }
    if (used != token.size()) fail_at(file, line, "trailing characters in \"" + token + "\"");
    return value;
}

double parse_double(const std::string& token, const std::string& file, std::size_t line) {
    std::size_t used = 0;
    double value = 0;
    try {
        value = std::stod(token, &used);
    } catch (const std::exception&) {
        fail_at(file, line, "expected a number, got \"" + token + "\"");
    }
    if (used != token.size()) fail_at(file, line, "trailing characters in \"" + token + "\"");
    return value;
}

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::vector<std::string> split_on(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, sep)) parts.push_back(part);
    if (!s.empty() && s.back() == sep) parts.push_back("");
    return parts;
}

std::string format_sig6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

void write_u64(std::ofstream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint64_t read_u64(std::ifstream& in, const std::string& path) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw SchemaError(path + ": truncated parameter file");
    return v;
}

void write_matrix(std::ofstream& out, const Matrix& m) {
    write_u64(out, m.rows());
    write_u64(out, m.cols());
    out.write(reinterpret_cast<const char*>(m.data()),
              static_cast<std::streamsize>(m.size() * sizeof(double)));
}

Matrix read_matrix(std::ifstream& in, const std::string& path) {
    const std::uint64_t rows = read_u64(in, path);
    const std::uint64_t cols = read_u64(in, path);
    if (rows > (1u << 24) || cols > (1u << 24))
        throw SchemaError(path + ": implausible matrix shape in parameter file");
    Matrix m(rows, cols);
    in.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(m.size() * sizeof(double)));
    if (!in) throw SchemaError(path + ": truncated parameter file");
    return m;
}

constexpr char kParamsMagic[8] = {'G', 'C', 'L', 'P', 'R', 'M', 'S', '1'};

} // namespace

NodeDataset load_node_dataset(const std::string& dir) {
    const std::string edges_path = dir + "/edges.tsv";
    const std::string features_path = dir + "/features.csv";
    const std::string labels_path = dir + "/labels.csv";
    const std::string split_path = dir + "/split.json";

    // Features first: they define the node count.
    const auto feature_lines = read_lines(features_path);
    const std::size_t n = feature_lines.size();
    if (n == 0) throw SchemaError(features_path + ": no rows");
    std::size_t d = 0;
    Matrix features;
    for (std::size_t i = 0; i < n; ++i) {
        const auto cells = split_on(feature_lines[i], ',');
        if (i == 0) {
            d = cells.size();
            if (d == 0) fail_at(features_path, 1, "empty feature row");
            features = Matrix(n, d);
        } else if (cells.size() != d) {
            fail_at(features_path, i + 1,
                    "expected " + std::to_string(d) + " columns, got " +
                        std::to_string(cells.size()));
        }
        for (std::size_t j = 0; j < d; ++j)
            features(i, j) = parse_double(trim(cells[j]), features_path, i + 1);
    }

    const auto label_lines = read_lines(labels_path);
    if (label_lines.size() != n)
        throw SchemaError(labels_path + ": " + std::to_string(label_lines.size()) +
                          " labels for " + std::to_string(n) + " feature rows");
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i)
        labels[i] = static_cast<int>(parse_int(trim(label_lines[i]), labels_path, i + 1));

    const auto edge_lines = read_lines(edges_path);
    std::vector<std::pair<int, int>> edges;
    edges.reserve(edge_lines.size());
    for (std::size_t i = 0; i < edge_lines.size(); ++i) {
        const auto parts = split_on(edge_lines[i], '\t');
        if (parts.size() != 2) fail_at(edges_path, i + 1, "expected \"u<TAB>v\"");
        const long u = parse_int(trim(parts[0]), edges_path, i + 1);
        const long v = parse_int(trim(parts[1]), edges_path, i + 1);
        if (u < 0 || v < 0 || u >= static_cast<long>(n) || v >= static_cast<long>(n))
            fail_at(edges_path, i + 1,
                    "edge endpoint out of range [0," + std::to_string(n) + ")");
        if (u == v) fail_at(edges_path, i + 1, "self-loop");
        edges.emplace_back(static_cast<int>(u), static_cast<int>(v));
    }

    std::ifstream split_in(split_path);
    if (!split_in) throw SchemaError("cannot open " + split_path);
    json split_doc;
    try {
        split_in >> split_doc;
    } catch (const json::exception& e) {
        throw SchemaError(split_path + ": " + e.what());
    }
    for (const auto& [key, value] : split_doc.items())
        if (key != "train" && key != "test" && key != "val")
            throw SchemaError(split_path + ": unknown key \"" + key + "\"");
    if (!split_doc.contains("train") || !split_doc.contains("test"))
        throw SchemaError(split_path + ": needs \"train\" and \"test\" index lists");
    SplitIdx split;
    const auto read_idx = [&](const char* key) {
        std::vector<int> idx;
        for (const auto& v : split_doc.at(key)) {
            if (!v.is_number_integer())
                throw SchemaError(split_path + ": non-integer index in \"" + std::string(key) +
                                  "\"");
            const long i = v.get<long>();
            if (i < 0 || i >= static_cast<long>(n))
                throw SchemaError(split_path + ": index " + std::to_string(i) +
                                  " out of range [0," + std::to_string(n) + ")");
            idx.push_back(static_cast<int>(i));
        }
        return idx;
    };
    split.train = read_idx("train");
    split.test = read_idx("test");

    NodeDataset out;
    out.graph = make_graph(static_cast<int>(n), std::move(features), std::move(edges),
                           std::move(labels));
    out.split = std::move(split);
    return out;
}

void write_node_dataset(const std::string& dir, const Graph& g, const SplitIdx& split) {
    fs::create_directories(dir);
    {
        std::ofstream out(dir + "/edges.tsv");
        if (!out) throw SchemaError("cannot write " + dir + "/edges.tsv");
        for (const auto& [u, v] : g.edges) out << u << '\t' << v << '\n';
    }
    {
        std::ofstream out(dir + "/features.csv");
        if (!out) throw SchemaError("cannot write " + dir + "/features.csv");
        out.precision(17);
        for (int i = 0; i < g.n; ++i) {
            for (std::size_t j = 0; j < g.features.cols(); ++j) {
                if (j) out << ',';
                out << g.features(i, j);
            }
            out << '\n';
        }
    }
    {
        std::ofstream out(dir + "/labels.csv");
        if (!out) throw SchemaError("cannot write " + dir + "/labels.csv");
        for (int i = 0; i < g.n; ++i)
            out << (g.node_labels.empty() ? 0 : g.node_labels[i]) << '\n';
    }
    {
        json doc;
        doc["train"] = split.train;
        doc["test"] = split.test;
        std::ofstream out(dir + "/split.json");
        if (!out) throw SchemaError("cannot write " + dir + "/split.json");
        out << doc.dump(2) << '\n';
    }
}

std::vector<Graph> load_tu_dataset(const std::string& dir) {
    // Locate the DS prefix from the *_A.txt file.
    std::string prefix;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.size() > 6 && name.ends_with("_A.txt")) {
            if (!prefix.empty())
                throw SchemaError(dir + ": multiple *_A.txt files, dataset prefix is ambiguous");
            prefix = name.substr(0, name.size() - 6);
        }
    }
    if (prefix.empty()) throw SchemaError(dir + ": no *_A.txt file, not a TU dataset directory");
    const std::string base = dir + "/" + prefix;

    const std::string indicator_path = base + "_graph_indicator.txt";
    const auto indicator_lines = read_lines(indicator_path);
    const std::size_t n = indicator_lines.size();
    if (n == 0) throw SchemaError(indicator_path + ": empty");
    std::vector<int> graph_of(n);
    int graph_count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const long gid = parse_int(trim(indicator_lines[i]), indicator_path, i + 1);
        if (gid < 1) fail_at(indicator_path, i + 1, "graph ids are 1-based, got " +
                                                         std::to_string(gid));
        graph_of[i] = static_cast<int>(gid - 1);
        graph_count = std::max(graph_count, static_cast<int>(gid));
    }

    const std::string labels_path = base + "_graph_labels.txt";
    const auto label_lines = read_lines(labels_path);
    if (label_lines.size() != static_cast<std::size_t>(graph_count))
        throw SchemaError(labels_path + ": " + std::to_string(label_lines.size()) +
                          " labels for " + std::to_string(graph_count) + " graphs");
    std::vector<int> graph_labels(graph_count);
    for (std::size_t i = 0; i < label_lines.size(); ++i)
        graph_labels[i] = static_cast<int>(parse_int(trim(label_lines[i]), labels_path, i + 1));

    // Node attributes beat node labels beat the constant-1 fallback.
    Matrix features;
    const std::string attr_path = base + "_node_attributes.txt";
    const std::string nlabel_path = base + "_node_labels.txt";
    if (fs::exists(attr_path)) {
        const auto attr_lines = read_lines(attr_path);
        if (attr_lines.size() != n)
            throw SchemaError(attr_path + ": " + std::to_string(attr_lines.size()) +
                              " rows for " + std::to_string(n) + " nodes");
        std::size_t d = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto cells = split_on(attr_lines[i], ',');
            if (i == 0) {
                d = cells.size();
                if (d == 0) fail_at(attr_path, 1, "empty attribute row");
                features = Matrix(n, d);
            } else if (cells.size() != d) {
                fail_at(attr_path, i + 1, "ragged attribute rows");
            }
            for (std::size_t j = 0; j < d; ++j)
                features(i, j) = parse_double(trim(cells[j]), attr_path, i + 1);
        }
    } else if (fs::exists(nlabel_path)) {
        const auto nlabel_lines = read_lines(nlabel_path);
        if (nlabel_lines.size() != n)
            throw SchemaError(nlabel_path + ": " + std::to_string(nlabel_lines.size()) +
                              " rows for " + std::to_string(n) + " nodes");
        std::vector<int> raw(n);
        std::set<int> distinct;
        for (std::size_t i = 0; i < n; ++i) {
            raw[i] = static_cast<int>(parse_int(trim(nlabel_lines[i]), nlabel_path, i + 1));
            distinct.insert(raw[i]);
        }
        std::map<int, std::size_t> column;
        std::size_t next = 0;
        for (const int v : distinct) column[v] = next++;
        features = Matrix(n, distinct.size());
        for (std::size_t i = 0; i < n; ++i) features(i, column[raw[i]]) = 1.0;
    } else {
        features = Matrix(n, 1, 1.0);
    }

    const std::string edges_path = base + "_A.txt";
    const auto edge_lines = read_lines(edges_path);
    std::vector<std::vector<std::pair<int, int>>> edges_per_graph(graph_count);
    for (std::size_t i = 0; i < edge_lines.size(); ++i) {
        const auto parts = split_on(edge_lines[i], ',');
        if (parts.size() != 2) fail_at(edges_path, i + 1, "expected \"u, v\"");
        const long u1 = parse_int(trim(parts[0]), edges_path, i + 1);
        const long v1 = parse_int(trim(parts[1]), edges_path, i + 1);
        if (u1 < 1 || v1 < 1)
            fail_at(edges_path, i + 1, "node ids are 1-based, got (" + std::to_string(u1) + "," +
                                           std::to_string(v1) + ")");
        if (u1 > static_cast<long>(n) || v1 > static_cast<long>(n))
            fail_at(edges_path, i + 1, "node id beyond " + std::to_string(n));
        const int u = static_cast<int>(u1 - 1);
        const int v = static_cast<int>(v1 - 1);
        if (graph_of[u] != graph_of[v])
            fail_at(edges_path, i + 1,
                    "edge crosses graphs " + std::to_string(graph_of[u] + 1) + " and " +
                        std::to_string(graph_of[v] + 1));
        if (u == v) fail_at(edges_path, i + 1, "self-loop at node " + std::to_string(u1));
        edges_per_graph[graph_of[u]].emplace_back(u, v);
    }

    // Node index ranges per graph (TU nodes of one graph are consecutive).
    std::vector<int> first_node(graph_count, -1), node_count(graph_count, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const int g = graph_of[i];
        if (first_node[g] == -1) first_node[g] = static_cast<int>(i);
        ++node_count[g];
        if (static_cast<int>(i) != first_node[g] + node_count[g] - 1)
            fail_at(indicator_path, i + 1, "nodes of one graph must be consecutive");
    }

    std::vector<Graph> graphs;
    graphs.reserve(graph_count);
    for (int g = 0; g < graph_count; ++g) {
        if (node_count[g] == 0)
            throw SchemaError(indicator_path + ": graph " + std::to_string(g + 1) +
                              " has no nodes");
        Matrix local(node_count[g], features.cols());
        for (int i = 0; i < node_count[g]; ++i)
            for (std::size_t j = 0; j < features.cols(); ++j)
                local(i, j) = features(first_node[g] + i, j);
        std::vector<std::pair<int, int>> local_edges;
        local_edges.reserve(edges_per_graph[g].size());
        for (const auto& [u, v] : edges_per_graph[g])
            local_edges.emplace_back(u - first_node[g], v - first_node[g]);
        graphs.push_back(make_graph(node_count[g], std::move(local), std::move(local_edges), {},
                                    graph_labels[g]));
    }
    return graphs;
}

void write_trace(const TrainTrace& trace, const std::string& path, bool include_wall_time) {
    if (trace.epochs.empty()) throw StateError("write_trace: empty trace");
    std::ofstream out(path);
    if (!out) throw SchemaError("cannot write " + path);
    out << "epoch,loss,align,uniform,seconds\n";
    for (const EpochRecord& r : trace.epochs) {
        out << r.epoch << ',' << format_sig6(r.loss) << ',' << format_sig6(r.align) << ','
            << format_sig6(r.uniform) << ','
            << format_sig6(include_wall_time ? r.seconds : 0.0) << '\n';
    }
}

void save_params(const ModelParams& params, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SchemaError("cannot write " + path);
    out.write(kParamsMagic, sizeof(kParamsMagic));
    write_u64(out, static_cast<std::uint64_t>(params.encoder.activation));
    write_u64(out, params.encoder.activate_final ? 1 : 0);
    write_u64(out, static_cast<std::uint64_t>(params.projection.activation));
    write_u64(out, params.encoder.weights.size());
    for (const ParamTensor& w : params.encoder.weights) write_matrix(out, w.value);
    write_matrix(out, params.projection.w1.value);
    write_matrix(out, params.projection.w2.value);
}

ModelParams load_params(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot open " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kParamsMagic, sizeof(magic)) != 0)
        throw SchemaError(path + ": not a parameter file");
    ModelParams params;
    params.encoder.activation = static_cast<Activation>(read_u64(in, path));
    params.encoder.activate_final = read_u64(in, path) != 0;
    params.projection.activation = static_cast<Activation>(read_u64(in, path));
    const std::uint64_t layers = read_u64(in, path);
    if (layers == 0 || layers > 64) throw SchemaError(path + ": implausible layer count");
    for (std::uint64_t l = 0; l < layers; ++l)
        params.encoder.weights.emplace_back(read_matrix(in, path), "enc.W" + std::to_string(l));
    params.projection.w1 = ParamTensor(read_matrix(in, path), "proj.W1");
    params.projection.w2 = ParamTensor(read_matrix(in, path), "proj.W2");
    return params;
}

} // namespace gcl
