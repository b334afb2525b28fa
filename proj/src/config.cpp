#include "gcl/config.hpp"

#include <fstream>
#include <set>

namespace gcl {

namespace {

using nlohmann::json;

[[noreturn]] void bad_key(const std::string& section, const std::string& key) {
    throw SchemaError("config: unknown key \"" + (section.empty() ? key : section + "." + key) +
                      "\"");
}

void check_keys(const json& obj, const std::string& section,
                const std::set<std::string>& allowed) {
    if (!obj.is_object()) throw SchemaError("config: section \"" + section + "\" must be an object");
    for (const auto& [key, value] : obj.items())
        if (!allowed.contains(key)) bad_key(section, key);
}

template <typename T>
void read_field(const json& obj, const char* key, T& out) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw SchemaError(std::string("config: key \"") + key + "\" has the wrong type");
    }
}

Activation parse_activation(const std::string& s) {
    if (s == "relu") return Activation::relu;
    if (s == "leaky_relu") return Activation::leaky_relu;
    if (s == "identity") return Activation::identity;
    throw SchemaError("config: unknown activation \"" + s + "\"");
}

std::string activation_name(Activation a) {
    switch (a) {
        case Activation::relu: return "relu";
        case Activation::leaky_relu: return "leaky_relu";
        case Activation::identity: return "identity";
    }
    return "relu";
}

MaskGranularity parse_granularity(const std::string& s) {
    if (s == "per_dimension") return MaskGranularity::per_dimension;
    if (s == "per_entry") return MaskGranularity::per_entry;
    throw SchemaError("config: unknown mask granularity \"" + s + "\"");
}

AugmentConfig parse_augment(const json& obj, const std::string& section) {
    check_keys(obj, section, {"p_edge", "p_feat", "granularity"});
    AugmentConfig cfg{0.2, 0.3, MaskGranularity::per_dimension};
    read_field(obj, "p_edge", cfg.p_edge);
    read_field(obj, "p_feat", cfg.p_feat);
    if (obj.contains("granularity"))
        cfg.granularity = parse_granularity(obj.at("granularity").get<std::string>());
    return cfg;
}

} // namespace

RunConfig parse_run_config(const json& doc) {
    check_keys(doc, "", {"task", "dataset", "out_dir", "seed", "train", "encoder", "projection",
                         "augment_a", "augment_b", "mixup", "loss", "metrics", "probe"});
    RunConfig cfg;

    if (doc.contains("task")) {
        const std::string t = doc.at("task").get<std::string>();
        if (t == "node")
            cfg.task = Task::node;
        else if (t == "graph")
            cfg.task = Task::graph;
        else
            throw SchemaError("config: unknown task \"" + t + "\"");
    }
    read_field(doc, "dataset", cfg.dataset);
    read_field(doc, "out_dir", cfg.out_dir);
    read_field(doc, "seed", cfg.train.seed);

    if (doc.contains("train")) {
        const json& t = doc.at("train");
        check_keys(t, "train",
                   {"epochs", "batch_size", "lr", "weight_decay", "view_mode",
                    "checkpoint_every", "trace_wall_time"});
        read_field(t, "epochs", cfg.train.epochs);
        read_field(t, "batch_size", cfg.train.batch_size);
        read_field(t, "lr", cfg.train.lr);
        read_field(t, "weight_decay", cfg.train.weight_decay);
        read_field(t, "checkpoint_every", cfg.train.checkpoint_every);
        read_field(t, "trace_wall_time", cfg.trace_wall_time);
        if (t.contains("view_mode")) {
            const std::string m = t.at("view_mode").get<std::string>();
            if (m == "multi")
                cfg.train.view_mode = ViewMode::multi;
            else if (m == "single")
                cfg.train.view_mode = ViewMode::single;
            else
                throw SchemaError("config: unknown view_mode \"" + m + "\"");
        }
    }

    if (doc.contains("encoder")) {
        const json& e = doc.at("encoder");
        check_keys(e, "encoder", {"layers", "hidden", "out", "activation", "activate_final"});
        read_field(e, "layers", cfg.train.encoder_layers);
        read_field(e, "hidden", cfg.train.hidden_width);
        read_field(e, "out", cfg.train.embed_width);
        read_field(e, "activate_final", cfg.train.activate_final);
        if (e.contains("activation"))
            cfg.train.activation = parse_activation(e.at("activation").get<std::string>());
    }

    if (doc.contains("projection")) {
        const json& p = doc.at("projection");
        check_keys(p, "projection", {"hidden", "out"});
        read_field(p, "hidden", cfg.train.proj_hidden);
        read_field(p, "out", cfg.train.proj_out);
    }

    if (doc.contains("augment_a")) cfg.train.aug_a = parse_augment(doc.at("augment_a"), "augment_a");
    if (doc.contains("augment_b")) cfg.train.aug_b = parse_augment(doc.at("augment_b"), "augment_b");

    if (doc.contains("mixup")) {
        const json& m = doc.at("mixup");
        check_keys(m, "mixup",
                   {"strategy", "beta_alpha", "beta_beta", "fold_lambda", "fixed_lambda"});
        if (m.contains("strategy")) {
            const std::string s = m.at("strategy").get<std::string>();
            if (s == "random")
                cfg.train.mixup.strategy = MixStrategy::random;
            else if (s == "cut")
                cfg.train.mixup.strategy = MixStrategy::cut;
            else if (s == "local")
                cfg.train.mixup.strategy = MixStrategy::local;
            else
                throw SchemaError("config: unknown mixup strategy \"" + s + "\"");
        }
        read_field(m, "beta_alpha", cfg.train.mixup.beta_alpha);
        read_field(m, "beta_beta", cfg.train.mixup.beta_beta);
        read_field(m, "fold_lambda", cfg.train.mixup.fold_lambda);
        if (m.contains("fixed_lambda") && !m.at("fixed_lambda").is_null())
            cfg.train.mixup.fixed_lambda = m.at("fixed_lambda").get<double>();
    }

    if (doc.contains("loss")) {
        const json& l = doc.at("loss");
        check_keys(l, "loss", {"tau", "similarity", "reduction"});
        read_field(l, "tau", cfg.train.loss.tau);
        if (l.contains("similarity")) {
            const std::string s = l.at("similarity").get<std::string>();
            if (s == "dot")
                cfg.train.loss.similarity = Similarity::dot;
            else if (s == "cosine")
                cfg.train.loss.similarity = Similarity::cosine;
            else
                throw SchemaError("config: unknown similarity \"" + s + "\"");
        }
        if (l.contains("reduction")) {
            const std::string r = l.at("reduction").get<std::string>();
            if (r == "sum")
                cfg.train.loss.reduction = Reduction::sum;
            else if (r == "mean")
                cfg.train.loss.reduction = Reduction::mean;
            else
                throw SchemaError("config: unknown reduction \"" + r + "\"");
        }
    }

    if (doc.contains("metrics")) {
        const json& m = doc.at("metrics");
        check_keys(m, "metrics", {"align_alpha", "uniform_t", "normalize_first"});
        read_field(m, "align_alpha", cfg.train.metrics.align_alpha);
        read_field(m, "uniform_t", cfg.train.metrics.uniform_t);
        read_field(m, "normalize_first", cfg.train.metrics.normalize_first);
    }

    if (doc.contains("probe")) {
        const json& p = doc.at("probe");
        check_keys(p, "probe", {"l2", "runs", "folds", "fold_runs"});
        read_field(p, "l2", cfg.probe_l2);
        read_field(p, "runs", cfg.probe_runs);
        read_field(p, "folds", cfg.kfold_k);
        read_field(p, "fold_runs", cfg.kfold_runs);
    }

    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("config: cannot open " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw SchemaError("config: " + path + ": " + e.what());
    }
    return parse_run_config(doc);
}

void apply_override(nlohmann::json& doc, const std::string& key_value) {
    const auto eq = key_value.find('=');
    if (eq == std::string::npos || eq == 0)
        throw SchemaError("config: override \"" + key_value + "\" is not of the form key=value");
    const std::string path = key_value.substr(0, eq);
    const std::string raw = key_value.substr(eq + 1);

    json value;
    try {
        value = json::parse(raw);
    } catch (const json::exception&) {
        value = raw;  // bare strings need no quoting on the command line
    }

    json* node = &doc;
    std::size_t start = 0;
    for (;;) {
        const auto dot = path.find('.', start);
        const std::string part = path.substr(start, dot - start);
        if (part.empty())
            throw SchemaError("config: override path \"" + path + "\" has an empty segment");
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        node = &(*node)[part];
        start = dot + 1;
    }
}

nlohmann::json resolved_config_json(const RunConfig& cfg) {
    json doc;
    doc["task"] = cfg.task == Task::node ? "node" : "graph";
    doc["dataset"] = cfg.dataset;
    doc["out_dir"] = cfg.out_dir;
    doc["seed"] = cfg.train.seed;
    doc["train"] = {{"epochs", cfg.train.epochs},
                    {"batch_size", cfg.train.batch_size},
                    {"lr", cfg.train.lr},
                    {"weight_decay", cfg.train.weight_decay},
                    {"view_mode", cfg.train.view_mode == ViewMode::multi ? "multi" : "single"},
                    {"checkpoint_every", cfg.train.checkpoint_every},
                    {"trace_wall_time", cfg.trace_wall_time}};
    doc["encoder"] = {{"layers", cfg.train.encoder_layers},
                      {"hidden", cfg.train.hidden_width},
                      {"out", cfg.train.embed_width},
                      {"activation", activation_name(cfg.train.activation)},
                      {"activate_final", cfg.train.activate_final}};
    doc["projection"] = {{"hidden", cfg.train.proj_hidden}, {"out", cfg.train.proj_out}};
    const auto augment_json = [](const AugmentConfig& a) {
        return json{{"p_edge", a.p_edge},
                    {"p_feat", a.p_feat},
                    {"granularity", a.granularity == MaskGranularity::per_dimension
                                        ? "per_dimension"
                                        : "per_entry"}};
    };
    doc["augment_a"] = augment_json(cfg.train.aug_a);
    doc["augment_b"] = augment_json(cfg.train.aug_b);
    const char* strategy = cfg.train.mixup.strategy == MixStrategy::random  ? "random"
                           : cfg.train.mixup.strategy == MixStrategy::cut ? "cut"
                                                                            : "local";
    doc["mixup"] = {{"strategy", strategy},
                    {"beta_alpha", cfg.train.mixup.beta_alpha},
                    {"beta_beta", cfg.train.mixup.beta_beta},
                    {"fold_lambda", cfg.train.mixup.fold_lambda},
                    {"fixed_lambda", cfg.train.mixup.fixed_lambda
                                         ? json(*cfg.train.mixup.fixed_lambda)
                                         : json(nullptr)}};
    doc["loss"] = {{"tau", cfg.train.loss.tau},
                   {"similarity",
                    cfg.train.loss.similarity == Similarity::dot ? "dot" : "cosine"},
                   {"reduction",
                    cfg.train.loss.reduction == Reduction::sum ? "sum" : "mean"}};
    doc["metrics"] = {{"align_alpha", cfg.train.metrics.align_alpha},
                      {"uniform_t", cfg.train.metrics.uniform_t},
                      {"normalize_first", cfg.train.metrics.normalize_first}};
    doc["probe"] = {{"l2", cfg.probe_l2},
                    {"runs", cfg.probe_runs},
                    {"folds", cfg.kfold_k},
                    {"fold_runs", cfg.kfold_runs}};
    return doc;
}

} // namespace gcl
