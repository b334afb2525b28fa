#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "gcl/pipeline.hpp"

namespace gcl {

// Fully resolved run configuration: every field has a documented default, so
// an empty document is a valid config. Unknown keys are rejected and the
// resolved document is echoed alongside every artifact for reproducibility.
struct RunConfig {
    Task task = Task::node;
    std::string dataset;
    std::string out_dir = "out";
    TrainConfig train;
    double probe_l2 = 1e-4;
    int probe_runs = 20;
    int kfold_k = 10;
    int kfold_runs = 5;
    bool trace_wall_time = false;
};

RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::string& path);

// Applies a dotted-path override, e.g. "train.epochs=100" or "mixup.strategy=cut".
void apply_override(nlohmann::json& doc, const std::string& key_value);

nlohmann::json resolved_config_json(const RunConfig& cfg);

} // namespace gcl
