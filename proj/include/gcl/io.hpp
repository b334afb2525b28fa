#pragma once

#include <string>
#include <vector>

#include "gcl/graph.hpp"
#include "gcl/pipeline.hpp"

namespace gcl {

struct NodeDataset {
    Graph graph;  // node_labels filled
    SplitIdx split;
};

// Flat node-task layout: edges.tsv ("u<TAB>v", 0-based), features.csv,
// labels.csv, split.json. Every malformed file yields a SchemaError naming
// file and line.
NodeDataset load_node_dataset(const std::string& dir);
void write_node_dataset(const std::string& dir, const Graph& g, const SplitIdx& split);

// TU collection layout: DS_A.txt (1-based "u, v"), DS_graph_indicator.txt,
// DS_graph_labels.txt, optional DS_node_labels.txt / DS_node_attributes.txt.
// Features fall back to one-hot node labels, then to a constant-1 column.
std::vector<Graph> load_tu_dataset(const std::string& dir);

// CSV trace: header epoch,loss,align,uniform,seconds; floats printed with 6
// significant digits. The seconds column is zeroed unless include_wall_time,
// keeping the default byte output reproducible across reruns.
void write_trace(const TrainTrace& trace, const std::string& path, bool include_wall_time);

void save_params(const ModelParams& params, const std::string& path);
ModelParams load_params(const std::string& path);

} // namespace gcl
