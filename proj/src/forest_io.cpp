#include <fstream>
#include <sstream>

#include "dronelight/error.hpp"
#include "dronelight/forest.hpp"
#include "json.hpp"

namespace dronelight {

namespace {

using nlohmann::json;

json tree_to_json(const DecisionTree& tree) {
  json nodes = json::array();
  for (const auto& node : tree.nodes()) {
    if (node.is_leaf()) {
      nodes.push_back({{"counts", node.counts}});
    } else {
      nodes.push_back(
          {{"feature", node.feature}, {"threshold", node.threshold}, {"counts", node.counts}});
    }
  }
  return nodes;
}

// Pre-order list without explicit child links: a split is followed by its
// left subtree, then its right subtree.
std::size_t link_subtree(std::vector<TreeNode>& nodes, std::size_t i) {
  if (i >= nodes.size()) throw Error(ErrorCode::kFormat, "model: truncated tree");
  if (nodes[i].is_leaf()) return i + 1;
  const std::size_t right = link_subtree(nodes, i + 1);
  nodes[i].right = static_cast<std::uint32_t>(right);
  return link_subtree(nodes, right);
}

DecisionTree tree_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::kFormat, "model: tree is not an array");
  std::vector<TreeNode> nodes;
  for (const auto& n : j) {
    TreeNode node;
    if (n.contains("counts")) {
      const auto& counts = n["counts"];
      if (!counts.is_array() || counts.size() != kLabelCount) {
        throw Error(ErrorCode::kFormat, "model: node counts must have 5 entries");
      }
      for (std::size_t c = 0; c < kLabelCount; ++c) node.counts[c] = counts[c].get<std::uint32_t>();
    }
    if (n.contains("feature")) {
      node.feature = n.at("feature").get<std::uint32_t>();
      node.threshold = n.at("threshold").get<double>();
      if (node.feature == TreeNode::kLeaf) throw Error(ErrorCode::kFormat, "model: bad feature index");
    }
    nodes.push_back(node);
  }
  if (nodes.empty() || link_subtree(nodes, 0) != nodes.size()) {
    throw Error(ErrorCode::kFormat, "model: malformed pre-order tree");
  }
  return DecisionTree(std::move(nodes));
}

}  // namespace

std::string model_to_json(const RandomForestModel& model) {
  const ForestParams& p = model.params();
  json labels = json::array();
  for (Label label : kAllLabels) labels.push_back(std::string(to_string(label)));
  json trees = json::array();
  for (const auto& tree : model.trees()) trees.push_back(tree_to_json(tree));
  const json doc = {{"version", RandomForestModel::kVersion},
                    {"params",
                     {{"n_trees", p.n_trees},
                      {"max_depth", p.max_depth},
                      {"min_leaf", p.min_leaf},
                      {"features_per_split", p.features_per_split},
                      {"seed", p.seed},
                      {"n_features", model.n_features()}}},
                    {"labels", labels},
                    {"trees", trees}};
  return doc.dump() + "\n";
}

RandomForestModel model_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    if (doc.at("version") != RandomForestModel::kVersion) {
      throw Error(ErrorCode::kFormat, "model: unsupported version");
    }
    json labels = json::array();
    for (Label label : kAllLabels) labels.push_back(std::string(to_string(label)));
    if (doc.at("labels") != labels) throw Error(ErrorCode::kFormat, "model: unexpected label order");

    const json& jp = doc.at("params");
    ForestParams p;
    p.n_trees = jp.at("n_trees").get<std::size_t>();
    p.max_depth = jp.at("max_depth").get<std::size_t>();
    p.min_leaf = jp.at("min_leaf").get<std::size_t>();
    p.features_per_split = jp.at("features_per_split").get<std::size_t>();
    p.seed = jp.at("seed").get<std::uint64_t>();
    const auto n_features = jp.at("n_features").get<std::size_t>();

    std::vector<DecisionTree> trees;
    for (const auto& t : doc.at("trees")) trees.push_back(tree_from_json(t));
    return RandomForestModel(p, n_features, std::move(trees));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("model: ") + e.what());
  }
}

void save_model(const RandomForestModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path + "'");
  out << model_to_json(model);
  if (!out) throw Error(ErrorCode::kIo, "write to '" + path + "' failed");
}

RandomForestModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open model '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return model_from_json(text.str());
}

}  // namespace dronelight
