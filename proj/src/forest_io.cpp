#include "mousepose/forest_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace mousepose {

namespace {

constexpr int kFormatVersion = 1;

std::string fmt(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

[[noreturn]] void corrupt(const std::string& what) {
  throw std::runtime_error("corrupt forest file: " + what);
}

// Preorder listing of the reachable nodes; arena slots abandoned by
// retraining are dropped and indices remapped.
std::vector<std::int32_t> preorder(const Tree& tree) {
  std::vector<std::int32_t> order;
  order.reserve(tree.nodes.size());
  std::vector<std::int32_t> stack{tree.root};
  while (!stack.empty()) {
    std::int32_t node = stack.back();
    stack.pop_back();
    order.push_back(node);
    const TreeNode& n = tree.nodes[static_cast<std::size_t>(node)];
    if (!n.isLeaf()) {
      stack.push_back(n.right);  // left pops first
      stack.push_back(n.left);
    }
  }
  return order;
}

void writeTree(const Tree& tree, const Forest& forest, std::ostream& out) {
  std::vector<std::int32_t> order = preorder(tree);
  std::vector<std::int32_t> remap(tree.nodes.size(), -1);
  for (std::size_t i = 0; i < order.size(); ++i) {
    remap[static_cast<std::size_t>(order[i])] = static_cast<std::int32_t>(i);
  }
  out << "tree nodes " << order.size() << "\n";
  for (std::int32_t node : order) {
    const TreeNode& n = tree.nodes[static_cast<std::size_t>(node)];
    if (!n.isLeaf()) {
      out << "split ";
      if (n.test.feature.family == FeatureFamily::Axis2D) {
        out << "axis " << (n.test.feature.axis == Axis2D::X ? "x" : "y");
      } else {
        out << "offset " << fmt(n.test.feature.offset.x) << ' ' << fmt(n.test.feature.offset.y);
      }
      out << ' ' << fmt(n.test.threshold) << ' ' << remap[static_cast<std::size_t>(n.left)]
          << ' ' << remap[static_cast<std::size_t>(n.right)] << "\n";
      continue;
    }
    const LeafModel& leaf = tree.leafAt(node);
    if (forest.mode == ForestMode::Classification) {
      out << "leaf class " << leaf.label;
      for (double h : leaf.histogram) out << ' ' << fmt(h);
      out << "\n";
    } else {
      out << "leaf reg";
      for (const JointLeaf& j : leaf.joints) {
        out << ' ' << j.support << ' ' << (j.low_confidence ? 1 : 0) << ' '
            << fmt(j.mean_offset.x) << ' ' << fmt(j.mean_offset.y) << ' '
            << fmt(j.mean_offset.z);
      }
      out << "\n";
    }
  }
}

}  // namespace

void saveForest(const Forest& forest, std::ostream& out) {
  const TrainParams& p = forest.params;
  out << "mousepose-forest " << kFormatVersion << "\n";
  out << "mode " << (forest.mode == ForestMode::Classification ? "classification" : "regression")
      << "\n";
  out << "features " << (forest.features == FeatureFamily::Axis2D ? "axis2d" : "depth") << "\n";
  out << "classes " << forest.num_classes << "\n";
  out << "params num_trees " << p.num_trees << " m " << p.m << " thresholds_per_feature "
      << p.thresholds_per_feature << " leaf_capacity " << p.leaf_capacity << " max_levels "
      << p.max_levels << " lambda_max " << fmt(p.lambda_max) << " bagging_fraction "
      << fmt(p.bagging_fraction) << " tau " << fmt(p.tau) << " seed " << p.seed << "\n";
  out << "epsilon";
  for (double e : p.epsilon) out << ' ' << fmt(e);
  out << "\n";
  if (forest.features == FeatureFamily::DepthOffset) {
    out << "depthfeat reference_depth " << fmt(forest.depth_features.reference_depth)
        << " max_offset_radius " << fmt(forest.depth_features.max_offset_radius)
        << " background_depth " << fmt(forest.depth_features.background_depth) << "\n";
  }
  out << "trees " << forest.trees.size() << "\n";
  for (const Tree& tree : forest.trees) writeTree(tree, forest, out);
  out << "end\n";
}

void saveForest(const Forest& forest, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  saveForest(forest, out);
  if (!out) throw std::runtime_error("failed writing " + path);
}

namespace {

template <class T>
T want(std::istream& in, const std::string& what) {
  T v{};
  if (!(in >> v)) corrupt("expected " + what);
  return v;
}

void wantKey(std::istream& in, const std::string& key) {
  std::string k;
  if (!(in >> k) || k != key) corrupt("expected '" + key + "'");
}

}  // namespace

Forest loadForest(std::istream& in) {
  std::string magic;
  if (!(in >> magic) || magic != "mousepose-forest") corrupt("bad magic");
  int version = want<int>(in, "format version");
  if (version < 1 || version > kFormatVersion) {
    throw std::runtime_error("unsupported forest format version " + std::to_string(version));
  }

  Forest forest;
  wantKey(in, "mode");
  std::string mode = want<std::string>(in, "mode value");
  if (mode == "classification") {
    forest.mode = ForestMode::Classification;
  } else if (mode == "regression") {
    forest.mode = ForestMode::Regression;
  } else {
    corrupt("unknown mode '" + mode + "'");
  }
  wantKey(in, "features");
  std::string family = want<std::string>(in, "feature family");
  if (family == "axis2d") {
    forest.features = FeatureFamily::Axis2D;
  } else if (family == "depth") {
    forest.features = FeatureFamily::DepthOffset;
  } else {
    corrupt("unknown feature family '" + family + "'");
  }
  wantKey(in, "classes");
  forest.num_classes = want<std::int32_t>(in, "class count");

  TrainParams& p = forest.params;
  wantKey(in, "params");
  wantKey(in, "num_trees");
  p.num_trees = want<std::int32_t>(in, "num_trees");
  wantKey(in, "m");
  p.m = want<std::int32_t>(in, "m");
  wantKey(in, "thresholds_per_feature");
  p.thresholds_per_feature = want<std::int32_t>(in, "thresholds_per_feature");
  wantKey(in, "leaf_capacity");
  p.leaf_capacity = want<std::int32_t>(in, "leaf_capacity");
  wantKey(in, "max_levels");
  p.max_levels = want<std::int32_t>(in, "max_levels");
  wantKey(in, "lambda_max");
  p.lambda_max = want<double>(in, "lambda_max");
  wantKey(in, "bagging_fraction");
  p.bagging_fraction = want<double>(in, "bagging_fraction");
  wantKey(in, "tau");
  p.tau = want<double>(in, "tau");
  wantKey(in, "seed");
  p.seed = want<std::uint64_t>(in, "seed");
  wantKey(in, "epsilon");
  for (double& e : p.epsilon) e = want<double>(in, "epsilon value");
  if (forest.features == FeatureFamily::DepthOffset) {
    wantKey(in, "depthfeat");
    wantKey(in, "reference_depth");
    forest.depth_features.reference_depth = want<double>(in, "reference_depth");
    wantKey(in, "max_offset_radius");
    forest.depth_features.max_offset_radius = want<double>(in, "max_offset_radius");
    wantKey(in, "background_depth");
    forest.depth_features.background_depth = want<double>(in, "background_depth");
  }

  wantKey(in, "trees");
  auto num_trees = want<std::size_t>(in, "tree count");
  forest.trees.resize(num_trees);
  for (Tree& tree : forest.trees) {
    wantKey(in, "tree");
    wantKey(in, "nodes");
    auto count = want<std::size_t>(in, "node count");
    if (count == 0) corrupt("empty tree");
    tree.nodes.resize(count);
    tree.root = 0;
    for (std::size_t i = 0; i < count; ++i) {
      std::string kind = want<std::string>(in, "node kind");
      TreeNode& node = tree.nodes[i];
      if (kind == "split") {
        std::string feature = want<std::string>(in, "feature kind");
        if (feature == "axis") {
          std::string axis = want<std::string>(in, "axis");
          node.test.feature.family = FeatureFamily::Axis2D;
          if (axis == "x") {
            node.test.feature.axis = Axis2D::X;
          } else if (axis == "y") {
            node.test.feature.axis = Axis2D::Y;
          } else {
            corrupt("unknown axis '" + axis + "'");
          }
        } else if (feature == "offset") {
          node.test.feature.family = FeatureFamily::DepthOffset;
          node.test.feature.offset.x = want<double>(in, "offset x");
          node.test.feature.offset.y = want<double>(in, "offset y");
        } else {
          corrupt("unknown feature kind '" + feature + "'");
        }
        node.test.threshold = want<double>(in, "threshold");
        node.left = want<std::int32_t>(in, "left child");
        node.right = want<std::int32_t>(in, "right child");
        if (node.left < 0 || node.right < 0 || node.left >= static_cast<std::int32_t>(count) ||
            node.right >= static_cast<std::int32_t>(count)) {
          corrupt("child index out of range");
        }
        node.leaf = -1;
      } else if (kind == "leaf") {
        std::string leaf_kind = want<std::string>(in, "leaf kind");
        LeafModel leaf;
        if (leaf_kind == "class") {
          if (forest.mode != ForestMode::Classification) corrupt("class leaf in regression forest");
          leaf.label = want<std::int32_t>(in, "leaf label");
          leaf.histogram.resize(static_cast<std::size_t>(forest.num_classes));
          for (double& h : leaf.histogram) h = want<double>(in, "histogram value");
        } else if (leaf_kind == "reg") {
          if (forest.mode != ForestMode::Regression) corrupt("regression leaf in class forest");
          for (JointLeaf& j : leaf.joints) {
            j.support = want<std::int32_t>(in, "support");
            j.low_confidence = want<int>(in, "confidence flag") != 0;
            j.mean_offset.x = want<float>(in, "offset x");
            j.mean_offset.y = want<float>(in, "offset y");
            j.mean_offset.z = want<float>(in, "offset z");
          }
        } else {
          corrupt("unknown leaf kind '" + leaf_kind + "'");
        }
        tree.leaves.push_back(std::move(leaf));
        node.left = -1;
        node.right = -1;
        node.leaf = static_cast<std::int32_t>(tree.leaves.size() - 1);
      } else {
        corrupt("unknown node kind '" + kind + "'");
      }
    }
  }
  wantKey(in, "end");
  return forest;
}

Forest loadForest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  return loadForest(in);
}

}  // namespace mousepose
