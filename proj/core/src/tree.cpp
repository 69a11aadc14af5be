#include "rdpscope/tree.hpp"

#include <algorithm>
#include <cmath>

namespace rdpscope {

namespace {

double gini(double pos_weight, double total_weight) {
  if (total_weight <= 0) return 0;
  const double p = pos_weight / total_weight;
  return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

struct Split {
  int attribute = -1;
  double threshold = 0;
  double decrease = 0;
};

struct WorkItem {
  int node;
  int depth;
  std::vector<std::size_t> rows;
};

}  // namespace

Cart Cart::grow(const Rows& data, const std::vector<bool>& labels,
                const std::vector<double>& weights, const std::vector<std::size_t>& row_indices,
                const CartParams& params, Rng* rng) {
  Cart tree;
  const std::size_t d = data.empty() ? 0 : data[0].size();

  std::vector<WorkItem> stack;
  tree.nodes_.push_back(TreeNode{});
  stack.push_back(WorkItem{0, 0, row_indices});

  // Scratch sorted by attribute value within the node.
  struct Entry {
    double value;
    double weight;
    bool label;
  };
  std::vector<Entry> entries;

  while (!stack.empty()) {
    WorkItem item = std::move(stack.back());
    stack.pop_back();
    TreeNode& node = tree.nodes_[static_cast<std::size_t>(item.node)];

    double total_w = 0, pos_w = 0;
    std::size_t pos_n = 0;
    for (std::size_t r : item.rows) {
      total_w += weights[r];
      if (labels[r]) {
        pos_w += weights[r];
        ++pos_n;
      }
    }
    node.count = item.rows.size();
    node.positive_fraction = total_w > 0 ? pos_w / total_w : 0.0;

    const bool pure = pos_n == 0 || pos_n == item.rows.size();
    if (pure || item.depth >= params.max_depth ||
        item.rows.size() < 2 * static_cast<std::size_t>(params.min_leaf)) {
      continue;
    }

    std::vector<std::size_t> candidates;
    if (params.mtry > 0 && static_cast<std::size_t>(params.mtry) < d && rng != nullptr) {
      candidates = rng->sample_indices(d, static_cast<std::size_t>(params.mtry));
    } else {
      candidates.resize(d);
      for (std::size_t a = 0; a < d; ++a) candidates[a] = a;
    }

    const double parent_impurity = gini(pos_w, total_w);
    Split best;
    for (std::size_t a : candidates) {
      entries.clear();
      entries.reserve(item.rows.size());
      for (std::size_t r : item.rows) {
        entries.push_back(Entry{data[r][a], weights[r], labels[r]});
      }
      std::sort(entries.begin(), entries.end(),
                [](const Entry& x, const Entry& y) { return x.value < y.value; });

      double left_w = 0, left_pos = 0;
      for (std::size_t i = 1; i < entries.size(); ++i) {
        left_w += entries[i - 1].weight;
        if (entries[i - 1].label) left_pos += entries[i - 1].weight;
        if (entries[i].value == entries[i - 1].value) continue;
        if (i < static_cast<std::size_t>(params.min_leaf) ||
            entries.size() - i < static_cast<std::size_t>(params.min_leaf)) {
          continue;
        }
        const double right_w = total_w - left_w;
        const double right_pos = pos_w - left_pos;
        const double weighted =
            (left_w * gini(left_pos, left_w) + right_w * gini(right_pos, right_w)) / total_w;
        const double decrease = parent_impurity - weighted;
        if (decrease > best.decrease + 1e-15) {
          best.attribute = static_cast<int>(a);
          best.threshold = (entries[i - 1].value + entries[i].value) / 2.0;
          best.decrease = decrease;
        }
      }
    }

    if (best.attribute < 0 || best.decrease <= 1e-12) continue;

    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t r : item.rows) {
      (data[r][static_cast<std::size_t>(best.attribute)] <= best.threshold ? left_rows
                                                                           : right_rows)
          .push_back(r);
    }
    if (left_rows.size() < static_cast<std::size_t>(params.min_leaf) ||
        right_rows.size() < static_cast<std::size_t>(params.min_leaf)) {
      continue;  // midpoint landed on a degenerate boundary
    }

    node.attribute = best.attribute;
    node.threshold = best.threshold;
    node.left = static_cast<int>(tree.nodes_.size());
    node.right = node.left + 1;
    const int node_index = item.node;
    tree.nodes_.push_back(TreeNode{});
    tree.nodes_.push_back(TreeNode{});
    // `node` may dangle after push_back; re-read via index if needed later.
    const int left_child = tree.nodes_[static_cast<std::size_t>(node_index)].left;
    const int right_child = tree.nodes_[static_cast<std::size_t>(node_index)].right;
    stack.push_back(WorkItem{right_child, item.depth + 1, std::move(right_rows)});
    stack.push_back(WorkItem{left_child, item.depth + 1, std::move(left_rows)});
  }
  return tree;
}

double Cart::leaf_score(std::span<const double> row) const {
  int i = 0;
  while (nodes_[static_cast<std::size_t>(i)].attribute >= 0) {
    const TreeNode& n = nodes_[static_cast<std::size_t>(i)];
    i = row[static_cast<std::size_t>(n.attribute)] <= n.threshold ? n.left : n.right;
  }
  return nodes_[static_cast<std::size_t>(i)].positive_fraction;
}

}  // namespace rdpscope
