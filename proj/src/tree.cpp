#include "illiq/tree.hpp"

#include <algorithm>
#include <cmath>

namespace illiq {

EventTree EventTree::validate(const std::vector<RawTreeNode>& raw, int d) {
  if (raw.empty()) throw TreeError("tree has no nodes");
  if (d < 1) throw TreeError("asset count must be >= 1");

  EventTree tree;
  tree.d_ = d;
  tree.nodes_.reserve(raw.size());
  for (const auto& rn : raw) {
    if (tree.id_to_index_.count(rn.id))
      throw TreeError("duplicate node id " + std::to_string(rn.id));
    tree.id_to_index_[rn.id] = static_cast<int>(tree.nodes_.size());
    Node n;
    n.id = rn.id;
    n.parent = -1;
    n.time = rn.time;
    n.cond_prob = rn.cond_prob_rat ? rn.cond_prob_rat->value() : rn.cond_prob;
    n.cond_prob_rat = rn.cond_prob_rat;
    n.prob = 0.0;
    tree.nodes_.push_back(std::move(n));
  }

  for (size_t i = 0; i < raw.size(); ++i) {
    auto& n = tree.nodes_[i];
    if (raw[i].parent) {
      auto it = tree.id_to_index_.find(*raw[i].parent);
      if (it == tree.id_to_index_.end())
        throw TreeError("orphan node " + std::to_string(n.id) +
                        ": unknown parent " + std::to_string(*raw[i].parent));
      n.parent = it->second;
      if (tree.nodes_[n.parent].time != n.time - 1)
        throw TreeError("node " + std::to_string(n.id) +
                        " is not one step after its parent");
      tree.nodes_[n.parent].children.push_back(static_cast<int>(i));
    } else {
      if (tree.root_ >= 0) throw TreeError("more than one root");
      if (n.time != 0) throw TreeError("root must be at time 0");
      if (std::abs(n.cond_prob - 1.0) > 1e-12)
        throw TreeError("root cond_prob must be 1");
      tree.root_ = static_cast<int>(i);
    }
    if (n.cond_prob <= 0.0)
      throw TreeError("nonpositive probability at node " + std::to_string(n.id));
  }
  if (tree.root_ < 0) throw TreeError("tree has no root");

  // Cycle / reachability check via parent walk with depth bound.
  const int N = tree.node_count();
  for (int i = 0; i < N; ++i) {
    int cur = i, steps = 0;
    while (cur != tree.root_) {
      cur = tree.nodes_[cur].parent;
      if (cur < 0 || ++steps > N)
        throw TreeError("cycle or disconnected node " +
                        std::to_string(tree.nodes_[i].id));
    }
  }

  tree.horizon_ = 0;
  for (const auto& n : tree.nodes_) tree.horizon_ = std::max(tree.horizon_, n.time);

  for (const auto& n : tree.nodes_) {
    if (n.children.empty()) {
      if (n.time != tree.horizon_)
        throw TreeError("leaf not at horizon: node " + std::to_string(n.id));
    } else {
      double s = 0.0;
      for (int c : n.children) s += tree.nodes_[c].cond_prob;
      if (std::abs(s - 1.0) > 1e-12)
        throw TreeError("child-probability sum != 1 under node " +
                        std::to_string(n.id));
    }
  }

  // Absolute probabilities, root first (parents precede children in any
  // time-ordered walk).
  std::vector<int> order(N);
  for (int i = 0; i < N; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return tree.nodes_[a].time < tree.nodes_[b].time;
  });
  for (int i : order) {
    auto& n = tree.nodes_[i];
    n.prob = (n.parent < 0) ? 1.0 : tree.nodes_[n.parent].prob * n.cond_prob;
    if (n.prob <= 0.0)
      throw TreeError("nonpositive probability at node " + std::to_string(n.id));
  }
  return tree;
}

int EventTree::index_of(int id) const {
  auto it = id_to_index_.find(id);
  if (it == id_to_index_.end())
    throw TreeError("unknown node id " + std::to_string(id));
  return it->second;
}

std::vector<int> EventTree::leaves() const {
  std::vector<int> out;
  for (int i = 0; i < node_count(); ++i)
    if (is_leaf(i)) out.push_back(i);
  return out;
}

AdaptedVectorProcess AdaptedVectorProcess::zero(const EventTree& tree) {
  AdaptedVectorProcess p;
  p.values.assign(tree.node_count(),
                  Eigen::VectorXd::Zero(tree.asset_count()));
  return p;
}

Eigen::VectorXd conditional_expectation(const EventTree& tree,
                                        const AdaptedVectorProcess& proc,
                                        int node_index) {
  const auto& n = tree.node(node_index);
  if (n.children.empty())
    throw TreeError("conditional_expectation at a leaf node");
  Eigen::VectorXd e = Eigen::VectorXd::Zero(proc.at(n.children[0]).size());
  for (int c : n.children) e += tree.node(c).cond_prob * proc.at(c);
  return e;
}

bool is_martingale(const EventTree& tree, const AdaptedVectorProcess& y,
                   double tol) {
  for (int i = 0; i < tree.node_count(); ++i) {
    if (tree.is_leaf(i)) continue;
    Eigen::VectorXd e = conditional_expectation(tree, y, i);
    if ((e - y.at(i)).lpNorm<Eigen::Infinity>() > tol) return false;
  }
  return true;
}

}  // namespace illiq
