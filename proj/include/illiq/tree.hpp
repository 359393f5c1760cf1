#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace illiq {

struct Rational {
  long long num = 0;
  long long den = 1;
  double value() const { return static_cast<double>(num) / den; }
};

struct RawTreeNode {
  int id = 0;
  std::optional<int> parent;  // empty for the root
  int time = 0;
  double cond_prob = 1.0;
  std::optional<Rational> cond_prob_rat;  // kept when input was exact
};

class TreeError : public std::runtime_error {
 public:
  explicit TreeError(const std::string& what) : std::runtime_error(what) {}
};

// Finite filtered probability space as a rooted tree. Immutable once built.
class EventTree {
 public:
  struct Node {
    int id;
    int parent;  // -1 for root
    int time;
    double cond_prob;
    double prob;  // product of cond_prob along the root path
    std::optional<Rational> cond_prob_rat;
    std::vector<int> children;  // node indices, not ids
  };

  // Validates and builds; throws TreeError with a distinct message for each
  // defect: orphan node, cycle, child-probability sum, leaf not at horizon,
  // nonpositive probability.
  static EventTree validate(const std::vector<RawTreeNode>& raw, int d);

  int horizon() const { return horizon_; }
  int asset_count() const { return d_; }
  int node_count() const { return static_cast<int>(nodes_.size()); }
  const Node& node(int index) const { return nodes_[index]; }
  const std::vector<Node>& nodes() const { return nodes_; }
  int root() const { return root_; }
  int index_of(int id) const;
  bool is_leaf(int index) const { return nodes_[index].children.empty(); }
  std::vector<int> leaves() const;

 private:
  std::vector<Node> nodes_;
  std::map<int, int> id_to_index_;
  int root_ = -1;
  int horizon_ = 0;
  int d_ = 1;
};

// Node-indexed d-vectors, keyed by tree node *index*.
struct AdaptedVectorProcess {
  std::vector<Eigen::VectorXd> values;  // one per node index

  static AdaptedVectorProcess zero(const EventTree& tree);
  const Eigen::VectorXd& at(int node_index) const { return values.at(node_index); }
  Eigen::VectorXd& at(int node_index) { return values.at(node_index); }
};

// Expectation over the children of a non-leaf node; throws on leaves.
Eigen::VectorXd conditional_expectation(const EventTree& tree,
                                        const AdaptedVectorProcess& proc,
                                        int node_index);

bool is_martingale(const EventTree& tree, const AdaptedVectorProcess& y,
                   double tol = 1e-9);

}  // namespace illiq
