#pragma once

#include <map>
#include <random>
#include <vector>

#include "illiq/market.hpp"
#include "illiq/tree.hpp"

namespace testutil {

using illiq::AdaptedVectorProcess;
using illiq::BidAskSpec;
using illiq::EventTree;
using illiq::MarketModel;
using illiq::RawTreeNode;

inline EventTree single_node_tree(int d = 2) {
  return EventTree::validate({{0, std::nullopt, 0, 1.0, illiq::Rational{1, 1}}},
                             d);
}

// Root 0, then ids in breadth order, non-recombining. cond probs p_up / 1-p_up.
inline EventTree binomial_tree(int T, int d = 2, double p_up = 0.5) {
  std::vector<RawTreeNode> raw;
  raw.push_back({0, std::nullopt, 0, 1.0, illiq::Rational{1, 1}});
  int next = 1;
  std::vector<int> frontier{0};
  for (int t = 1; t <= T; ++t) {
    std::vector<int> nf;
    for (int parent : frontier) {
      raw.push_back({next, parent, t, p_up, std::nullopt});
      nf.push_back(next++);
      raw.push_back({next, parent, t, 1.0 - p_up, std::nullopt});
      nf.push_back(next++);
    }
    frontier = std::move(nf);
  }
  return EventTree::validate(raw, d);
}

// Single path of length T.
inline EventTree deterministic_tree(int T, int d = 2) {
  std::vector<RawTreeNode> raw;
  raw.push_back({0, std::nullopt, 0, 1.0, illiq::Rational{1, 1}});
  for (int t = 1; t <= T; ++t)
    raw.push_back({t, t - 1, t, 1.0, illiq::Rational{1, 1}});
  return EventTree::validate(raw, d);
}

// Zero-spread two-asset exchange at price s: pi01 = s, pi10 = 1/s.
inline Eigen::MatrixXd frictionless_pi(double s) {
  Eigen::MatrixXd pi(2, 2);
  pi << 1.0, s, 1.0 / s, 1.0;
  return pi;
}

inline Eigen::MatrixXd bid_ask_pi2(double pi01, double pi10) {
  Eigen::MatrixXd pi(2, 2);
  pi << 1.0, pi01, pi10, 1.0;
  return pi;
}

// Binomial stock: s0 = 1, up 2, down 0.5; asset 0 is cash. Node ids 0,1(up),2.
inline MarketModel frictionless_binomial() {
  EventTree tree = binomial_tree(1);
  BidAskSpec spec;
  spec.pi = {frictionless_pi(1.0), frictionless_pi(2.0), frictionless_pi(0.5)};
  return illiq::from_bid_ask(tree, spec);
}

// Cash-delivered call with strike 1 on the binomial model above: (1,0) up.
inline AdaptedVectorProcess binomial_call(const EventTree& tree) {
  AdaptedVectorProcess c = AdaptedVectorProcess::zero(tree);
  c.at(tree.index_of(1)) = Eigen::Vector2d(1.0, 0.0);
  return c;
}

// Random tree: at each non-leaf, 1-3 children with rational probabilities.
inline EventTree random_tree(std::mt19937_64& rng, int T, int max_nodes,
                             int d = 2) {
  std::vector<RawTreeNode> raw;
  raw.push_back({0, std::nullopt, 0, 1.0, illiq::Rational{1, 1}});
  int next = 1;
  std::vector<int> frontier{0};
  for (int t = 1; t <= T; ++t) {
    std::vector<int> nf;
    for (int parent : frontier) {
      int k = 1 + static_cast<int>(rng() % 3);
      if (static_cast<int>(raw.size()) + k > max_nodes) k = 1;
      // probabilities j/den with small denominators
      std::vector<long long> w(k);
      long long den = 0;
      for (int j = 0; j < k; ++j) {
        w[j] = 1 + static_cast<long long>(rng() % 4);
        den += w[j];
      }
      for (int j = 0; j < k; ++j) {
        raw.push_back({next, parent, t, double(w[j]) / double(den),
                       illiq::Rational{w[j], den}});
        nf.push_back(next++);
      }
    }
    frontier = std::move(nf);
  }
  return EventTree::validate(raw, d);
}

}  // namespace testutil
