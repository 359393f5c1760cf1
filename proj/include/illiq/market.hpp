#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "illiq/geometry.hpp"
#include "illiq/tree.hpp"

namespace illiq {

class MarketError : public std::runtime_error {
 public:
  explicit MarketError(const std::string& what) : std::runtime_error(what) {}
};

// Per-node solvency set in lifted form: {x : exists aux, A [x;aux] <= b}.
// aux_count = 0 means the set lives directly in portfolio space.
struct SolvencySet {
  Eigen::MatrixXd A;  // rows x (d + aux_count)
  Eigen::VectorXd b;
  int d = 0;
  int aux_count = 0;
  bool conical = false;
  // Portfolio-space generator form, cached for conical sets (used by the
  // polar / consistent-price-system machinery).
  std::optional<VCone> cone_gens;
  // Portfolio-space halfspace form when available (always when aux_count = 0).
  std::optional<HPolyhedron> x_halfspaces;
  // Top marginal exchange rates, kept for currency-cost sets; the recession
  // cone projects to the bid-ask cone at these rates.
  std::optional<Eigen::MatrixXd> top_slopes;

  bool contains(const Eigen::VectorXd& x, bool recession = false) const;
};

struct MarketModel {
  enum class Kind { BidAsk, CostProcess, CurrencyCosts, Explicit };

  EventTree tree;
  std::vector<SolvencySet> sets;  // indexed by tree node index
  bool conical = false;
  int d = 0;
  Kind kind = Kind::Explicit;

  const SolvencySet& set(int node_index) const { return sets.at(node_index); }
};

// Bid-ask matrices per node; pi(i,j) = units of asset i per unit of asset j.
struct BidAskSpec {
  std::vector<Eigen::MatrixXd> pi;  // per node index, d x d, diagonal = 1
};

// Piecewise-linear convex cash cost S(x) = max_k (a_k.x - b_k), S(0) = 0.
struct PwlPiece {
  Eigen::VectorXd a;
  double b = 0.0;
};
struct CostProcessSpec {
  std::vector<std::vector<PwlPiece>> pieces;  // per node index
};

// Scalar convex nondecreasing pieces S(v) = max_m (slope_m v - offset_m).
struct ScalarPiece {
  double slope = 0.0;
  double offset = 0.0;
};
struct CurrencyIlliquiditySpec {
  // per node index, then [i][j] = pieces of S^{ij}; diagonal entries ignored.
  std::vector<std::vector<std::vector<std::vector<ScalarPiece>>>> costs;
};

MarketModel from_bid_ask(const EventTree& tree, const BidAskSpec& spec);
MarketModel from_cost_process(const EventTree& tree, const CostProcessSpec& spec);
MarketModel from_currency_costs(const EventTree& tree,
                                const CurrencyIlliquiditySpec& spec);
MarketModel from_explicit(const EventTree& tree,
                          std::vector<HPolyhedron> sets);

// Node-wise recession cones; output is conical and idempotent under repeats.
MarketModel recession_model(const MarketModel& model);

// Exact x-space H-representation of a lifted set (d <= 3, double description
// on the homogenization).
HPolyhedron project_lifted_to_x(const SolvencySet& set);

}  // namespace illiq
