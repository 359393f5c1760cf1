#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "illiq/market.hpp"
#include "illiq/tree.hpp"

namespace illiq {

// Nonnegative nonzero martingale with y_t in the polar of each node's cone;
// strict adds componentwise positivity and relative-interior membership.
struct PriceSystem {
  AdaptedVectorProcess y;
  bool strict = false;
};

struct HedgeResult {
  bool member = false;
  std::optional<AdaptedVectorProcess> hedge;
};

// Can the claim process be delivered from zero endowment with terminal
// liquidation to zero?
HedgeResult claim_in_A(const MarketModel& model, const AdaptedVectorProcess& c);

// Terminal-claim special case: claim supported at the leaves only.
bool claim_in_AT(const MarketModel& model,
                 const std::map<int, Eigen::VectorXd>& leaf_claim);

struct SuperhedgeResult {
  enum class Status { Optimal, ScalableArbitrage, Infeasible, NumericalFailure };
  Status status = Status::NumericalFailure;
  double alpha = 0.0;
  AdaptedVectorProcess hedge;
  AdaptedVectorProcess premium;
  std::vector<std::string> warnings;
};

struct SuperhedgeOptions {
  // Emit a warning when the model fails robust-no-scalable-arbitrage; the LP
  // is solved either way and unboundedness is reported as its own status.
  bool diagnose_arbitrage = true;
};

// Minimal scalar premium alpha quoted in the numeraire asset at the root.
SuperhedgeResult superhedge_premium(const MarketModel& model,
                                    const AdaptedVectorProcess& c,
                                    int numeraire,
                                    const SuperhedgeOptions& opts = {});

struct DualBoundOptions {
  // Conical models are normalized by sum_i y_0^i <= 1; general models by a
  // coordinate box, escalated x10 when the optimum touches it.
  double box = 1e3;
  int max_escalations = 3;
  // Force the general epigraph encoding even on conical models.
  bool force_epigraph = false;
};

struct DualBoundResult {
  double sup_value = 0.0;
  AdaptedVectorProcess argmax_y;
};

// sup over nonnegative martingales y of E sum (c-p).y - E sum sigma_C(y);
// 0 means p superhedges c, > 0 gives a separating martingale.
DualBoundResult dual_bound(const MarketModel& model,
                           const AdaptedVectorProcess& c,
                           const AdaptedVectorProcess& p,
                           const DualBoundOptions& opts = {});

bool superhedge_check(const MarketModel& model, const AdaptedVectorProcess& c,
                      const AdaptedVectorProcess& p,
                      std::string* diagnostic = nullptr);

// Conical models only. Non-strict: any feasible system. Strict: maximize the
// minimal slack delta; a system is returned only when delta* >= delta_min.
std::optional<PriceSystem> find_consistent_price_system(
    const MarketModel& model, bool strict, double delta_min = 1e-7);

// Independent re-verification of the PriceSystem type invariants (direct
// arithmetic plus the implicit-row classification, no trust in the LP that
// produced the system).
bool verify_price_system(const MarketModel& model, const PriceSystem& ps,
                         double slack = 5e-8, double tol = 1e-7);

}  // namespace illiq
