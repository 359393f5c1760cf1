#pragma once

#include <optional>

#include "illiq/market.hpp"
#include "illiq/pricing.hpp"

namespace illiq {

struct NaResult {
  bool holds = false;
  std::optional<AdaptedVectorProcess> witness;  // self-financing increments
};

// No-arbitrage: no nonnegative nonzero terminal outcome attainable from zero
// endowment. Decided by a capped LP over self-financing increments.
NaResult check_na(const MarketModel& model);

struct RobustNaResult {
  bool holds = false;
  std::optional<PriceSystem> certificate;
};

// Robust no-arbitrage via the dual characterization: holds iff a strictly
// consistent price system exists. Conical models only.
RobustNaResult check_robust_na(const MarketModel& model,
                               double strict_delta = 1e-7);

// Robust no-arbitrage of the recession model; defined for every convex model.
RobustNaResult check_robust_no_scalable_arbitrage(const MarketModel& model,
                                                  double strict_delta = 1e-7);

// Node-wise: C \ C^0 inside ri(C~). Both models conical.
bool check_dominance(const MarketModel& model, const MarketModel& candidate);

}  // namespace illiq
