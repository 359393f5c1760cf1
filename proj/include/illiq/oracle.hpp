#pragma once

#include <cstdint>
#include <map>
#include <optional>

#include "illiq/market.hpp"
#include "illiq/tree.hpp"

namespace illiq {
namespace oracle {

// Sampling check that P is the polar of K: for random directions y,
// (g.y <= 0 for all generators) must match (y satisfies P). Directions in
// the ambiguity band around 0 are skipped. Returns the first counterexample
// direction through *counterexample when given.
bool brute_polar_check(const VCone& cone, const HPolyhedron& polar,
                       int samples, std::uint64_t seed = 1,
                       Eigen::VectorXd* counterexample = nullptr);

// Grid verdict for c_T in A_T(C) on a one-period, d = 2 model: multiscale
// grid search over z_0 minimizing the worst constraint violation, with
// per-leaf checks of c_T - z_0 against C_1. Never consults the LP kernel.
bool brute_membership_AT(const MarketModel& model,
                         const std::map<int, Eigen::VectorXd>& leaf_claim,
                         double grid_step = 1e-3, double grid_radius = 10.0);

// Bisection over the scalar premium with brute_membership_AT as the
// membership test; minimal alpha within grid_step.
double brute_superhedge_one_period(
    const MarketModel& model, const std::map<int, Eigen::VectorXd>& leaf_claim,
    int numeraire, double grid_step = 1e-3, double grid_radius = 10.0);

// Exact-rational interval with open/closed endpoints, for the backward
// martingale-ratio recursion on 2-asset bid-ask models.
struct RatInterval {
  Rational lo{0, 1};
  Rational hi{0, 1};
  bool lo_open = false;
  bool hi_open = false;
};

// Backward recursion: a node's feasible ratio set is its bid-ask interval
// intersected with the probability mix of the children's sets. Non-strict
// uses closed intervals; strict uses open ones (the exact limit of shrinking
// every interval by a positive slack).
bool interval_martingale_feasibility(const EventTree& tree,
                                     const std::vector<RatInterval>& intervals,
                                     bool strict);

// Ratio intervals [1/pi_21, pi_12] of a 2-asset bid-ask model, exact when
// the spec carried rational entries.
std::vector<RatInterval> bid_ask_ratio_intervals(
    const EventTree& tree, const std::vector<Eigen::MatrixXd>& pi,
    const std::vector<std::optional<std::pair<Rational, Rational>>>*
        exact_entries = nullptr);

// Rational helpers (exact, overflow-checked).
Rational rat_add(Rational a, Rational b);
Rational rat_mul(Rational a, Rational b);
Rational rat_from_double(double v, long long max_den = 1'000'000);
int rat_cmp(Rational a, Rational b);

}  // namespace oracle
}  // namespace illiq
