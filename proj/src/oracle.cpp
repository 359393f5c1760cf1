#include "illiq/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace illiq {
namespace oracle {

namespace {

constexpr double kBand = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

long long checked_mul(long long a, long long b) {
  __int128 r = static_cast<__int128>(a) * b;
  if (r > INT64_MAX || r < INT64_MIN)
    throw std::overflow_error("rational overflow");
  return static_cast<long long>(r);
}

Rational normalize(long long num, long long den) {
  if (den == 0) throw std::invalid_argument("zero denominator");
  if (den < 0) { num = -num; den = -den; }
  long long g = std::gcd(num < 0 ? -num : num, den);
  if (g > 1) { num /= g; den /= g; }
  return {num, den};
}

}  // namespace

Rational rat_add(Rational a, Rational b) {
  return normalize(checked_mul(a.num, b.den) + checked_mul(b.num, a.den),
                   checked_mul(a.den, b.den));
}

Rational rat_mul(Rational a, Rational b) {
  return normalize(checked_mul(a.num, b.num), checked_mul(a.den, b.den));
}

int rat_cmp(Rational a, Rational b) {
  __int128 l = static_cast<__int128>(a.num) * b.den;
  __int128 r = static_cast<__int128>(b.num) * a.den;
  return l < r ? -1 : (l > r ? 1 : 0);
}

Rational rat_from_double(double v, long long max_den) {
  // Continued-fraction approximation; exact for the coarse grids used here.
  bool neg = v < 0;
  double x = neg ? -v : v;
  long long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double f = x;
  for (int it = 0; it < 64; ++it) {
    long long a = static_cast<long long>(std::floor(f));
    long long p2 = a * p1 + p0, q2 = a * q1 + q0;
    if (q2 > max_den) break;
    p0 = p1; q0 = q1; p1 = p2; q1 = q2;
    double rem = f - static_cast<double>(a);
    if (rem < 1e-15) break;
    f = 1.0 / rem;
  }
  return normalize(neg ? -p1 : p1, q1 == 0 ? 1 : q1);
}

bool brute_polar_check(const VCone& cone, const HPolyhedron& polar,
                       int samples, std::uint64_t seed,
                       Eigen::VectorXd* counterexample) {
  if (cone.dim > 4) throw std::invalid_argument("polar check capped at d = 4");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd y(cone.dim);
    for (int j = 0; j < cone.dim; ++j) y[j] = unif(rng);
    double worst = -kInf;
    for (const auto& g : cone.rays) worst = std::max(worst, g.dot(y));
    for (const auto& l : cone.lines) worst = std::max(worst, std::abs(l.dot(y)));
    if (cone.rays.empty() && cone.lines.empty()) worst = 0.0;
    if (std::abs(worst) < kBand) continue;  // ambiguous boundary direction
    bool in_polar_by_cone = worst <= 0.0;
    double presid = -kInf;
    for (int i = 0; i < polar.rows(); ++i)
      presid = std::max(presid, polar.A.row(i).dot(y) - polar.b[i]);
    if (polar.rows() == 0) presid = 0.0;
    if (std::abs(presid) < kBand) continue;
    bool in_polar_by_h = presid <= 0.0;
    if (in_polar_by_cone != in_polar_by_h) {
      if (counterexample) *counterexample = y;
      return false;
    }
  }
  return true;
}

namespace {

// Worst constraint violation of x against a node's solvency set, grid-based
// for lifted (currency) sets, direct halfspace evaluation otherwise.
double membership_violation(const SolvencySet& s, const Eigen::VectorXd& x,
                            double step, double radius) {
  if (s.x_halfspaces) {
    double v = 0.0;
    const auto& h = *s.x_halfspaces;
    for (int i = 0; i < h.rows(); ++i)
      v = std::max(v, h.A.row(i).dot(x) - h.b[i]);
    return std::max(v, 0.0);
  }
  if (s.d != 2 || s.aux_count == 0)
    throw std::invalid_argument("oracle membership needs d = 2");
  // Currency model, d = 2: transfers a12, a21 >= 0, costs from the lifted
  // piece rows. Coarse-to-fine scan over the two transfer amounts.
  auto violation_at = [&](double a12, double a21) {
    Eigen::VectorXd z(s.d + s.aux_count);
    z.head(2) = x;
    z[2] = a12;
    z[3] = a21;
    // u variables take their minimal feasible value max over pieces.
    double u12 = 0.0, u21 = 0.0;
    for (int r = 0; r < s.A.rows(); ++r) {
      // piece rows have -1 on the u column
      if (s.A(r, 4) < -0.5) u12 = std::max(u12, s.A(r, 2) * a12 - s.b[r]);
      if (s.A(r, 5) < -0.5) u21 = std::max(u21, s.A(r, 3) * a21 - s.b[r]);
    }
    double v = 0.0;
    v = std::max(v, x[0] - (a21 - u12));
    v = std::max(v, x[1] - (a12 - u21));
    return v;
  };
  double lo1 = 0, hi1 = radius, lo2 = 0, hi2 = radius;
  double best = kInf;
  double cur = (hi1 - lo1) / 20.0;
  while (true) {
    double b1 = lo1, b2 = lo2;
    for (double a1 = lo1; a1 <= hi1 + 1e-15; a1 += cur)
      for (double a2 = lo2; a2 <= hi2 + 1e-15; a2 += cur) {
        double v = violation_at(a1, a2);
        if (v < best) { best = v; b1 = a1; b2 = a2; }
      }
    if (cur <= step || best == 0.0) break;
    lo1 = std::max(0.0, b1 - 2 * cur);
    hi1 = std::min(radius, b1 + 2 * cur);
    lo2 = std::max(0.0, b2 - 2 * cur);
    hi2 = std::min(radius, b2 + 2 * cur);
    cur /= 5.0;
  }
  return best;
}

// Core membership search with separate refinement and acceptance tolerances;
// the bisection caller tightens both to keep its own error below one step.
bool brute_membership_core(const MarketModel& model,
                           const std::map<int, Eigen::VectorXd>& leaf_claim,
                           double refine_tol, double grid_radius,
                           double accept_tol) {
  if (model.tree.horizon() != 1 || model.d != 2)
    throw std::invalid_argument("brute membership needs T = 1, d = 2");
  const int root = model.tree.root();
  auto leaves = model.tree.leaves();

  auto total_violation = [&](const Eigen::Vector2d& z0) {
    double v =
        membership_violation(model.set(root), z0, refine_tol, grid_radius);
    for (int leaf : leaves) {
      Eigen::VectorXd cl = Eigen::VectorXd::Zero(2);
      auto it = leaf_claim.find(leaf);
      if (it != leaf_claim.end()) cl = it->second;
      v = std::max(v, membership_violation(model.set(leaf), cl - z0, refine_tol,
                                           grid_radius));
    }
    return v;
  };

  // The worst violation is jointly convex in z0 (max of affine and convex
  // pieces), so nested ternary search over the box converges in value.
  auto inner_min = [&](double a) {
    double lo = -grid_radius, hi = grid_radius;
    for (int it = 0; it < 200 && hi - lo > refine_tol; ++it) {
      double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
      if (total_violation(Eigen::Vector2d(a, m1)) <=
          total_violation(Eigen::Vector2d(a, m2)))
        hi = m2;
      else
        lo = m1;
    }
    return total_violation(Eigen::Vector2d(a, 0.5 * (lo + hi)));
  };
  double lo = -grid_radius, hi = grid_radius;
  for (int it = 0; it < 200 && hi - lo > refine_tol; ++it) {
    double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
    if (inner_min(m1) <= inner_min(m2)) hi = m2;
    else lo = m1;
  }
  double best = inner_min(0.5 * (lo + hi));
  return best <= accept_tol;
}

}  // namespace

bool brute_membership_AT(const MarketModel& model,
                         const std::map<int, Eigen::VectorXd>& leaf_claim,
                         double grid_step, double grid_radius) {
  if (grid_step > grid_radius)
    throw std::invalid_argument("grid too coarse: step > radius");
  return brute_membership_core(model, leaf_claim, grid_step, grid_radius,
                               grid_step);
}

double brute_superhedge_one_period(
    const MarketModel& model, const std::map<int, Eigen::VectorXd>& leaf_claim,
    int numeraire, double grid_step, double grid_radius) {
  double scale = 1.0;
  for (const auto& [n, v] : leaf_claim)
    scale = std::max(scale, v.lpNorm<Eigen::Infinity>());
  double lo = -scale - 1.0, hi = scale + 1.0;

  // Tighter tolerances than a single membership query: the acceptance band
  // and grid noise would otherwise bias the bisection by a couple of steps.
  const double accept = grid_step / 8.0;
  const double refine = grid_step / 80.0;
  auto member_at = [&](double alpha) {
    std::map<int, Eigen::VectorXd> adj;
    for (int leaf : model.tree.leaves()) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(2);
      auto it = leaf_claim.find(leaf);
      if (it != leaf_claim.end()) v = it->second;
      v[numeraire] -= alpha;
      adj[leaf] = v;
    }
    return brute_membership_core(model, adj, refine, grid_radius, accept);
  };

  while (!member_at(hi)) {
    hi *= 2.0;
    if (hi > 1e3) return kInf;  // not coverable within the grid box
  }
  if (member_at(lo)) return 0.0;  // disposable claim; clamp at zero
  while (hi - lo > grid_step / 4.0) {
    double mid = 0.5 * (lo + hi);
    if (member_at(mid)) hi = mid;
    else lo = mid;
  }
  return std::max(hi, 0.0);  // minimal alpha within grid_step, clamped
}

namespace {

std::optional<RatInterval> intersect(const RatInterval& a,
                                     const RatInterval& b) {
  RatInterval r;
  int c = rat_cmp(a.lo, b.lo);
  r.lo = c >= 0 ? a.lo : b.lo;
  r.lo_open = c > 0 ? a.lo_open : (c < 0 ? b.lo_open : (a.lo_open || b.lo_open));
  c = rat_cmp(a.hi, b.hi);
  r.hi = c <= 0 ? a.hi : b.hi;
  r.hi_open = c < 0 ? a.hi_open : (c > 0 ? b.hi_open : (a.hi_open || b.hi_open));
  int w = rat_cmp(r.lo, r.hi);
  if (w > 0) return std::nullopt;
  if (w == 0 && (r.lo_open || r.hi_open)) return std::nullopt;
  return r;
}

}  // namespace

bool interval_martingale_feasibility(const EventTree& tree,
                                     const std::vector<RatInterval>& intervals,
                                     bool strict) {
  if (static_cast<int>(intervals.size()) != tree.node_count())
    throw std::invalid_argument("one ratio interval per node required");
  for (const auto& iv : intervals)
    if (rat_cmp(iv.lo, iv.hi) > 0)
      throw std::invalid_argument("empty input interval");

  std::vector<std::optional<RatInterval>> feas(tree.node_count());
  // Process nodes deepest-first.
  std::vector<int> order(tree.node_count());
  for (int i = 0; i < tree.node_count(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return tree.node(a).time > tree.node(b).time;
  });
  for (int n : order) {
    RatInterval own = intervals[n];
    // Strictness opens the endpoints of a genuine interval; a degenerate
    // (frictionless) interval is a ray whose relative interior keeps the
    // ratio equality, so it stays closed.
    if (strict && rat_cmp(own.lo, own.hi) != 0)
      own.lo_open = own.hi_open = true;
    if (tree.is_leaf(n)) {
      feas[n] = own;
      continue;
    }
    // The parent ratio is a convex combination of the children's ratios with
    // weights p_ch * y_ch^0, which are free, so the reachable set is the
    // convex hull of the children's sets. Strict systems need every weight
    // positive (all children alive, an endpoint only when every child
    // attains it); non-strict systems may zero out children, so any single
    // alive child's endpoint is reachable with weight one.
    std::vector<RatInterval> kids;
    bool dead = false;
    for (int ch : tree.node(n).children) {
      if (!feas[ch]) {
        if (strict) { dead = true; break; }
        continue;
      }
      kids.push_back(*feas[ch]);
    }
    if (dead || kids.empty()) { feas[n] = std::nullopt; continue; }
    RatInterval mix = kids.front();
    for (const auto& f : kids) {
      if (rat_cmp(f.lo, mix.lo) < 0) mix.lo = f.lo;
      if (rat_cmp(f.hi, mix.hi) > 0) mix.hi = f.hi;
    }
    bool lo_attained, hi_attained;
    auto at_lo = [&](const RatInterval& f) {
      return rat_cmp(f.lo, mix.lo) == 0 && !f.lo_open;
    };
    auto at_hi = [&](const RatInterval& f) {
      return rat_cmp(f.hi, mix.hi) == 0 && !f.hi_open;
    };
    if (strict) {
      lo_attained = std::all_of(kids.begin(), kids.end(), at_lo);
      hi_attained = std::all_of(kids.begin(), kids.end(), at_hi);
    } else {
      lo_attained = std::any_of(kids.begin(), kids.end(), at_lo);
      hi_attained = std::any_of(kids.begin(), kids.end(), at_hi);
    }
    mix.lo_open = !lo_attained;
    mix.hi_open = !hi_attained;
    feas[n] = intersect(own, mix);
  }
  return feas[tree.root()].has_value();
}

std::vector<RatInterval> bid_ask_ratio_intervals(
    const EventTree& tree, const std::vector<Eigen::MatrixXd>& pi,
    const std::vector<std::optional<std::pair<Rational, Rational>>>*
        exact_entries) {
  std::vector<RatInterval> out;
  for (int n = 0; n < tree.node_count(); ++n) {
    RatInterval iv;
    if (exact_entries && (*exact_entries)[n]) {
      auto [p12, p21] = *(*exact_entries)[n];
      iv.lo = normalize(p21.den, p21.num);  // 1 / pi_21
      iv.hi = p12;
    } else {
      iv.lo = rat_from_double(1.0 / pi[n](1, 0));
      iv.hi = rat_from_double(pi[n](0, 1));
    }
    out.push_back(iv);
  }
  return out;
}

}  // namespace oracle
}  // namespace illiq
