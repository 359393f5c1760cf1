// End-to-end acceptance checks. Each criterion prints exactly one pass/fail
// line; the process exits nonzero when any criterion fails.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "illiq/arbitrage.hpp"
#include "illiq/geometry.hpp"
#include "illiq/lp.hpp"
#include "illiq/market.hpp"
#include "illiq/oracle.hpp"
#include "illiq/pricing.hpp"
#include "illiq/tree.hpp"

#include "helpers.hpp"

using namespace illiq;
using namespace testutil;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& what,
            const std::string& detail = "") {
  std::printf("criterion %d: %s - %s%s%s\n", criterion,
              pass ? "pass" : "FAIL", what.c_str(),
              detail.empty() ? "" : " | ", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double elapsed_s(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

// One-period single-branch model whose sets are all R^2_- + radius * B16.
MarketModel ball_model(double radius) {
  EventTree t = deterministic_tree(1);
  std::vector<HPolyhedron> sets(t.node_count(),
                                orthant_plus_polygon(16, radius));
  return from_explicit(t, sets);
}

AdaptedVectorProcess aggregate_to_leaves(const EventTree& tree,
                                         const AdaptedVectorProcess& c) {
  AdaptedVectorProcess out = AdaptedVectorProcess::zero(tree);
  for (int leaf : tree.leaves()) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(tree.asset_count());
    for (int n = leaf; n >= 0; n = tree.node(n).parent) sum += c.at(n);
    out.at(leaf) = sum;
  }
  return out;
}

std::map<int, Eigen::VectorXd> as_leaf_map(const EventTree& tree,
                                           const AdaptedVectorProcess& c) {
  std::map<int, Eigen::VectorXd> m;
  for (int leaf : tree.leaves()) m[leaf] = c.at(leaf);
  return m;
}

// Random 2-asset bid-ask model carrying exact ratio intervals
// [l/10, h/10] per node (pi01 = h/10, pi10 = 10/l).
struct IntervalModel {
  MarketModel model;
  std::vector<Eigen::MatrixXd> pi;
  std::vector<std::optional<std::pair<Rational, Rational>>> exact;
};

IntervalModel random_interval_model(std::mt19937_64& rng) {
  EventTree t = random_tree(rng, 1 + int(rng() % 3), 15);
  IntervalModel out;
  BidAskSpec spec;
  for (int n = 0; n < t.node_count(); ++n) {
    long long l = 5 + static_cast<long long>(rng() % 20);
    long long h = l + static_cast<long long>(rng() % 8);
    // interval [l/10, h/10]: pi01 = h/10, pi10 = 10/l
    spec.pi.push_back(bid_ask_pi2(double(h) / 10.0, 10.0 / double(l)));
    out.exact.push_back(std::make_pair(Rational{h, 10}, Rational{10, l}));
  }
  out.pi = spec.pi;
  out.model = from_bid_ask(t, spec);
  return out;
}

// Strictly positive martingale on the tree: random leaf values, internal
// nodes by conditional expectation.
AdaptedVectorProcess random_martingale(const EventTree& t, int d,
                                       std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.5, 2.0);
  AdaptedVectorProcess s = AdaptedVectorProcess::zero(t);
  std::vector<int> order(t.node_count());
  for (int i = 0; i < t.node_count(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return t.node(a).time > t.node(b).time;
  });
  for (int n : order) {
    if (t.is_leaf(n)) {
      s.at(n) = Eigen::VectorXd::NullaryExpr(d, [&](int) { return u(rng); });
    } else {
      s.at(n) = conditional_expectation(t, s, n);
    }
  }
  return s;
}

// Bid-ask model built around a strictly positive martingale s with a
// uniform proportional spread, so s itself is a strict price system.
MarketModel martingale_bid_ask(const EventTree& t,
                               const AdaptedVectorProcess& s, int d,
                               double spread) {
  BidAskSpec spec;
  for (int n = 0; n < t.node_count(); ++n) {
    Eigen::MatrixXd pi = Eigen::MatrixXd::Ones(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        if (i != j) pi(i, j) = (s.at(n)[j] / s.at(n)[i]) * (1.0 + spread);
    spec.pi.push_back(pi);
  }
  return from_bid_ask(t, spec);
}

// Two-piece convex cost model whose recession cones keep s strictly
// consistent: pieces s +- w with a nonzero curvature offset on one piece.
MarketModel martingale_cost_process(const EventTree& t,
                                    const AdaptedVectorProcess& s, int d,
                                    std::mt19937_64& rng) {
  std::uniform_real_distribution<double> wu(-0.1, 0.1);
  std::uniform_real_distribution<double> bu(0.1, 1.0);
  CostProcessSpec spec;
  spec.pieces.resize(t.node_count());
  for (int n = 0; n < t.node_count(); ++n) {
    Eigen::VectorXd w(d);
    for (int j = 0; j < d; ++j) w[j] = wu(rng) * s.at(n)[j];
    PwlPiece p1{s.at(n) + w, 0.0};
    PwlPiece p2{s.at(n) - w, bu(rng)};
    spec.pieces[n] = {p1, p2};
  }
  return from_cost_process(t, spec);
}

// Premium at which the dual bound crosses zero, by bisection.
double dual_crossing_alpha(const MarketModel& m, const AdaptedVectorProcess& c,
                           int numeraire, int iters = 40) {
  auto sup_at = [&](double alpha) {
    AdaptedVectorProcess p = AdaptedVectorProcess::zero(m.tree);
    p.at(m.tree.root())[numeraire] = alpha;
    return dual_bound(m, c, p).sup_value;
  };
  double scale = 1.0;
  for (const auto& v : c.values)
    scale = std::max(scale, v.lpNorm<Eigen::Infinity>());
  double lo = -4.0 * scale - 1.0, hi = 4.0 * scale + 1.0;
  while (sup_at(hi) > 1e-9) {
    hi = 2.0 * hi + 1.0;
    if (hi > 1e6) return std::numeric_limits<double>::infinity();
  }
  for (int it = 0; it < iters; ++it) {
    double mid = 0.5 * (lo + hi);
    if (sup_at(mid) <= 1e-9) hi = mid;
    else lo = mid;
  }
  return hi;
}

// ---------------------------------------------------------------------------

void criterion1() {
  auto t0 = std::chrono::steady_clock::now();
  MarketModel m = ball_model(1.0);
  HPolyhedron expect = orthant_plus_polygon(16, 2.0);
  const int leaf = m.tree.leaves().front();
  const int n_pts = 601;  // [-3, 3] at step 1e-2
  std::atomic<long long> mismatches{0};
  unsigned nthreads = std::max(2u, std::thread::hardware_concurrency());
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < nthreads; ++w) {
    pool.emplace_back([&, w] {
      for (int i = w; i < n_pts; i += nthreads) {
        double x = -3.0 + 0.01 * i;
        for (int j = 0; j < n_pts; ++j) {
          double y = -3.0 + 0.01 * j;
          Eigen::Vector2d z(x, y);
          bool lp = claim_in_AT(m, {{leaf, z}});
          if (lp != expect.contains(z)) ++mismatches;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  bool na = check_na(m).holds;
  bool rnsa = check_robust_no_scalable_arbitrage(m).holds;
  double sec = elapsed_s(t0);
  bool pass = mismatches == 0 && !na && rnsa && sec < 5.0;
  report(1, pass, "ball-model attainable set matches the shifted ball on the grid",
         std::to_string(mismatches.load()) + " grid mismatches, na=" +
             std::to_string(na) + ", rnsa=" + std::to_string(rnsa) + ", " +
             std::to_string(sec) + "s");
}

struct Criterion8Data {
  bool pass = false;
  std::string detail;
};

Criterion8Data criterion2_and_8() {
  auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2024);
  int disagreements = 0, bad_certs = 0, implication_violations = 0;
  for (int trial = 0; trial < 100; ++trial) {
    IntervalModel im = random_interval_model(rng);
    auto intervals = oracle::bid_ask_ratio_intervals(im.model.tree, im.pi,
                                                     &im.exact);
    auto ps = find_consistent_price_system(im.model, true);
    bool lp_feasible = ps.has_value();
    bool oracle_feasible = oracle::interval_martingale_feasibility(
        im.model.tree, intervals, true);
    if (lp_feasible != oracle_feasible) ++disagreements;
    if (ps && !verify_price_system(im.model, *ps)) ++bad_certs;
    bool rna = check_robust_na(im.model).holds;
    bool na = check_na(im.model).holds;
    if (rna && !na) ++implication_violations;
  }
  double sec = elapsed_s(t0);
  bool pass2 = disagreements == 0 && bad_certs == 0 && sec < 60.0;
  report(2, pass2, "price-system existence matches the exact interval recursion",
         std::to_string(disagreements) + " disagreements, " +
             std::to_string(bad_certs) + " bad certificates, " +
             std::to_string(sec) + "s");

  // Gap fixture: intervals [0.9,1.0], [1.0,1.4], [1.0,1.2] touch at 1.0 only.
  EventTree t = binomial_tree(1);
  BidAskSpec spec;
  spec.pi = {bid_ask_pi2(1.0, 1.0 / 0.9), bid_ask_pi2(1.4, 1.0),
             bid_ask_pi2(1.2, 1.0)};
  MarketModel gap = from_bid_ask(t, spec);
  bool gap_na = check_na(gap).holds;
  bool gap_rna = check_robust_na(gap).holds;
  Criterion8Data c8;
  c8.pass = implication_violations == 0 && gap_na && !gap_rna;
  c8.detail = std::to_string(implication_violations) +
              " violations, fixture na=" + std::to_string(gap_na) +
              ", rna=" + std::to_string(gap_rna);
  return c8;
}

void criterion3() {
  auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> cv(-2.0, 2.0);
  std::uniform_real_distribution<double> su(0.05, 0.3);
  int bad = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    int d = 2 + int(rng() % 2);
    EventTree t = random_tree(rng, 1 + int(rng() % 3), 40, d);
    AdaptedVectorProcess s = random_martingale(t, d, rng);
    MarketModel m = trial < 50 ? martingale_bid_ask(t, s, d, su(rng))
                               : martingale_cost_process(t, s, d, rng);
    AdaptedVectorProcess c = AdaptedVectorProcess::zero(t);
    for (int leaf : t.leaves())
      c.at(leaf) = Eigen::VectorXd::NullaryExpr(d, [&](int) { return cv(rng); });
    SuperhedgeResult res = superhedge_premium(m, c, 0, {.diagnose_arbitrage = false});
    if (res.status != SuperhedgeResult::Status::Optimal) { ++bad; continue; }
    double cross = dual_crossing_alpha(m, c, 0);
    double err = std::abs(cross - res.alpha);
    worst = std::max(worst, err);
    if (!(err <= 1e-6)) ++bad;
  }
  double sec = elapsed_s(t0);
  bool pass = bad == 0 && sec < 300.0;
  report(3, pass, "primal premium equals the dual zero-crossing",
         std::to_string(bad) + " failures, worst gap " + std::to_string(worst) +
             ", " + std::to_string(sec) + "s");
}

void criterion4() {
  auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> cv(-2.0, 2.0);
  std::uniform_real_distribution<double> wu(0.0, 0.25);
  std::uniform_real_distribution<double> mu(0.8, 1.25);
  int bad = 0;
  double worst = 0.0;
  std::atomic<int> next{0};
  std::mutex mtx;
  // Pre-generate instances so the RNG stream is deterministic.
  struct Inst { MarketModel m; std::map<int, Eigen::VectorXd> claim; };
  std::vector<Inst> insts;
  for (int trial = 0; trial < 200; ++trial) {
    int k = 1 + int(rng() % 3);
    std::vector<RawTreeNode> raw{{0, std::nullopt, 0, 1.0, Rational{1, 1}}};
    for (int j = 0; j < k; ++j)
      raw.push_back({j + 1, 0, 1, 1.0 / k, Rational{1, k}});
    EventTree t = EventTree::validate(raw, 2);
    BidAskSpec spec;
    for (int n = 0; n < t.node_count(); ++n) {
      // every ratio interval contains [1, 1.05]: robust NA by construction
      double lo = std::min(1.0, mu(rng)) - wu(rng);
      double hi = std::max(1.05, mu(rng)) + wu(rng);
      spec.pi.push_back(bid_ask_pi2(hi, 1.0 / lo));
    }
    Inst inst;
    inst.m = from_bid_ask(t, spec);
    for (int leaf : t.leaves())
      inst.claim[leaf] = Eigen::Vector2d(cv(rng), cv(rng));
    insts.push_back(std::move(inst));
  }
  unsigned nthreads = std::max(2u, std::thread::hardware_concurrency());
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < nthreads; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < 200; i = next++) {
        const Inst& inst = insts[i];
        AdaptedVectorProcess c = AdaptedVectorProcess::zero(inst.m.tree);
        for (const auto& [leaf, v] : inst.claim) c.at(leaf) = v;
        SuperhedgeResult res =
            superhedge_premium(inst.m, c, 0, {.diagnose_arbitrage = false});
        double brute =
            oracle::brute_superhedge_one_period(inst.m, inst.claim, 0);
        double lp_alpha = std::max(res.alpha, 0.0);  // oracle clamps at zero
        double err = std::abs(lp_alpha - brute);
        std::lock_guard<std::mutex> lk(mtx);
        worst = std::max(worst, err);
        if (res.status != SuperhedgeResult::Status::Optimal || !(err <= 2e-3))
          ++bad;
      }
    });
  }
  for (auto& th : pool) th.join();
  double sec = elapsed_s(t0);
  bool pass = bad == 0 && sec < 600.0;
  report(4, pass, "one-period premium matches the grid-search oracle",
         std::to_string(bad) + " failures, worst gap " + std::to_string(worst) +
             ", " + std::to_string(sec) + "s");
}

void criterion5() {
  MarketModel m = frictionless_binomial();
  AdaptedVectorProcess c = binomial_call(m.tree);
  double a1 = superhedge_premium(m, c, 0).alpha;

  // Same prices routed through explicit bid-ask matrices with unit spread
  // factor; must reproduce the premium.
  EventTree t = binomial_tree(1);
  BidAskSpec spec;
  const double k = 1.0;
  for (double s : {1.0, 2.0, 0.5})
    spec.pi.push_back(bid_ask_pi2(s * k, k / s));
  MarketModel m2 = from_bid_ask(t, spec);
  double a2 = superhedge_premium(m2, binomial_call(t), 0).alpha;

  bool pass = std::abs(a1 - 1.0 / 3.0) <= 1e-6 && std::abs(a2 - a1) <= 1e-6;
  report(5, pass, "binomial call premium is one third in both encodings",
         "alpha=" + std::to_string(a1) + ", perturbed=" + std::to_string(a2));
}

void criterion6() {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.8, 1.4);
  std::uniform_real_distribution<double> cv(-1.0, 1.0);
  int bad = 0;
  for (int trial = 0; trial < 100; ++trial) {
    EventTree t = random_tree(rng, 1 + int(rng() % 2), 15);
    MarketModel m;
    if (trial % 2 == 0) {
      BidAskSpec spec;
      for (int n = 0; n < t.node_count(); ++n)
        spec.pi.push_back(bid_ask_pi2(u(rng) * 1.2, 1.2 / u(rng)));
      m = from_bid_ask(t, spec);
    } else {
      std::vector<HPolyhedron> sets(t.node_count(),
                                    orthant_plus_polygon(8, 1.0));
      m = from_explicit(t, sets);
    }
    AdaptedVectorProcess c = AdaptedVectorProcess::zero(t);
    for (int n = 0; n < t.node_count(); ++n)
      c.at(n) = Eigen::Vector2d(cv(rng), cv(rng));
    bool direct = claim_in_A(m, c).member;
    bool agg = claim_in_AT(m, as_leaf_map(t, aggregate_to_leaves(t, c)));
    if (direct != agg) ++bad;
  }
  report(6, bad == 0, "payment processes aggregate to terminal claims",
         std::to_string(bad) + " mismatches");
}

void criterion7() {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> pu(0.0, 1.0);
  int bad = 0;
  // 250 cases per property, 1000 total.
  for (int trial = 0; trial < 250; ++trial) {
    int d = 2 + int(rng() % 2);
    // random cone from 2-4 generators
    VCone k;
    k.dim = d;
    int ng = 2 + int(rng() % 3);
    for (int g = 0; g < ng; ++g)
      k.rays.push_back(
          Eigen::VectorXd::NullaryExpr(d, [&](int) { return u(rng); }));

    // (a) bipolar round-trip: K** equals cl cone K as a set
    HPolyhedron polar = polar_cone(k);
    HPolyhedron bipolar = polar_cone(halfspaces_to_generators(polar));
    HPolyhedron k_h = generators_to_halfspaces(k);
    for (const auto& g : k.rays)
      if (!bipolar.contains(g, 1e-7)) ++bad;
    VCone bip_gens = halfspaces_to_generators(bipolar);
    for (const auto& r : bip_gens.rays)
      if (!k_h.contains(r, 1e-7)) ++bad;
    for (const auto& l : bip_gens.lines)
      if (!k_h.contains(l, 1e-7) || !k_h.contains(-l, 1e-7)) ++bad;

    // (b) recession idempotence on a random polyhedron
    Eigen::MatrixXd A = Eigen::MatrixXd::NullaryExpr(
        3 + int(rng() % 3), d, [&](int, int) { return u(rng); });
    Eigen::VectorXd b = Eigen::VectorXd::NullaryExpr(
        A.rows(), [&](int) { return 0.5 + pu(rng); });  // contains 0
    HPolyhedron poly{A, b};
    HPolyhedron rec = recession_cone(poly);
    HPolyhedron rec2 = recession_cone(rec);
    if ((rec.A - rec2.A).lpNorm<Eigen::Infinity>() > 0 ||
        rec2.b.lpNorm<Eigen::Infinity>() > 0)
      ++bad;

    // (c) support function positive homogeneity and sublinearity
    Eigen::VectorXd y1 =
        Eigen::VectorXd::NullaryExpr(d, [&](int) { return u(rng); });
    Eigen::VectorXd y2 =
        Eigen::VectorXd::NullaryExpr(d, [&](int) { return u(rng); });
    double s1 = support_function_value(poly, y1);
    double s2 = support_function_value(poly, y2);
    double ssum = support_function_value(poly, y1 + y2);
    double lam = 0.5 + 2.0 * pu(rng);
    double shom = support_function_value(poly, lam * y1);
    if (std::isfinite(s1) && std::isfinite(shom) &&
        std::abs(shom - lam * s1) > 1e-6 * (1.0 + std::abs(s1)))
      ++bad;
    if (std::isfinite(s1) && std::isfinite(s2) && std::isfinite(ssum) &&
        ssum > s1 + s2 + 1e-6)
      ++bad;

    // (d) relative-interior membership vs epsilon probes
    HPolyhedron cone{A, Eigen::VectorXd::Zero(A.rows())};
    Eigen::VectorXd y =
        Eigen::VectorXd::NullaryExpr(d, [&](int) { return u(rng); });
    bool ri = relative_interior_membership(cone, y);
    if (ri) {
      // probe: y must satisfy every non-implicit row with strict slack
      auto imp = implicit_rows(cone);
      for (int r = 0; r < cone.rows(); ++r) {
        double v = cone.A.row(r).dot(y);
        if (imp[r] ? std::abs(v) > 1e-6 : v > -1e-8) ++bad;
      }
    }
  }
  report(7, bad == 0, "convex-geometry randomized properties hold",
         std::to_string(bad) + " failures over 1000 cases");
}

}  // namespace

int main() {
  criterion1();
  Criterion8Data c8 = criterion2_and_8();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  report(8, c8.pass,
         "robust no-arbitrage implies no-arbitrage; touching chain shows the "
         "converse fails",
         c8.detail);
  return g_failures == 0 ? 0 : 1;
}
