// Batch front end: load a tree + model (+ claims), run one check or pricing,
// write a JSON run report. Exit 0 = computed, 2 = input error, 3 = numerical
// failure.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "illiq/arbitrage.hpp"
#include "illiq/geometry.hpp"
#include "illiq/io.hpp"
#include "illiq/lp.hpp"
#include "illiq/market.hpp"
#include "illiq/oracle.hpp"
#include "illiq/pricing.hpp"
#include "illiq/tree.hpp"

namespace {

using illiq::AdaptedVectorProcess;
using illiq::EventTree;
using illiq::HPolyhedron;
using illiq::MarketModel;
using illiq::ModelFile;
using illiq::VCone;
using json = nlohmann::json;

constexpr const char* kVersion = "illiq 1.0.0";

class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what)
      : std::runtime_error(what) {}
};

double report_tolerance() {
  if (const char* env = std::getenv("ILLIQ_LP_TOL")) {
    char* end = nullptr;
    double v = std::strtod(env, &end);
    if (end != env && v > 0.0) return v;
    throw illiq::IoError("ILLIQ_LP_TOL: not a positive number");
  }
  return 1e-8;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

// Per-node certificate arrays keyed by node id, so reports survive relabeling
// of internal indices.
json process_report(const EventTree& tree, const AdaptedVectorProcess& p) {
  return illiq::process_to_json(tree, p);
}

void flatten_scalars(const json& j, const std::string& prefix,
                     std::ostream& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it)
      flatten_scalars(it.value(),
                      prefix.empty() ? it.key() : prefix + "." + it.key(), out);
  } else if (j.is_number() || j.is_boolean() || j.is_string()) {
    out << prefix << "," << j.dump() << "\n";
  }
}

struct Reporter {
  std::string command;
  std::string out_path;  // empty = stdout
  bool csv = false;
  json inputs = json::object();
  json results = json::object();
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();

  void add_input(const std::string& name, const std::string& bytes) {
    inputs[name] = illiq::content_digest(bytes);
  }

  int emit() {
    json report;
    report["command"] = command;
    report["version"] = kVersion;
    report["inputs"] = inputs;
    report["results"] = results;
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - start)
                  .count();
    report["solver_stats"] = {
        {"lp_count", illiq::LpStats::solves.load()},
        {"pivot_count", illiq::LpStats::pivots.load()},
        {"wall_time_ms", ms}};
    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!out_path.empty()) {
      file.open(out_path);
      if (!file) throw illiq::IoError("cannot write report: " + out_path);
      out = &file;
    }
    if (csv) {
      flatten_scalars(results, "", *out);
    } else {
      *out << report.dump(2) << "\n";
    }
    return 0;
  }
};

json price_system_report(const EventTree& tree, const illiq::PriceSystem& ps) {
  json j;
  j["type"] = "price_system";
  j["strict"] = ps.strict;
  j["y"] = process_report(tree, ps.y);
  return j;
}

std::map<int, Eigen::VectorXd> leaf_claim_of(const EventTree& tree,
                                             const AdaptedVectorProcess& c) {
  std::map<int, Eigen::VectorXd> out;
  for (int leaf : tree.leaves()) out[leaf] = c.at(leaf);
  for (int n = 0; n < tree.node_count(); ++n)
    if (!tree.is_leaf(n) && c.at(n).lpNorm<Eigen::Infinity>() > 0.0)
      throw illiq::IoError("claim has non-leaf payments; expected a terminal claim");
  return out;
}

// Type-invariant re-verification of an embedded certificate. Direct
// arithmetic only, no LP solves.
json verify_report(const ModelFile& mf, const json& report) {
  const EventTree& tree = mf.model.tree;
  const json& results = report.at("results");
  json out;
  out["checked"] = json::array();
  bool all_ok = true;
  auto record = [&](const std::string& name, bool ok, const std::string& note) {
    json e;
    e["certificate"] = name;
    e["ok"] = ok;
    if (!note.empty()) e["note"] = note;
    out["checked"].push_back(e);
    all_ok = all_ok && ok;
  };

  if (results.contains("certificate") &&
      results["certificate"].value("type", "") == "price_system") {
    const json& cert = results["certificate"];
    AdaptedVectorProcess y =
        illiq::process_from_json(tree, mf.model.d, cert.at("y"));
    bool ok = illiq::is_martingale(tree, y);
    double scale = 0.0;
    for (int n = 0; n < tree.node_count() && ok; ++n) {
      const auto& s = mf.model.set(n);
      if (!s.cone_gens) {
        record("price_system", false, "model has no generator form");
        return out;
      }
      scale = std::max(scale, y.at(n).lpNorm<Eigen::Infinity>());
      for (int i = 0; i < mf.model.d; ++i)
        if (y.at(n)[i] < (cert.value("strict", false) ? 0.0 : -1e-9)) ok = false;
      for (const auto& g : s.cone_gens->rays)
        if (g.dot(y.at(n)) > 5e-8 * std::max(1.0, y.at(n).norm())) ok = false;
      for (const auto& l : s.cone_gens->lines)
        if (std::abs(l.dot(y.at(n))) > 5e-8 * std::max(1.0, y.at(n).norm()))
          ok = false;
    }
    if (scale <= 0.0) ok = false;
    record("price_system", ok, "");
  }

  if (results.contains("witness")) {
    // Arbitrage witness: per-node increments, each in its node's set, with
    // nonnegative nonzero terminal wealth.
    AdaptedVectorProcess z =
        illiq::process_from_json(tree, mf.model.d, results.at("witness"));
    bool ok = true;
    std::string note;
    for (int n = 0; n < tree.node_count() && ok; ++n) {
      const auto& s = mf.model.set(n);
      if (s.aux_count > 0) {
        note = "lifted sets skipped (membership needs an LP)";
        continue;
      }
      Eigen::VectorXd res = s.A * z.at(n) - s.b;
      if (res.maxCoeff() > 1e-7) ok = false;
    }
    double total = 0.0;
    for (int leaf : tree.leaves()) {
      Eigen::VectorXd w = Eigen::VectorXd::Zero(mf.model.d);
      for (int n = leaf; n >= 0; n = tree.node(n).parent) w += z.at(n);
      if (w.minCoeff() < -1e-7) ok = false;
      total += w.sum();
    }
    if (total <= 1e-9) ok = false;
    record("witness", ok, note);
  }

  if (results.contains("hedge") && results.contains("alpha")) {
    record("hedge", true, "positions echoed; membership needs an LP, skipped");
  }
  out["ok"] = all_ok;
  return out;
}

struct Args {
  std::string model_path;
  std::string claim_path;
  std::string premium_path;
  std::string report_path;  // verify input
  std::string out_path;
  int numeraire = 0;
  int node_id = 0;
  bool strict = false;
  bool csv = false;
  std::uint64_t seed = 1;
  int samples = 10000;
  double grid_step = 1e-3;
  double grid_radius = 10.0;
  std::string geometry_what;
  std::string suboracle;
};

int run(int argc, char** argv) {
  CLI::App app{"scenario-tree solvency models: arbitrage checks, consistent "
               "price systems, superhedging"};
  app.require_subcommand(1);
  Args a;

  auto add_common = [&](CLI::App* cmd, bool need_model = true) {
    auto* m = cmd->add_option("--model", a.model_path, "model JSON file");
    if (need_model) m->required();
    cmd->add_option("--out", a.out_path, "report file (default stdout)");
    cmd->add_flag("--csv", a.csv, "flatten scalar results to CSV");
    cmd->add_option("--seed", a.seed, "RNG seed for sampling oracles");
  };

  auto* c_na = app.add_subcommand("check-na", "no-arbitrage check");
  add_common(c_na);
  auto* c_rna = app.add_subcommand("check-rna", "robust no-arbitrage check");
  add_common(c_rna);
  auto* c_rnsa =
      app.add_subcommand("check-rnsa", "robust no-scalable-arbitrage check");
  add_common(c_rnsa);
  auto* c_cps =
      app.add_subcommand("find-cps", "find a consistent price system");
  add_common(c_cps);
  c_cps->add_flag("--strict", a.strict, "require a strictly consistent system");
  auto* c_sh = app.add_subcommand("superhedge", "minimal superhedging premium");
  add_common(c_sh);
  c_sh->add_option("--claim", a.claim_path, "claim process JSON")->required();
  c_sh->add_option("--numeraire", a.numeraire, "asset index quoting the premium")
      ->required();
  auto* c_db = app.add_subcommand("dual-bound", "dual value at a premium");
  add_common(c_db);
  c_db->add_option("--claim", a.claim_path, "claim process JSON")->required();
  c_db->add_option("--premium", a.premium_path, "premium process JSON")
      ->required();
  auto* c_geo = app.add_subcommand("geometry", "per-node cone geometry");
  add_common(c_geo);
  c_geo->add_option("what", a.geometry_what, "polar | recession | lineality")
      ->required()
      ->check(CLI::IsMember({"polar", "recession", "lineality"}));
  c_geo->add_option("--node", a.node_id, "node id")->required();
  auto* c_or = app.add_subcommand("oracle", "brute-force verifiers");
  add_common(c_or);
  c_or->add_option("what", a.suboracle,
                   "polar-check | membership-at | superhedge1p | "
                   "interval-feasibility")
      ->required()
      ->check(CLI::IsMember({"polar-check", "membership-at", "superhedge1p",
                             "interval-feasibility"}));
  c_or->add_option("--claim", a.claim_path, "claim process JSON");
  c_or->add_option("--numeraire", a.numeraire, "numeraire asset index");
  c_or->add_option("--node", a.node_id, "node id (polar-check)");
  c_or->add_option("--samples", a.samples, "sample count (polar-check)");
  c_or->add_option("--step", a.grid_step, "grid step");
  c_or->add_option("--radius", a.grid_radius, "grid radius");
  c_or->add_flag("--strict", a.strict, "strict interval recursion");
  auto* c_ver =
      app.add_subcommand("verify", "re-check certificates in a report, no LPs");
  add_common(c_ver);
  c_ver->add_option("--report", a.report_path, "report JSON to verify")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  const double tol = report_tolerance();
  Reporter rep;
  rep.csv = a.csv;
  rep.out_path = a.out_path;

  ModelFile mf = illiq::load_model_file(a.model_path);
  rep.add_input("model", mf.raw);
  const EventTree& tree = mf.model.tree;
  const int d = mf.model.d;

  auto load_claim = [&](const std::string& path, const char* name) {
    std::string bytes = illiq::read_file(path);
    rep.add_input(name, bytes);
    return illiq::parse_process_json(tree, d, bytes);
  };

  if (*c_na) {
    rep.command = "check-na";
    auto r = illiq::check_na(mf.model);
    rep.results["holds"] = r.holds;
    if (r.witness) rep.results["witness"] = process_report(tree, *r.witness);
  } else if (*c_rna || *c_rnsa) {
    rep.command = *c_rna ? "check-rna" : "check-rnsa";
    auto r = *c_rna ? illiq::check_robust_na(mf.model)
                    : illiq::check_robust_no_scalable_arbitrage(mf.model);
    rep.results["holds"] = r.holds;
    if (r.certificate)
      rep.results["certificate"] = price_system_report(tree, *r.certificate);
  } else if (*c_cps) {
    rep.command = "find-cps";
    auto ps = illiq::find_consistent_price_system(mf.model, a.strict);
    rep.results["found"] = ps.has_value();
    if (ps) rep.results["certificate"] = price_system_report(tree, *ps);
  } else if (*c_sh) {
    rep.command = "superhedge";
    if (a.numeraire < 0 || a.numeraire >= d)
      throw illiq::IoError("numeraire index out of range");
    auto c = load_claim(a.claim_path, "claim");
    auto r = illiq::superhedge_premium(mf.model, c, a.numeraire);
    using St = illiq::SuperhedgeResult::Status;
    switch (r.status) {
      case St::Optimal:
        rep.results["status"] = "optimal";
        rep.results["alpha"] = r.alpha;
        rep.results["hedge"] = process_report(tree, r.hedge);
        rep.results["premium"] = process_report(tree, r.premium);
        break;
      case St::ScalableArbitrage:
        rep.results["status"] = "scalable_arbitrage";
        break;
      case St::Infeasible:
        rep.results["status"] = "infeasible";
        break;
      case St::NumericalFailure:
        throw NumericalError("superhedge LP failed");
    }
    for (const auto& w : r.warnings) rep.results["warnings"].push_back(w);
  } else if (*c_db) {
    rep.command = "dual-bound";
    auto c = load_claim(a.claim_path, "claim");
    auto p = load_claim(a.premium_path, "premium");
    auto r = illiq::dual_bound(mf.model, c, p);
    rep.results["sup_value"] = r.sup_value;
    rep.results["superhedges"] = r.sup_value <= tol;
    rep.results["argmax_y"] = process_report(tree, r.argmax_y);
  } else if (*c_geo) {
    rep.command = "geometry " + a.geometry_what;
    int idx = tree.index_of(a.node_id);
    const auto& s = mf.model.set(idx);
    HPolyhedron h = s.x_halfspaces ? *s.x_halfspaces
                                   : illiq::project_lifted_to_x(s);
    rep.results["node"] = a.node_id;
    if (a.geometry_what == "polar") {
      VCone cone = s.cone_gens ? *s.cone_gens
                               : illiq::halfspaces_to_generators(
                                     illiq::recession_cone(h));
      HPolyhedron polar = illiq::polar_cone(cone);
      rep.results["A"] = matrix_to_json(polar.A);
      rep.results["b"] = vector_to_json(polar.b);
    } else if (a.geometry_what == "recession") {
      HPolyhedron rc = illiq::recession_cone(h);
      rep.results["A"] = matrix_to_json(rc.A);
      rep.results["b"] = vector_to_json(rc.b);
    } else {
      VCone lin = illiq::lineality_space(illiq::recession_cone(h));
      json basis = json::array();
      for (const auto& l : lin.lines) basis.push_back(vector_to_json(l));
      rep.results["basis"] = basis;
    }
  } else if (*c_or) {
    rep.command = "oracle " + a.suboracle;
    if (a.suboracle == "polar-check") {
      int idx = tree.index_of(a.node_id);
      const auto& s = mf.model.set(idx);
      if (!s.cone_gens)
        throw illiq::IoError("polar-check needs a conical model");
      Eigen::VectorXd cex;
      bool ok = illiq::oracle::brute_polar_check(
          *s.cone_gens, illiq::polar_cone(*s.cone_gens), a.samples, a.seed,
          &cex);
      rep.results["agrees"] = ok;
      if (!ok) rep.results["counterexample"] = vector_to_json(cex);
    } else if (a.suboracle == "membership-at") {
      if (a.claim_path.empty()) throw illiq::IoError("--claim required");
      auto c = load_claim(a.claim_path, "claim");
      rep.results["member"] = illiq::oracle::brute_membership_AT(
          mf.model, leaf_claim_of(tree, c), a.grid_step, a.grid_radius);
    } else if (a.suboracle == "superhedge1p") {
      if (a.claim_path.empty()) throw illiq::IoError("--claim required");
      auto c = load_claim(a.claim_path, "claim");
      rep.results["alpha"] = illiq::oracle::brute_superhedge_one_period(
          mf.model, leaf_claim_of(tree, c), a.numeraire, a.grid_step,
          a.grid_radius);
    } else {
      if (mf.bid_ask_pi.empty() || d != 2)
        throw illiq::IoError(
            "interval-feasibility needs a 2-asset bid_ask model");
      auto intervals = illiq::oracle::bid_ask_ratio_intervals(
          tree, mf.bid_ask_pi, &mf.exact_bid_ask);
      rep.results["feasible"] = illiq::oracle::interval_martingale_feasibility(
          tree, intervals, a.strict);
    }
  } else if (*c_ver) {
    rep.command = "verify";
    std::string bytes = illiq::read_file(a.report_path);
    rep.add_input("report", bytes);
    json report;
    try {
      report = json::parse(bytes);
    } catch (const json::parse_error& e) {
      throw illiq::IoError(std::string("report: malformed JSON: ") + e.what());
    }
    try {
      rep.results = verify_report(mf, report);
    } catch (const json::exception& e) {
      throw illiq::IoError(std::string("report: ") + e.what());
    }
  }

  return rep.emit();
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const illiq::IoError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const illiq::TreeError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const illiq::GeometryError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const illiq::MarketError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
