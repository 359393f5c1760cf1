#include "illiq/io.hpp"

#include <fstream>
#include <sstream>

namespace illiq {

using nlohmann::json;

namespace {

// Accepts JSON numbers and "p/q" rational strings.
double parse_number(const json& j, const std::string& where,
                    std::optional<Rational>* exact = nullptr) {
  if (j.is_number()) {
    if (exact && j.is_number_integer())
      *exact = Rational{j.get<long long>(), 1};
    return j.get<double>();
  }
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    auto slash = s.find('/');
    try {
      if (slash == std::string::npos) return std::stod(s);
      long long p = std::stoll(s.substr(0, slash));
      long long q = std::stoll(s.substr(slash + 1));
      if (q == 0) throw IoError(where + ": zero denominator");
      if (exact) *exact = Rational{p, q};
      return static_cast<double>(p) / static_cast<double>(q);
    } catch (const IoError&) {
      throw;
    } catch (const std::exception&) {
      throw IoError(where + ": cannot parse number '" + s + "'");
    }
  }
  throw IoError(where + ": expected a number or \"p/q\" string");
}

Eigen::VectorXd parse_vector(const json& j, int d, const std::string& where) {
  if (!j.is_array() || static_cast<int>(j.size()) != d)
    throw IoError(where + ": expected an array of length " + std::to_string(d));
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i)
    v[i] = parse_number(j[i], where + "[" + std::to_string(i) + "]");
  return v;
}

const json& require(const json& j, const std::string& key,
                    const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw IoError(where + ": missing field '" + key + "'");
  return *it;
}

EventTree parse_tree(const json& j, int d) {
  const json& nodes = require(j, "nodes", "tree");
  if (!nodes.is_array() || nodes.empty())
    throw IoError("tree.nodes: expected a nonempty array");
  std::vector<RawTreeNode> raw;
  for (const auto& nj : nodes) {
    RawTreeNode n;
    n.id = require(nj, "id", "tree node").get<int>();
    if (nj.contains("parent") && !nj["parent"].is_null())
      n.parent = nj["parent"].get<int>();
    n.time = require(nj, "time", "tree node").get<int>();
    std::optional<Rational> exact;
    n.cond_prob = parse_number(require(nj, "p", "tree node"),
                               "tree node p", &exact);
    n.cond_prob_rat = exact;
    raw.push_back(n);
  }
  try {
    return EventTree::validate(raw, d);
  } catch (const TreeError& e) {
    throw IoError(std::string("tree: ") + e.what());
  }
}

const json& node_entry(const json& per_node, int id) {
  std::string key = std::to_string(id);
  auto it = per_node.find(key);
  if (it == per_node.end())
    throw IoError("model.per_node: missing entry for node " + key);
  return *it;
}

}  // namespace

ModelFile parse_model_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw IoError(std::string("malformed JSON: ") + e.what());
  }
  const int d = require(j, "d", "top level").get<int>();
  EventTree tree = parse_tree(require(j, "tree", "top level"), d);
  const json& mj = require(j, "model", "top level");
  const std::string kind = require(mj, "kind", "model").get<std::string>();
  const json& per_node = require(mj, "per_node", "model");

  ModelFile out;
  out.raw = text;
  out.exact_bid_ask.assign(tree.node_count(), std::nullopt);
  try {
    if (kind == "bid_ask") {
      BidAskSpec spec;
      for (int n = 0; n < tree.node_count(); ++n) {
        const json& e = node_entry(per_node, tree.node(n).id);
        const json& pij = require(e, "pi", "bid_ask node");
        Eigen::MatrixXd pi(d, d);
        std::optional<Rational> e12, e21;
        for (int i = 0; i < d; ++i) {
          if (!pij.is_array() || static_cast<int>(pij.size()) != d ||
              static_cast<int>(pij[i].size()) != d)
            throw IoError("pi: expected a " + std::to_string(d) + "x" +
                          std::to_string(d) + " matrix");
          for (int k = 0; k < d; ++k) {
            std::optional<Rational> ex;
            pi(i, k) = parse_number(pij[i][k], "pi entry", &ex);
            if (d == 2 && i == 0 && k == 1) e12 = ex;
            if (d == 2 && i == 1 && k == 0) e21 = ex;
          }
          pi(i, i) = 1.0;
        }
        if (e12 && e21) out.exact_bid_ask[n] = std::make_pair(*e12, *e21);
        spec.pi.push_back(pi);
      }
      out.bid_ask_pi = spec.pi;
      out.model = from_bid_ask(tree, spec);
    } else if (kind == "cost_process") {
      CostProcessSpec spec;
      for (int n = 0; n < tree.node_count(); ++n) {
        const json& e = node_entry(per_node, tree.node(n).id);
        const json& pieces = require(e, "pieces", "cost_process node");
        std::vector<PwlPiece> ps;
        for (const auto& pj : pieces) {
          PwlPiece p;
          p.a = parse_vector(require(pj, "a", "piece"), d, "piece.a");
          p.b = parse_number(require(pj, "b", "piece"), "piece.b");
          ps.push_back(std::move(p));
        }
        spec.pieces.push_back(std::move(ps));
      }
      out.model = from_cost_process(tree, spec);
    } else if (kind == "currency_costs") {
      CurrencyIlliquiditySpec spec;
      for (int n = 0; n < tree.node_count(); ++n) {
        const json& e = node_entry(per_node, tree.node(n).id);
        const json& costs = require(e, "costs", "currency node");
        std::vector<std::vector<std::vector<ScalarPiece>>> node(d);
        for (int i = 0; i < d; ++i) {
          node[i].resize(d);
          for (int k = 0; k < d; ++k) {
            if (i == k) continue;
            const json& cj = costs.at(i).at(k);
            if (cj.is_null()) throw IoError("currency costs: missing S^{ij}");
            for (const auto& pj : cj) {
              ScalarPiece p;
              p.slope = parse_number(require(pj, "slope", "piece"), "slope");
              p.offset = parse_number(require(pj, "offset", "piece"), "offset");
              node[i][k].push_back(p);
            }
          }
        }
        spec.costs.push_back(std::move(node));
      }
      out.model = from_currency_costs(tree, spec);
    } else if (kind == "explicit_polyhedra") {
      std::vector<HPolyhedron> sets;
      for (int n = 0; n < tree.node_count(); ++n) {
        const json& e = node_entry(per_node, tree.node(n).id);
        const json& Aj = require(e, "A", "polyhedron");
        const json& bj = require(e, "b", "polyhedron");
        const int m = static_cast<int>(Aj.size());
        HPolyhedron h{Eigen::MatrixXd(m, d), Eigen::VectorXd(m)};
        for (int r = 0; r < m; ++r) {
          h.A.row(r) = parse_vector(Aj[r], d, "A row").transpose();
          h.b[r] = parse_number(bj.at(r), "b entry");
        }
        sets.push_back(std::move(h));
      }
      out.model = from_explicit(tree, std::move(sets));
    } else {
      throw IoError("unknown model kind '" + kind + "'");
    }
  } catch (const MarketError& e) {
    throw IoError(std::string("model: ") + e.what());
  } catch (const json::exception& e) {
    throw IoError(std::string("model: ") + e.what());
  }
  return out;
}

ModelFile load_model_file(const std::string& path) {
  return parse_model_json(read_file(path));
}

AdaptedVectorProcess parse_process_json(const EventTree& tree, int d,
                                        const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw IoError(std::string("malformed JSON: ") + e.what());
  }
  return process_from_json(tree, d, j);
}

AdaptedVectorProcess process_from_json(const EventTree& tree, int d,
                                       const nlohmann::json& j) {
  AdaptedVectorProcess p = AdaptedVectorProcess::zero(tree);
  if (!j.is_object()) throw IoError("process: expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    int id;
    try {
      id = std::stoi(it.key());
    } catch (const std::exception&) {
      throw IoError("process: non-integer node id '" + it.key() + "'");
    }
    int idx;
    try {
      idx = tree.index_of(id);
    } catch (const TreeError& e) {
      throw IoError(std::string("process: ") + e.what());
    }
    p.at(idx) = parse_vector(it.value(), d, "process[" + it.key() + "]");
  }
  return p;
}

AdaptedVectorProcess load_process_file(const EventTree& tree, int d,
                                       const std::string& path) {
  return parse_process_json(tree, d, read_file(path));
}

nlohmann::json process_to_json(const EventTree& tree,
                               const AdaptedVectorProcess& proc) {
  json out = json::object();
  for (int n = 0; n < tree.node_count(); ++n) {
    json arr = json::array();
    for (int i = 0; i < proc.at(n).size(); ++i) arr.push_back(proc.at(n)[i]);
    out[std::to_string(tree.node(n).id)] = arr;
  }
  return out;
}

std::string content_digest(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace illiq
