#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "illiq/market.hpp"
#include "illiq/oracle.hpp"
#include "illiq/tree.hpp"

namespace illiq {

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

struct ModelFile {
  MarketModel model;
  // Bid-ask extras for the interval oracle: exact rational (pi12, pi21) when
  // the input carried "p/q" strings.
  std::vector<std::optional<std::pair<Rational, Rational>>> exact_bid_ask;
  std::vector<Eigen::MatrixXd> bid_ask_pi;  // per node, bid_ask kind only
  std::string raw;  // original bytes, for the report digest
};

// Top-level schema: {"d": int, "tree": {"nodes": [...]}, "model": {...}}.
// Numbers may be floats or "p/q" rational strings.
ModelFile load_model_file(const std::string& path);
ModelFile parse_model_json(const std::string& text);

// {"<node id>": [v_1..v_d]}; missing nodes default to zero.
AdaptedVectorProcess parse_process_json(const EventTree& tree, int d,
                                        const std::string& text);
AdaptedVectorProcess load_process_file(const EventTree& tree, int d,
                                       const std::string& path);

nlohmann::json process_to_json(const EventTree& tree,
                               const AdaptedVectorProcess& proc);
AdaptedVectorProcess process_from_json(const EventTree& tree, int d,
                                       const nlohmann::json& j);

// FNV-1a over the raw bytes, hex-encoded.
std::string content_digest(const std::string& bytes);

std::string read_file(const std::string& path);

}  // namespace illiq
