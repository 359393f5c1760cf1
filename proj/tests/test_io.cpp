#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "illiq/io.hpp"

using namespace illiq;

namespace {

const char* kBinomialJson = R"({
  "d": 2,
  "tree": {"nodes": [
    {"id": 0, "parent": null, "time": 0, "p": 1},
    {"id": 1, "parent": 0, "time": 1, "p": "1/2"},
    {"id": 2, "parent": 0, "time": 1, "p": "1/2"}
  ]},
  "model": {"kind": "bid_ask", "per_node": {
    "0": {"pi": [[1, 1], [1, 1]]},
    "1": {"pi": [[1, 2], ["1/2", 1]]},
    "2": {"pi": [[1, "1/2"], [2, 1]]}
  }}
})";

}  // namespace

TEST_CASE("bid-ask model parses with rational strings") {
  ModelFile mf = parse_model_json(kBinomialJson);
  CHECK(mf.model.d == 2);
  CHECK(mf.model.conical);
  CHECK(mf.model.tree.node_count() == 3);
  CHECK(mf.model.tree.node(mf.model.tree.index_of(1)).cond_prob ==
        doctest::Approx(0.5));
  REQUIRE(mf.bid_ask_pi.size() == 3);
  CHECK(mf.bid_ask_pi[mf.model.tree.index_of(1)](0, 1) == doctest::Approx(2.0));
  // exact rationals survive when both off-diagonal entries are strings
  auto& exact = mf.exact_bid_ask[mf.model.tree.index_of(2)];
  REQUIRE(exact);
  CHECK(exact->first.num == 1);
  CHECK(exact->first.den == 2);
}

TEST_CASE("malformed JSON and schema violations") {
  CHECK_THROWS_WITH_AS(parse_model_json("{"), doctest::Contains("malformed"),
                       IoError);
  CHECK_THROWS_WITH_AS(parse_model_json("{\"d\": 2}"),
                       doctest::Contains("missing field 'tree'"), IoError);
  std::string bad_kind = kBinomialJson;
  bad_kind.replace(bad_kind.find("bid_ask"), 7, "magical");
  CHECK_THROWS_WITH_AS(parse_model_json(bad_kind),
                       doctest::Contains("unknown model kind"), IoError);
  std::string bad_prob = kBinomialJson;
  bad_prob.replace(bad_prob.find("\"1/2\""), 5, "\"2/5\"");
  CHECK_THROWS_WITH_AS(parse_model_json(bad_prob),
                       doctest::Contains("child-probability sum"), IoError);
  std::string zero_den = kBinomialJson;
  zero_den.replace(zero_den.find("\"1/2\""), 5, "\"1/0\"");
  CHECK_THROWS_WITH_AS(parse_model_json(zero_den),
                       doctest::Contains("zero denominator"), IoError);
}

TEST_CASE("explicit polyhedra and cost process kinds") {
  const char* expl = R"({
    "d": 2,
    "tree": {"nodes": [{"id": 7, "time": 0, "p": 1}]},
    "model": {"kind": "explicit_polyhedra", "per_node": {
      "7": {"A": [[1, 0], [0, 1]], "b": [0, 0]}
    }}
  })";
  ModelFile mf = parse_model_json(expl);
  CHECK(mf.model.conical);
  CHECK(mf.model.set(0).contains(Eigen::Vector2d(-1, -1)));

  const char* cost = R"({
    "d": 2,
    "tree": {"nodes": [{"id": 0, "time": 0, "p": 1}]},
    "model": {"kind": "cost_process", "per_node": {
      "0": {"pieces": [{"a": [1, 1], "b": 0}, {"a": [1, 2], "b": 0}]}
    }}
  })";
  ModelFile mc = parse_model_json(cost);
  CHECK(mc.model.set(0).contains(Eigen::Vector2d(2, -2)));
  CHECK_FALSE(mc.model.set(0).contains(Eigen::Vector2d(2, -1.5)));
}

TEST_CASE("currency model kind") {
  const char* cur = R"({
    "d": 2,
    "tree": {"nodes": [{"id": 0, "time": 0, "p": 1}]},
    "model": {"kind": "currency_costs", "per_node": {
      "0": {"costs": [[null, [{"slope": 1, "offset": 0}]],
                      [[{"slope": 2, "offset": 0}], null]]}
    }}
  })";
  // a missing off-diagonal cost is rejected
  std::string missing = cur;
  const std::string piece = "[{\"slope\": 1, \"offset\": 0}]";
  missing.replace(missing.find(piece), piece.size(), "null");
  CHECK_THROWS_AS(parse_model_json(missing), IoError);

  ModelFile mf = parse_model_json(cur);
  CHECK(mf.model.kind == MarketModel::Kind::CurrencyCosts);
  CHECK(mf.model.set(0).contains(Eigen::Vector2d(-2, 2)));
  CHECK_FALSE(mf.model.set(0).contains(Eigen::Vector2d(-2, 2.1)));
}

TEST_CASE("process round trip") {
  ModelFile mf = parse_model_json(kBinomialJson);
  const EventTree& t = mf.model.tree;
  AdaptedVectorProcess p =
      parse_process_json(t, 2, R"({"1": [1.5, -2], "2": ["1/4", 0]})");
  CHECK(p.at(t.index_of(0)).isZero());
  CHECK(p.at(t.index_of(1))[0] == doctest::Approx(1.5));
  CHECK(p.at(t.index_of(2))[0] == doctest::Approx(0.25));
  AdaptedVectorProcess back = process_from_json(t, 2, process_to_json(t, p));
  for (int n = 0; n < t.node_count(); ++n)
    CHECK((back.at(n) - p.at(n)).norm() == 0.0);

  CHECK_THROWS_WITH_AS(parse_process_json(t, 2, R"({"9": [0, 0]})"),
                       doctest::Contains("unknown node id"), IoError);
  CHECK_THROWS_WITH_AS(parse_process_json(t, 2, R"({"1": [0]})"),
                       doctest::Contains("length 2"), IoError);
}

TEST_CASE("content digest is deterministic and content-sensitive") {
  CHECK(content_digest("abc") == content_digest("abc"));
  CHECK(content_digest("abc") != content_digest("abd"));
  CHECK(content_digest("").size() == 16);
}
