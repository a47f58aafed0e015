#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bginv/mining.hpp"

namespace bginv {

struct OntologyEdge {
  KeywordId from = 0;
  KeywordId to = 0;
  double confidence = 0.0;
  std::uint64_t count = 0;

  friend bool operator==(const OntologyEdge&, const OntologyEdge&) = default;
};

/// Two aggregates closer than this (relative) are treated as equal when
/// breaking path ties, so products taken in different association orders
/// agree.
inline constexpr double kAggregateTolerance = 1e-12;

inline bool aggregate_equal(double a, double b) {
  return std::abs(a - b) <= kAggregateTolerance * std::max(std::abs(a), std::abs(b));
}

/// Directed keyword graph weighted by rule confidence. Out-edges of each node
/// are sorted by target id.
class Ontology {
 public:
  Ontology() = default;

  explicit Ontology(std::vector<std::string> keywords) : keywords_(std::move(keywords)), out_(keywords_.size()) {}

  const std::vector<std::string>& keyword_table() const { return keywords_; }
  std::size_t size() const { return keywords_.size(); }

  std::optional<KeywordId> find_keyword(std::string_view raw) const {
    const std::string norm = normalize_keyword(raw);
    for (std::size_t i = 0; i < keywords_.size(); ++i)
      if (keywords_[i] == norm) return static_cast<KeywordId>(i);
    return std::nullopt;
  }

  KeywordId keyword_id(std::string_view raw) const {
    auto id = find_keyword(raw);
    if (!id) throw Error("unknown keyword '" + std::string(raw) + "'");
    return *id;
  }

  void add_edge(const OntologyEdge& e) {
    check(e.from);
    check(e.to);
    if (e.from == e.to) throw Error("self-edge on '" + keywords_[e.from] + "'");
    if (!(e.confidence > 0.0) || e.confidence > 1.0) throw Error("edge confidence outside (0, 1]");
    auto& adj = out_[e.from];
    auto it = std::lower_bound(adj.begin(), adj.end(), e.to, [](const OntologyEdge& x, KeywordId t) { return x.to < t; });
    if (it != adj.end() && it->to == e.to) throw Error("duplicate edge");
    adj.insert(it, e);
    ++edge_count_;
  }

  const std::vector<OntologyEdge>& out_edges(KeywordId k) const {
    check(k);
    return out_[k];
  }

  std::size_t edge_count() const { return edge_count_; }

  std::vector<OntologyEdge> edges() const {
    std::vector<OntologyEdge> all;
    for (const auto& adj : out_) all.insert(all.end(), adj.begin(), adj.end());
    return all;
  }

  void check(KeywordId k) const {
    if (k >= keywords_.size()) throw Error("keyword id " + std::to_string(k) + " out of range");
  }

 private:
  std::vector<std::string> keywords_;
  std::vector<std::vector<OntologyEdge>> out_;
  std::size_t edge_count_ = 0;
};

inline Ontology build_ontology(const ConfidenceTable& table, std::vector<std::string> keywords,
                               double min_confidence) {
  if (!(min_confidence >= 0.0) || min_confidence >= 1.0) throw Error("min_confidence must lie in [0, 1)");
  Ontology onto(std::move(keywords));
  for (const auto& [p, rule] : table.entries)
    if (rule.confidence >= min_confidence) onto.add_edge({p.first, p.second, rule.confidence, rule.pair_count});
  return onto;
}

struct PathResult {
  std::size_t hops = 0;
  double aggregate = 1.0;
  std::vector<KeywordId> path;
};

/// Hop distances and best (max-product) aggregates from one source over
/// min-hop paths. Unreachable nodes carry hops = npos.
struct SourceTable {
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> hops;
  std::vector<double> aggregate;

  bool reachable(KeywordId k) const { return hops[k] != npos; }
};

/// BFS layering then a forward max-product pass over the min-hop DAG.
inline SourceTable single_source(const Ontology& onto, KeywordId from) {
  onto.check(from);
  SourceTable t;
  t.hops.assign(onto.size(), SourceTable::npos);
  t.aggregate.assign(onto.size(), 0.0);
  std::vector<KeywordId> order;
  order.reserve(onto.size());
  t.hops[from] = 0;
  t.aggregate[from] = 1.0;
  order.push_back(from);
  for (std::size_t head = 0; head < order.size(); ++head) {
    const KeywordId u = order[head];
    for (const auto& e : onto.out_edges(u)) {
      if (t.hops[e.to] == SourceTable::npos) {
        t.hops[e.to] = t.hops[u] + 1;
        order.push_back(e.to);
      }
    }
  }
  // BFS order is a topological order of the layered DAG.
  for (const KeywordId u : order)
    for (const auto& e : onto.out_edges(u))
      if (t.hops[e.to] == t.hops[u] + 1) t.aggregate[e.to] = std::max(t.aggregate[e.to], t.aggregate[u] * e.confidence);
  return t;
}

/// Shortest path ordered by (fewest hops, largest confidence product,
/// lexicographically smallest keyword-id sequence). Absent when unreachable.
inline std::optional<PathResult> shortest_path(const Ontology& onto, KeywordId from, KeywordId to) {
  onto.check(from);
  onto.check(to);
  if (from == to) return PathResult{0, 1.0, {from}};

  const SourceTable fwd = single_source(onto, from);
  if (!fwd.reachable(to)) return std::nullopt;
  const std::size_t total = fwd.hops[to];

  // best_to_target[v]: max product from v to `to` staying on min-hop paths.
  // Nodes on such paths satisfy hops[v] + remaining(v) == total.
  std::vector<double> best(onto.size(), 0.0);
  std::vector<std::vector<KeywordId>> layers(total + 1);
  for (KeywordId v = 0; v < onto.size(); ++v)
    if (fwd.reachable(v) && fwd.hops[v] <= total) layers[fwd.hops[v]].push_back(v);
  best[to] = 1.0;
  for (std::size_t layer = total; layer-- > 0;) {
    for (KeywordId u : layers[layer])
      for (const auto& e : onto.out_edges(u))
        if (fwd.hops[e.to] == layer + 1 && best[e.to] > 0.0) best[u] = std::max(best[u], e.confidence * best[e.to]);
  }

  PathResult res;
  res.hops = total;
  res.path.push_back(from);
  KeywordId cur = from;
  double agg = 1.0;
  while (cur != to) {
    const OntologyEdge* pick = nullptr;
    for (const auto& e : onto.out_edges(cur)) {  // ascending id => lexicographic tie-break
      if (fwd.hops[e.to] != fwd.hops[cur] + 1 || best[e.to] <= 0.0) continue;
      if (aggregate_equal(e.confidence * best[e.to], best[cur])) {
        pick = &e;
        break;
      }
    }
    if (!pick) throw Error("internal: path reconstruction failed");
    agg *= pick->confidence;
    cur = pick->to;
    res.path.push_back(cur);
  }
  res.aggregate = agg;
  return res;
}

/// Level-wise keyword expansion. levels[0] is the seed set; frontiers[i]
/// holds the keywords first reached at level i (frontiers[0] == seed).
struct ExpansionSet {
  std::vector<std::vector<KeywordId>> levels;
  std::vector<std::vector<KeywordId>> frontiers;

  /// OL[i]; levels past the fixed point equal the last computed level.
  const std::vector<KeywordId>& level(std::size_t i) const { return levels[std::min(i, levels.size() - 1)]; }
  std::size_t computed_levels() const { return levels.size(); }
};

inline ExpansionSet expand(const Ontology& onto, std::vector<KeywordId> seed, std::size_t max_level) {
  for (KeywordId k : seed) onto.check(k);
  std::sort(seed.begin(), seed.end());
  seed.erase(std::unique(seed.begin(), seed.end()), seed.end());

  ExpansionSet out;
  std::vector<bool> included(onto.size(), false);
  for (KeywordId k : seed) included[k] = true;
  out.levels.push_back(seed);
  out.frontiers.push_back(seed);

  for (std::size_t i = 1; i <= max_level; ++i) {
    std::set<KeywordId> frontier;
    for (KeywordId u : out.levels.back())
      for (const auto& e : onto.out_edges(u))
        if (!included[e.to]) frontier.insert(e.to);
    if (frontier.empty()) break;  // fixed point
    std::vector<KeywordId> next = out.levels.back();
    for (KeywordId k : frontier) {
      included[k] = true;
      next.push_back(k);
    }
    std::sort(next.begin(), next.end());
    out.levels.push_back(std::move(next));
    out.frontiers.emplace_back(frontier.begin(), frontier.end());
  }
  return out;
}

inline json ontology_to_json(const Ontology& onto) {
  json j;
  j["keywords"] = onto.keyword_table();
  json edges = json::array();
  for (const auto& e : onto.edges())  // already sorted by (from, to)
    edges.push_back({{"from", e.from}, {"to", e.to}, {"confidence", e.confidence}, {"count", e.count}});
  j["edges"] = std::move(edges);
  return j;
}

inline Ontology ontology_from_json(const json& j) {
  Ontology onto(j.at("keywords").get<std::vector<std::string>>());
  for (const auto& e : j.at("edges"))
    onto.add_edge({e.at("from").get<KeywordId>(), e.at("to").get<KeywordId>(), e.at("confidence").get<double>(),
                   e.at("count").get<std::uint64_t>()});
  return onto;
}

inline Ontology load_ontology_file(const std::string& path) {
  try {
    return ontology_from_json(json::parse(read_text_file(path)));
  } catch (const json::exception& e) {
    throw Error(path + ": " + e.what());
  }
}

}  // namespace bginv
