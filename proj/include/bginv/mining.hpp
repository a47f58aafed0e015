#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "bginv/corpus.hpp"

namespace bginv {

using Transaction = KeywordSet;
using KeywordPair = std::pair<KeywordId, KeywordId>;  // first < second

/// Frequent singletons and pairs, stored as exact integer counts over
/// `total_images` transactions. Fractions are derived on demand.
struct SupportTable {
  std::uint64_t total_images = 0;
  std::map<KeywordId, std::uint64_t> singleton_count;
  std::map<KeywordPair, std::uint64_t> pair_count;

  double singleton_support(KeywordId k) const {
    return static_cast<double>(singleton_count.at(k)) / static_cast<double>(total_images);
  }
  double pair_support(KeywordId a, KeywordId b) const {
    if (a > b) std::swap(a, b);
    return static_cast<double>(pair_count.at({a, b})) / static_cast<double>(total_images);
  }
  bool has_pair(KeywordId a, KeywordId b) const {
    if (a > b) std::swap(a, b);
    return pair_count.count({a, b}) != 0;
  }

  friend bool operator==(const SupportTable&, const SupportTable&) = default;
};

/// Smallest integer count c with c / total >= min_support.
inline std::uint64_t min_count_for(double min_support, std::uint64_t total) {
  if (!(min_support > 0.0) || min_support > 1.0) throw Error("min_support must lie in (0, 1]");
  const double raw = min_support * static_cast<double>(total);
  auto c = static_cast<std::uint64_t>(std::ceil(raw - 1e-9 * std::max(1.0, raw)));
  return std::max<std::uint64_t>(c, 1);
}

/// Background-role keyword sets; only these feed mining.
inline std::vector<Transaction> background_transactions(const Corpus& corpus) {
  std::vector<Transaction> out;
  for (const auto& r : corpus.records())
    if (r.role == Role::background) out.push_back(r.keywords);
  if (out.empty()) throw Error("empty corpus: no background records to mine");
  return out;
}

namespace detail {

inline std::map<KeywordId, std::uint64_t> count_singletons(std::span<const Transaction> txns) {
  std::map<KeywordId, std::uint64_t> counts;
  for (const auto& t : txns)
    for (KeywordId k : t) ++counts[k];
  return counts;
}

inline void drop_below(std::map<KeywordId, std::uint64_t>& m, std::uint64_t min_count) {
  std::erase_if(m, [&](const auto& kv) { return kv.second < min_count; });
}

}  // namespace detail

/// Level-wise Apriori restricted to itemsets of size <= 2: frequent singletons
/// generate the candidate pairs, which one more scan counts.
inline SupportTable mine_apriori(std::span<const Transaction> txns, double min_support) {
  if (txns.empty()) throw Error("empty corpus");
  SupportTable out;
  out.total_images = txns.size();
  const std::uint64_t min_count = min_count_for(min_support, out.total_images);

  out.singleton_count = detail::count_singletons(txns);
  detail::drop_below(out.singleton_count, min_count);

  // Candidate generation: every pair of frequent singletons.
  std::map<KeywordPair, std::uint64_t> candidates;
  std::vector<KeywordId> frequent;
  for (const auto& [k, _] : out.singleton_count) frequent.push_back(k);
  for (std::size_t i = 0; i < frequent.size(); ++i)
    for (std::size_t j = i + 1; j < frequent.size(); ++j) candidates.emplace(KeywordPair{frequent[i], frequent[j]}, 0);

  std::vector<KeywordId> kept;
  for (const auto& t : txns) {
    kept.clear();
    for (KeywordId k : t)
      if (out.singleton_count.count(k)) kept.push_back(k);
    for (std::size_t i = 0; i < kept.size(); ++i)
      for (std::size_t j = i + 1; j < kept.size(); ++j) ++candidates[{kept[i], kept[j]}];
  }
  for (const auto& [p, c] : candidates)
    if (c >= min_count) out.pair_count.emplace(p, c);
  return out;
}

inline SupportTable mine_apriori(const Corpus& corpus, double min_support) {
  const auto txns = background_transactions(corpus);
  return mine_apriori(txns, min_support);
}

/// FP-Growth truncated at depth two. The tree is built once over frequent
/// items in descending-frequency order; for each item, walking its node-link
/// chain up to the root yields the conditional pattern base, whose item counts
/// are exactly the pair supports with that suffix item.
class FpTree {
 public:
  FpTree(std::span<const Transaction> txns, std::uint64_t min_count) {
    auto counts = detail::count_singletons(txns);
    detail::drop_below(counts, min_count);
    for (const auto& [k, c] : counts) order_.push_back({k, c});
    // Descending count, ascending id on ties.
    std::sort(order_.begin(), order_.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    for (std::size_t r = 0; r < order_.size(); ++r) rank_.emplace(order_[r].first, r);
    heads_.assign(order_.size(), kNone);

    nodes_.push_back({0, kNone, 0, kNone});  // root
    std::vector<std::size_t> path;
    for (const auto& t : txns) {
      path.clear();
      for (KeywordId k : t)
        if (auto it = rank_.find(k); it != rank_.end()) path.push_back(it->second);
      std::sort(path.begin(), path.end());
      std::size_t cur = 0;
      for (std::size_t r : path) cur = child(cur, r);
    }
  }

  const std::vector<std::pair<KeywordId, std::uint64_t>>& frequent_items() const { return order_; }

  /// Counts of every item co-occurring with the item of rank `r`, taken from
  /// its conditional pattern base.
  std::map<std::size_t, std::uint64_t> conditional_counts(std::size_t r) const {
    std::map<std::size_t, std::uint64_t> out;
    for (std::size_t n = heads_[r]; n != kNone; n = nodes_[n].next_same) {
      const std::uint64_t c = nodes_[n].count;
      for (std::size_t p = nodes_[n].parent; p != 0; p = nodes_[p].parent) out[nodes_[p].rank] += c;
    }
    return out;
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  struct Node {
    std::size_t rank;
    std::size_t parent;
    std::uint64_t count;
    std::size_t next_same;
    std::map<std::size_t, std::size_t> children{};
  };

  std::size_t child(std::size_t parent, std::size_t r) {
    auto it = nodes_[parent].children.find(r);
    if (it != nodes_[parent].children.end()) {
      ++nodes_[it->second].count;
      return it->second;
    }
    const std::size_t id = nodes_.size();
    nodes_.push_back({r, parent, 1, heads_[r]});
    heads_[r] = id;
    nodes_[parent].children.emplace(r, id);
    return id;
  }

  std::vector<std::pair<KeywordId, std::uint64_t>> order_;
  std::map<KeywordId, std::size_t> rank_;
  std::vector<std::size_t> heads_;
  std::vector<Node> nodes_;
};

inline SupportTable mine_fpgrowth(std::span<const Transaction> txns, double min_support) {
  if (txns.empty()) throw Error("empty corpus");
  SupportTable out;
  out.total_images = txns.size();
  const std::uint64_t min_count = min_count_for(min_support, out.total_images);

  const FpTree tree(txns, min_count);
  const auto& items = tree.frequent_items();
  for (const auto& [k, c] : items) out.singleton_count.emplace(k, c);
  for (std::size_t r = 0; r < items.size(); ++r) {
    for (const auto& [pr, c] : tree.conditional_counts(r)) {
      if (c < min_count) continue;
      KeywordId a = items[pr].first, b = items[r].first;
      if (a > b) std::swap(a, b);
      out.pair_count.emplace(KeywordPair{a, b}, c);
    }
  }
  return out;
}

inline SupportTable mine_fpgrowth(const Corpus& corpus, double min_support) {
  const auto txns = background_transactions(corpus);
  return mine_fpgrowth(txns, min_support);
}

inline constexpr std::size_t kBruteforceKeywordLimit = 20;

/// Reference semantics: for every keyword pair, scan every transaction.
inline SupportTable mine_bruteforce(std::span<const Transaction> txns, std::size_t keyword_count,
                                    double min_support) {
  if (txns.empty()) throw Error("empty corpus");
  if (keyword_count > kBruteforceKeywordLimit)
    throw Error("corpus too large for brute-force oracle (" + std::to_string(keyword_count) + " keywords)");
  SupportTable out;
  out.total_images = txns.size();
  const std::uint64_t min_count = min_count_for(min_support, out.total_images);
  auto contains = [](const Transaction& t, KeywordId k) { return std::find(t.begin(), t.end(), k) != t.end(); };
  for (KeywordId a = 0; a < keyword_count; ++a) {
    std::uint64_t c = 0;
    for (const auto& t : txns) c += contains(t, a);
    if (c >= min_count) out.singleton_count.emplace(a, c);
  }
  for (KeywordId a = 0; a < keyword_count; ++a) {
    for (KeywordId b = a + 1; b < keyword_count; ++b) {
      std::uint64_t c = 0;
      for (const auto& t : txns) c += contains(t, a) && contains(t, b);
      if (c >= min_count) out.pair_count.emplace(KeywordPair{a, b}, c);
    }
  }
  return out;
}

inline SupportTable mine_bruteforce(const Corpus& corpus, double min_support) {
  const auto txns = background_transactions(corpus);
  return mine_bruteforce(txns, corpus.keyword_count(), min_support);
}

struct DirectedRule {
  double confidence = 0.0;
  std::uint64_t pair_count = 0;
  std::uint64_t antecedent_count = 0;
};

/// confidence(a -> b) = support({a,b}) / support({a}); keyed by ordered (a, b).
struct ConfidenceTable {
  std::map<KeywordPair, DirectedRule> entries;

  double confidence(KeywordId from, KeywordId to) const { return entries.at({from, to}).confidence; }
};

inline ConfidenceTable confidences(const SupportTable& support) {
  ConfidenceTable out;
  for (const auto& [p, c] : support.pair_count) {
    const auto ia = support.singleton_count.find(p.first);
    const auto ib = support.singleton_count.find(p.second);
    if (ia == support.singleton_count.end() || ib == support.singleton_count.end())
      throw Error("pair present without its singleton supports");
    out.entries[{p.first, p.second}] = {static_cast<double>(c) / static_cast<double>(ia->second), c, ia->second};
    out.entries[{p.second, p.first}] = {static_cast<double>(c) / static_cast<double>(ib->second), c, ib->second};
  }
  return out;
}

inline json support_to_json(const SupportTable& s, const std::vector<std::string>& keywords) {
  json j;
  j["total"] = s.total_images;
  json pairs = json::array();
  for (const auto& [p, c] : s.pair_count) pairs.push_back({{"a", keywords.at(p.first)}, {"b", keywords.at(p.second)}, {"count", c}});
  json singles = json::array();
  for (const auto& [k, c] : s.singleton_count) singles.push_back({{"k", keywords.at(k)}, {"count", c}});
  j["pairs"] = std::move(pairs);
  j["singletons"] = std::move(singles);
  return j;
}

/// Inverse of support_to_json; keyword strings are resolved against the corpus.
inline SupportTable support_from_json(const json& j, const Corpus& corpus) {
  auto resolve = [&](const json& v) {
    const auto s = v.get<std::string>();
    auto id = corpus.find_keyword(s);
    if (!id) throw Error("support dump references unknown keyword '" + s + "'");
    return *id;
  };
  SupportTable s;
  s.total_images = j.at("total").get<std::uint64_t>();
  for (const auto& e : j.at("singletons")) s.singleton_count[resolve(e.at("k"))] = e.at("count").get<std::uint64_t>();
  for (const auto& e : j.at("pairs")) {
    KeywordId a = resolve(e.at("a")), b = resolve(e.at("b"));
    if (a > b) std::swap(a, b);
    s.pair_count[{a, b}] = e.at("count").get<std::uint64_t>();
  }
  return s;
}

}  // namespace bginv
