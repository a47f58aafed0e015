#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "bginv/corpus.hpp"
#include "bginv/ontology.hpp"

namespace bginv {

/// Backgrounds for one target, bucketed by the first expansion level at which
/// they share a keyword with OL[level].
struct CandidateSet {
  std::string target_id;
  std::vector<std::vector<std::string>> levels;  // index = level

  std::size_t total() const {
    std::size_t n = 0;
    for (const auto& l : levels) n += l.size();
    return n;
  }
};

/// The seed set used for a target's search: its keywords minus the foreground.
inline std::vector<KeywordId> search_seed(const ImageRecord& target) {
  std::vector<KeywordId> seed;
  for (KeywordId k : target.keywords)
    if (!target.foreground || k != *target.foreground) seed.push_back(k);
  return seed;
}

inline CandidateSet find_candidates(const Corpus& corpus, const Ontology& onto, std::string_view target_id,
                                    std::size_t max_level) {
  const ImageRecord* target = corpus.find(target_id);
  if (!target || target->role != Role::target) throw Error("target '" + std::string(target_id) + "' not found");
  if (onto.size() < corpus.keyword_count()) throw Error("ontology keyword table is smaller than the corpus table");

  const ExpansionSet ex = expand(onto, search_seed(*target), max_level);
  constexpr std::size_t kUnreached = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> keyword_level(onto.size(), kUnreached);
  for (std::size_t lvl = 0; lvl < ex.frontiers.size(); ++lvl)
    for (KeywordId k : ex.frontiers[lvl]) keyword_level[k] = lvl;

  CandidateSet out;
  out.target_id = target->image_id;
  out.levels.resize(max_level + 1);
  for (const auto& b : corpus.records()) {
    if (b.role != Role::background) continue;
    if (target->foreground && b.has_keyword(*target->foreground)) continue;
    std::size_t lvl = kUnreached;
    for (KeywordId k : b.keywords) lvl = std::min(lvl, keyword_level[k]);
    if (lvl <= max_level) out.levels[lvl].push_back(b.image_id);
  }
  return out;
}

/// Per-level draw counts: largest-remainder apportionment of n by weight
/// (so no level exceeds ceil(n * w / sum w)), capped by level size, with
/// each level's deficit spilled to the nearest level that still has spare
/// candidates (lower level first on equal distance).
inline std::vector<std::size_t> band_quotas(const std::vector<std::size_t>& sizes, std::size_t n,
                                            const std::vector<double>& weights) {
  const std::size_t L = sizes.size();
  double wsum = 0.0;
  for (std::size_t l = 0; l < L; ++l) {
    const double w = l < weights.size() ? weights[l] : 0.0;
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error("band weights must be non-negative");
    wsum += w;
  }
  if (!(wsum > 0.0)) throw Error("band weights are all zero");

  std::vector<std::size_t> quota(L, 0);
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t l = 0; l < L; ++l) {
    const double share = static_cast<double>(n) * (l < weights.size() ? weights[l] : 0.0) / wsum;
    // Guard exact divisions against representation error.
    const double fl = std::floor(share + 1e-9);
    quota[l] = static_cast<std::size_t>(fl);
    assigned += quota[l];
    remainders.push_back({share - fl, l});
  }
  std::stable_sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) { return a.first > b.first + 1e-12; });
  for (std::size_t i = 0; assigned < n && i < remainders.size(); ++i) {
    if (remainders[i].first <= 1e-9) break;
    ++quota[remainders[i].second];
    ++assigned;
  }

  std::vector<std::size_t> alloc(L);
  std::vector<std::size_t> deficit(L, 0);
  for (std::size_t l = 0; l < L; ++l) {
    alloc[l] = std::min(quota[l], sizes[l]);
    deficit[l] = quota[l] - alloc[l];
  }
  for (std::size_t l = 0; l < L; ++l) {
    for (std::size_t dist = 1; deficit[l] > 0 && dist < L; ++dist) {
      for (const long cand : {static_cast<long>(l) - static_cast<long>(dist), static_cast<long>(l + dist)}) {
        if (cand < 0 || cand >= static_cast<long>(L) || deficit[l] == 0) continue;
        const auto c = static_cast<std::size_t>(cand);
        const std::size_t take = std::min(deficit[l], sizes[c] - alloc[c]);
        alloc[c] += take;
        deficit[l] -= take;
      }
    }
  }
  return alloc;
}

/// Seeded draw without replacement per level. Output is ordered by level,
/// then by draw order within the level.
inline std::vector<std::string> band_sample(const CandidateSet& cands, std::size_t n, const std::vector<double>& weights,
                                            std::uint64_t seed) {
  if (n == 0) throw Error("n must be >= 1");
  if (cands.total() == 0) throw Error("empty candidate set for target '" + cands.target_id + "'");
  std::vector<std::size_t> sizes;
  for (const auto& l : cands.levels) sizes.push_back(l.size());
  const auto alloc = band_quotas(sizes, n, weights);

  Rng rng(derive_seed(seed, cands.target_id));
  std::vector<std::string> out;
  for (std::size_t l = 0; l < cands.levels.size(); ++l) {
    std::vector<std::string> pool = cands.levels[l];
    for (std::size_t i = 0; i < alloc[l]; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
      std::swap(pool[i], pool[j]);
      out.push_back(pool[i]);
    }
  }
  return out;
}

inline std::vector<double> uniform_weights(std::size_t max_level) { return std::vector<double>(max_level + 1, 1.0); }

struct ManifestRow {
  std::string test_id;
  std::string target_id;
  std::string background_id;
  std::size_t level = 0;

  friend bool operator==(const ManifestRow&, const ManifestRow&) = default;
};

using Manifest = std::vector<ManifestRow>;

struct TargetSample {
  std::string target_id;
  std::vector<std::pair<std::string, std::size_t>> backgrounds;  // (id, level)
};

inline std::string make_test_id(std::string_view target_id, std::string_view background_id) {
  return std::string(target_id) + "__" + std::string(background_id);
}

/// One row per (target, background), targets in id order.
inline Manifest emit_manifest(const Corpus& corpus, std::vector<TargetSample> samples) {
  std::sort(samples.begin(), samples.end(), [](const auto& a, const auto& b) { return a.target_id < b.target_id; });
  Manifest out;
  std::set<std::string> test_ids;
  for (const auto& s : samples) {
    const ImageRecord& t = corpus.record(s.target_id);
    if (t.role != Role::target) throw Error("'" + s.target_id + "' is not a target");
    for (const auto& [bid, lvl] : s.backgrounds) {
      const ImageRecord& b = corpus.record(bid);
      if (b.role != Role::background) throw Error("'" + bid + "' is not a background");
      if (t.foreground && b.has_keyword(*t.foreground))
        throw Error("background '" + bid + "' contains foreground keyword '" + corpus.keyword(*t.foreground) +
                    "' of target '" + t.image_id + "'");
      ManifestRow row{make_test_id(t.image_id, bid), t.image_id, bid, lvl};
      if (!test_ids.insert(row.test_id).second) throw Error("duplicate pair (" + t.image_id + ", " + bid + ")");
      out.push_back(std::move(row));
    }
  }
  return out;
}

struct SearchConfig {
  std::size_t n = 10;
  std::size_t max_level = 4;
  std::vector<double> weights;  // empty => uniform over 0..max_level
  std::uint64_t seed = 1;
};

/// Candidate discovery, sampling and manifest assembly for every target.
/// Targets with no candidates contribute no rows.
inline Manifest search_all(const Corpus& corpus, const Ontology& onto, const SearchConfig& cfg) {
  const auto weights = cfg.weights.empty() ? uniform_weights(cfg.max_level) : cfg.weights;
  std::vector<TargetSample> samples;
  for (const ImageRecord* t : corpus.with_role(Role::target)) {
    const CandidateSet cands = find_candidates(corpus, onto, t->image_id, cfg.max_level);
    if (cands.total() == 0) continue;
    std::map<std::string, std::size_t> level_of;
    for (std::size_t l = 0; l < cands.levels.size(); ++l)
      for (const auto& b : cands.levels[l]) level_of[b] = l;
    TargetSample s{t->image_id, {}};
    for (auto& b : band_sample(cands, cfg.n, weights, cfg.seed)) s.backgrounds.push_back({b, level_of.at(b)});
    samples.push_back(std::move(s));
  }
  return emit_manifest(corpus, std::move(samples));
}

inline json manifest_row_to_json(const ManifestRow& r) {
  return {{"test_id", r.test_id}, {"target_id", r.target_id}, {"background_id", r.background_id}, {"level", r.level}};
}

inline std::string save_manifest(const Manifest& m) {
  std::vector<json> rows;
  for (const auto& r : m) rows.push_back(manifest_row_to_json(r));
  return to_jsonl(rows);
}

inline Manifest load_manifest_file(const std::string& path) {
  Manifest m;
  std::set<std::string> ids;
  for_each_jsonl_file(path, [&](const json& j, std::size_t lineno) {
    try {
      ManifestRow r{j.at("test_id").get<std::string>(), j.at("target_id").get<std::string>(),
                    j.at("background_id").get<std::string>(), j.at("level").get<std::size_t>()};
      if (!ids.insert(r.test_id).second) throw Error("duplicate test_id '" + r.test_id + "'");
      m.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw Error(path + ": line " + std::to_string(lineno) + ": " + e.what());
    }
  });
  return m;
}

}  // namespace bginv
