#pragma once

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bginv/agreement.hpp"
#include "bginv/features.hpp"
#include "bginv/signals.hpp"

namespace bginv {

/// Feature matrix with one label per row.
struct Dataset {
  std::vector<std::string> ids;
  std::vector<std::string> feature_names;
  std::vector<std::vector<double>> x;
  std::vector<Label> y;

  std::size_t size() const { return x.size(); }

  Dataset subset(const std::vector<std::size_t>& rows) const {
    Dataset d{{}, feature_names, {}, {}};
    for (std::size_t r : rows) {
      d.ids.push_back(ids[r]);
      d.x.push_back(x[r]);
      d.y.push_back(y[r]);
    }
    return d;
  }
};

/// Joins feature vectors with labels; models without a label are skipped.
inline Dataset make_dataset(const std::vector<FeatureVector>& features, const std::map<std::string, Label>& labels) {
  Dataset d;
  for (const auto& f : features) {
    auto it = labels.find(f.model_id);
    if (it == labels.end()) continue;
    if (d.feature_names.empty()) d.feature_names = f.names;
    for (double v : f.values)
      if (!std::isfinite(v)) throw Error("non-finite feature for model '" + f.model_id + "'");
    d.ids.push_back(f.model_id);
    d.x.push_back(f.values);
    d.y.push_back(it->second);
  }
  return d;
}

// ---------------------------------------------------------------------------
// CART

struct TreeNode {
  int feature = -1;  // -1 => leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  Label label = 0;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;

  Label predict(const std::vector<double>& x) const {
    int n = 0;
    while (nodes[n].feature >= 0) n = x[nodes[n].feature] <= nodes[n].threshold ? nodes[n].left : nodes[n].right;
    return nodes[n].label;
  }
};

struct TreeParams {
  std::size_t max_depth = std::numeric_limits<std::size_t>::max();
  std::size_t min_leaf = 2;
  std::size_t max_features = 0;  // 0 => all
};

namespace detail {

/// Argmax over class weights, lowest label on ties.
inline Label weighted_vote(const std::map<Label, double>& w) {
  Label best = 0;
  double bw = -1.0;
  for (const auto& [l, v] : w)
    if (v > bw + 1e-12) {
      bw = v;
      best = l;
    }
  return best;
}

inline double gini(const std::map<Label, double>& w, double total) {
  if (total <= 0.0) return 0.0;
  double s = 1.0;
  for (const auto& [_, v] : w) s -= (v / total) * (v / total);
  return s;
}

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, const std::vector<double>& weights, const TreeParams& p, Rng& rng)
      : data_(data), w_(weights), p_(p), rng_(rng) {}

  DecisionTree build(std::vector<std::size_t> rows) {
    grow(std::move(rows), 0);
    return std::move(tree_);
  }

 private:
  int grow(std::vector<std::size_t> rows, std::size_t depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    std::map<Label, double> cw;
    double total = 0.0;
    for (std::size_t r : rows) {
      cw[data_.y[r]] += w_[r];
      total += w_[r];
    }
    tree_.nodes[id].label = weighted_vote(cw);
    const bool pure = std::count_if(cw.begin(), cw.end(), [](const auto& kv) { return kv.second > 0.0; }) <= 1;
    if (pure || depth >= p_.max_depth || rows.size() < 2 * p_.min_leaf) return id;

    const auto split = best_split(rows, cw, total);
    if (!split) return id;
    std::vector<std::size_t> left, right;
    for (std::size_t r : rows) (data_.x[r][split->feature] <= split->threshold ? left : right).push_back(r);
    tree_.nodes[id].feature = static_cast<int>(split->feature);
    tree_.nodes[id].threshold = split->threshold;
    const int l = grow(std::move(left), depth + 1);
    const int rr = grow(std::move(right), depth + 1);
    tree_.nodes[id].left = l;
    tree_.nodes[id].right = rr;
    return id;
  }

  struct Split {
    std::size_t feature;
    double threshold;
    double gain;
  };

  std::optional<Split> best_split(const std::vector<std::size_t>& rows, const std::map<Label, double>& cw,
                                  double total) {
    const std::size_t nf = data_.feature_names.size();
    std::vector<std::size_t> order(nf);
    std::iota(order.begin(), order.end(), 0);
    const std::size_t m = p_.max_features == 0 ? nf : std::min(p_.max_features, nf);
    if (m < nf) {
      for (std::size_t i = 0; i + 1 < nf; ++i) std::swap(order[i], order[i + rng_.below(nf - i)]);
    }
    const double parent = gini(cw, total);
    std::optional<Split> best;
    std::vector<std::size_t> sorted = rows;
    // The first m features form the random subset; further features are only
    // examined when none of those admits a useful split.
    for (std::size_t fi = 0; fi < nf; ++fi) {
      if (fi >= m && best) break;
      const std::size_t f = order[fi];
      std::stable_sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) { return data_.x[a][f] < data_.x[b][f]; });
      std::map<Label, double> lw;
      double ltot = 0.0;
      for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
        lw[data_.y[sorted[k]]] += w_[sorted[k]];
        ltot += w_[sorted[k]];
        const double xa = data_.x[sorted[k]][f], xb = data_.x[sorted[k + 1]][f];
        if (!(xa < xb)) continue;
        if (k + 1 < p_.min_leaf || sorted.size() - k - 1 < p_.min_leaf) continue;
        std::map<Label, double> rw;
        for (const auto& [l, v] : cw) rw[l] = v - (lw.count(l) ? lw.at(l) : 0.0);
        const double rtot = total - ltot;
        const double child = (ltot * gini(lw, ltot) + rtot * gini(rw, rtot)) / total;
        const double gain = parent - child;
        if (gain > 1e-12 && (!best || gain > best->gain + 1e-12)) best = Split{f, 0.5 * (xa + xb), gain};
      }
    }
    return best;
  }

  const Dataset& data_;
  const std::vector<double>& w_;
  TreeParams p_;
  Rng& rng_;
  DecisionTree tree_;
};

}  // namespace detail

inline DecisionTree fit_tree(const Dataset& data, const std::vector<std::size_t>& rows, const std::vector<double>& weights,
                             const TreeParams& params, Rng& rng) {
  return detail::TreeBuilder(data, weights, params, rng).build(rows);
}

// ---------------------------------------------------------------------------
// Assessor models

enum class AssessorKind { random_forest, adaboost, threshold_baseline };

inline std::string_view to_string(AssessorKind k) {
  switch (k) {
    case AssessorKind::random_forest: return "random_forest";
    case AssessorKind::adaboost: return "adaboost";
    case AssessorKind::threshold_baseline: return "threshold_baseline";
  }
  return "";
}

inline AssessorKind parse_assessor_kind(const std::string& s) {
  if (s == "random_forest" || s == "rf") return AssessorKind::random_forest;
  if (s == "adaboost") return AssessorKind::adaboost;
  if (s == "threshold_baseline" || s == "worst-case" || s == "worst_case") return AssessorKind::threshold_baseline;
  throw Error("unknown assessor kind '" + s + "'");
}

struct AssessorModel {
  AssessorKind kind = AssessorKind::random_forest;
  std::vector<std::string> feature_names;
  std::vector<Label> classes;
  std::uint64_t seed = 0;
  std::vector<DecisionTree> trees;
  std::vector<double> alphas;                  // adaboost only
  std::optional<Label> constant;               // single-class training input
  double t1 = 0.0, t2 = 0.0;                   // threshold baseline

  Label predict(const std::vector<double>& x) const {
    if (x.size() != feature_names.size()) throw Error("feature vector length does not match the assessor");
    if (constant) return *constant;
    std::map<Label, double> votes;
    switch (kind) {
      case AssessorKind::random_forest:
        for (const auto& t : trees) votes[t.predict(x)] += 1.0;
        break;
      case AssessorKind::adaboost:
        for (std::size_t i = 0; i < trees.size(); ++i) votes[trees[i].predict(x)] += alphas[i];
        break;
      case AssessorKind::threshold_baseline:
        return x[0] < t1 ? kNotInvariant : (x[0] < t2 ? kBorderline : kInvariant);
    }
    return detail::weighted_vote(votes);
  }

  std::vector<Label> predict_all(const Dataset& d) const {
    std::vector<Label> out;
    for (const auto& x : d.x) out.push_back(predict(x));
    return out;
  }
};

namespace detail {

inline std::optional<Label> single_class(const Dataset& d) {
  if (d.size() == 0) throw Error("empty training set");
  const std::set<Label> cls(d.y.begin(), d.y.end());
  if (cls.size() == 1) return *cls.begin();
  return std::nullopt;
}

inline AssessorModel base_model(AssessorKind kind, const Dataset& d, std::uint64_t seed) {
  AssessorModel m;
  m.kind = kind;
  m.feature_names = d.feature_names;
  const std::set<Label> cls(d.y.begin(), d.y.end());
  m.classes.assign(cls.begin(), cls.end());
  m.seed = seed;
  if (auto c = single_class(d)) {
    std::cerr << "warning: single-class training set; assessor predicts " << *c << " for every input\n";
    m.constant = c;
  }
  return m;
}

}  // namespace detail

/// Bootstrap-sampled CART trees, Gini splits over sqrt(F) random features,
/// grown to purity with at least two samples per leaf; majority vote.
inline AssessorModel train_random_forest(const Dataset& d, std::size_t trees, std::uint64_t seed) {
  AssessorModel m = detail::base_model(AssessorKind::random_forest, d, seed);
  if (m.constant) return m;
  if (trees == 0) throw Error("random forest needs at least one tree");
  TreeParams p;
  p.min_leaf = 2;
  p.max_features = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(d.feature_names.size())))));
  const std::vector<double> unit(d.size(), 1.0);
  for (std::size_t t = 0; t < trees; ++t) {
    Rng rng(derive_seed(seed, t));
    std::vector<std::size_t> rows(d.size());
    for (auto& r : rows) r = static_cast<std::size_t>(rng.below(d.size()));
    m.trees.push_back(fit_tree(d, rows, unit, p, rng));
  }
  return m;
}

/// SAMME boosting over depth-2 trees. Boosting stops at the first round whose
/// weighted error reaches 1 - 1/#classes; a zero-error round is kept and ends
/// boosting.
inline AssessorModel train_adaboost(const Dataset& d, std::size_t rounds, std::uint64_t seed) {
  AssessorModel m = detail::base_model(AssessorKind::adaboost, d, seed);
  if (m.constant) return m;
  if (rounds == 0) throw Error("adaboost needs at least one round");
  const auto k = static_cast<double>(m.classes.size());
  const std::size_t n = d.size();
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  TreeParams p;
  p.max_depth = 2;
  p.min_leaf = 1;
  Rng rng(seed);
  for (std::size_t round = 0; round < rounds; ++round) {
    DecisionTree t = fit_tree(d, rows, w, p, rng);
    double err = 0.0, wsum = 0.0;
    std::vector<bool> wrong(n);
    for (std::size_t i = 0; i < n; ++i) {
      wrong[i] = t.predict(d.x[i]) != d.y[i];
      err += wrong[i] ? w[i] : 0.0;
      wsum += w[i];
    }
    err /= wsum;
    if (err >= 1.0 - 1.0 / k) break;
    if (err <= 0.0) {
      m.trees.push_back(std::move(t));
      m.alphas.push_back(1.0);
      break;
    }
    const double alpha = std::log((1.0 - err) / err) + std::log(k - 1.0);
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (wrong[i]) w[i] *= std::exp(alpha);
      norm += w[i];
    }
    for (auto& x : w) x /= norm;
    m.trees.push_back(std::move(t));
    m.alphas.push_back(alpha);
  }
  if (m.trees.empty()) {
    // First learner no better than chance: fall back to the majority class.
    std::map<Label, double> counts;
    for (Label l : d.y) counts[l] += 1.0;
    m.constant = detail::weighted_vote(counts);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Worst-case accuracy baseline

/// Per model: minimum over unit-width distance bands of mean prediction
/// correctness. Every (model, image) pair must carry a correctness flag.
inline std::map<std::string, double> worst_case_accuracy(const std::vector<Measurement>& measurements,
                                                         const DistanceAssignment& distances) {
  // (model, test) -> correct; the first position seen wins.
  std::map<std::string, std::map<std::string, bool>> flags;
  for (const auto& m : measurements) {
    if (!m.correct) throw Error("missing correctness flag for " + m.model_id + "/" + m.test_id);
    flags[m.model_id].try_emplace(m.test_id, *m.correct);
  }
  std::map<std::string, double> out;
  for (const auto& [model, tests] : flags) {
    std::map<long, std::pair<double, double>> bands;  // band -> (correct, count)
    for (const auto& [test, ok] : tests) {
      auto it = distances.distance.find(test);
      if (it == distances.distance.end()) continue;
      auto& b = bands[static_cast<long>(std::floor(it->second))];
      b.first += ok ? 1.0 : 0.0;
      b.second += 1.0;
    }
    if (bands.empty()) throw Error("model '" + model + "' has no measurements with known distances");
    double worst = 1.0;
    for (const auto& [_, b] : bands) worst = std::min(worst, b.first / b.second);
    out[model] = worst;
  }
  return out;
}

/// Dataset with the single feature "worst_case_accuracy".
inline Dataset worst_case_dataset(const std::map<std::string, double>& scalars, const std::map<std::string, Label>& labels) {
  Dataset d;
  d.feature_names = {"worst_case_accuracy"};
  for (const auto& [model, s] : scalars) {
    auto it = labels.find(model);
    if (it == labels.end()) continue;
    d.ids.push_back(model);
    d.x.push_back({s});
    d.y.push_back(it->second);
  }
  return d;
}

/// Thresholds t1 < t2 over the observed scalars (plus +inf) maximising
/// agreement with the training labels; first maximum in (t1, t2) order.
inline AssessorModel train_threshold_baseline(const Dataset& d) {
  if (d.feature_names.size() != 1) throw Error("threshold baseline takes a single scalar feature");
  AssessorModel m = detail::base_model(AssessorKind::threshold_baseline, d, 0);
  std::set<double> uniq;
  for (const auto& x : d.x) uniq.insert(x[0]);
  std::vector<double> cand(uniq.begin(), uniq.end());
  cand.push_back(std::numeric_limits<double>::infinity());
  std::size_t best = 0;
  bool found = false;
  for (std::size_t a = 0; a < cand.size(); ++a) {
    for (std::size_t b = a + 1; b < cand.size(); ++b) {
      std::size_t agree = 0;
      for (std::size_t i = 0; i < d.size(); ++i) {
        const double s = d.x[i][0];
        const Label p = s < cand[a] ? kNotInvariant : (s < cand[b] ? kBorderline : kInvariant);
        agree += p == d.y[i];
      }
      if (!found || agree > best) {
        best = agree;
        found = true;
        m.t1 = cand[a];
        m.t2 = cand[b];
      }
    }
  }
  if (!found) {  // a single observed value: everything at or above it is invariant
    m.t1 = cand[0];
    m.t2 = cand[0];
  }
  m.constant.reset();
  return m;
}

// ---------------------------------------------------------------------------
// Serialization

inline json tree_node_to_json(const DecisionTree& t, int n, const std::vector<std::string>& names) {
  const auto& node = t.nodes[n];
  if (node.feature < 0) return {{"leaf", node.label}};
  return {{"feature", names[node.feature]},
          {"feature_index", node.feature},
          {"threshold", node.threshold},
          {"left", tree_node_to_json(t, node.left, names)},
          {"right", tree_node_to_json(t, node.right, names)}};
}

inline int tree_node_from_json(DecisionTree& t, const json& j) {
  const int id = static_cast<int>(t.nodes.size());
  t.nodes.emplace_back();
  if (j.contains("leaf")) {
    t.nodes[id].label = j["leaf"].get<Label>();
    return id;
  }
  t.nodes[id].feature = j.at("feature_index").get<int>();
  t.nodes[id].threshold = j.at("threshold").get<double>();
  const int l = tree_node_from_json(t, j.at("left"));
  const int r = tree_node_from_json(t, j.at("right"));
  t.nodes[id].left = l;
  t.nodes[id].right = r;
  return id;
}

inline json threshold_to_json(double t) { return std::isinf(t) ? json("inf") : json(t); }
inline double threshold_from_json(const json& j) {
  return j.is_string() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

inline json assessor_to_json(const AssessorModel& m) {
  json j{{"kind", to_string(m.kind)}, {"feature_names", m.feature_names}, {"classes", m.classes}, {"seed", m.seed}};
  if (m.constant) j["constant"] = *m.constant;
  if (m.kind == AssessorKind::threshold_baseline) {
    j["t1"] = threshold_to_json(m.t1);
    j["t2"] = threshold_to_json(m.t2);
    return j;
  }
  json trees = json::array();
  for (const auto& t : m.trees) trees.push_back(tree_node_to_json(t, 0, m.feature_names));
  j["trees"] = std::move(trees);
  if (m.kind == AssessorKind::adaboost) j["alphas"] = m.alphas;
  return j;
}

inline AssessorModel assessor_from_json(const json& j) {
  AssessorModel m;
  m.kind = parse_assessor_kind(j.at("kind").get<std::string>());
  m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  m.classes = j.at("classes").get<std::vector<Label>>();
  m.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("constant")) m.constant = j["constant"].get<Label>();
  if (m.kind == AssessorKind::threshold_baseline) {
    m.t1 = threshold_from_json(j.at("t1"));
    m.t2 = threshold_from_json(j.at("t2"));
    return m;
  }
  for (const auto& t : j.at("trees")) {
    DecisionTree tree;
    tree_node_from_json(tree, t);
    m.trees.push_back(std::move(tree));
  }
  if (m.kind == AssessorKind::adaboost) m.alphas = j.at("alphas").get<std::vector<double>>();
  return m;
}

// ---------------------------------------------------------------------------
// Evaluation

struct EvalConfig {
  std::size_t repeats = 10;
  double train_frac = 2.0 / 3.0;
  std::uint64_t seed = 1;
  bool stratified = true;
};

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Train/test split for one repeat. Stratified splits keep at least one
/// training row per class; plain random splits are re-drawn (up to 100 times)
/// until every class appears in the training fold.
inline Split make_split(const Dataset& d, const EvalConfig& cfg, std::size_t repeat) {
  if (!(cfg.train_frac > 0.0) || cfg.train_frac > 1.0) throw Error("train_frac must lie in (0, 1]");
  const std::set<Label> classes(d.y.begin(), d.y.end());
  for (std::size_t attempt = 0; attempt < 100; ++attempt) {
    Rng rng(derive_seed(cfg.seed, repeat * 1000 + attempt));
    Split s;
    auto take = [&](std::vector<std::size_t> idx) {
      for (std::size_t i = 0; i + 1 < idx.size(); ++i) std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
      auto n_train = static_cast<std::size_t>(std::lround(cfg.train_frac * static_cast<double>(idx.size())));
      if (cfg.stratified) n_train = std::clamp<std::size_t>(n_train, 1, idx.size());
      s.train.insert(s.train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
      s.test.insert(s.test.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
    };
    if (cfg.stratified) {
      for (Label c : classes) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < d.size(); ++i)
          if (d.y[i] == c) idx.push_back(i);
        take(std::move(idx));
      }
    } else {
      std::vector<std::size_t> idx(d.size());
      std::iota(idx.begin(), idx.end(), 0);
      take(std::move(idx));
    }
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.test.begin(), s.test.end());
    std::set<Label> seen;
    for (std::size_t i : s.train) seen.insert(d.y[i]);
    if (seen == classes) return s;
  }
  throw Error("could not draw a training fold containing every class in 100 attempts");
}

struct KindReport {
  std::vector<double> accuracies;
  std::vector<double> kappas;
  double accuracy_mean = 0.0, accuracy_std = 0.0;
  double kappa_mean = 0.0, kappa_std = 0.0;
  std::vector<Label> classes;
  std::vector<std::vector<std::size_t>> confusion;  // [truth][predicted], summed over repeats
};

inline std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return {mean, std::sqrt(s / static_cast<double>(v.size() - 1))};
}

/// Repeated split/train/test. `trainer(train_set, repeat)` returns any object
/// with `Label predict(const std::vector<double>&) const`. With
/// train_frac == 1 the (empty) test fold is replaced by the training fold.
template <typename Trainer>
KindReport evaluate(const Dataset& d, const EvalConfig& cfg, Trainer&& trainer) {
  if (d.size() < 12) throw Error("evaluation needs at least 12 labelled models");
  if (cfg.repeats == 0) throw Error("repeats must be >= 1");
  KindReport rep;
  const std::set<Label> cls(d.y.begin(), d.y.end());
  rep.classes.assign(cls.begin(), cls.end());
  std::map<Label, std::size_t> pos;
  for (std::size_t i = 0; i < rep.classes.size(); ++i) pos[rep.classes[i]] = i;
  rep.confusion.assign(rep.classes.size(), std::vector<std::size_t>(rep.classes.size(), 0));

  for (std::size_t r = 0; r < cfg.repeats; ++r) {
    const Split s = make_split(d, cfg, r);
    const Dataset train = d.subset(s.train);
    const Dataset test = s.test.empty() ? train : d.subset(s.test);
    const auto model = trainer(train, r);
    std::vector<Label> pred;
    std::size_t hit = 0;
    for (std::size_t i = 0; i < test.size(); ++i) {
      const Label p = model.predict(test.x[i]);
      pred.push_back(p);
      hit += p == test.y[i];
      if (auto it = pos.find(p); it != pos.end()) ++rep.confusion[pos.at(test.y[i])][it->second];
    }
    rep.accuracies.push_back(static_cast<double>(hit) / static_cast<double>(test.size()));
    rep.kappas.push_back(cohen_kappa(pred, test.y));
  }
  std::tie(rep.accuracy_mean, rep.accuracy_std) = mean_std(rep.accuracies);
  std::tie(rep.kappa_mean, rep.kappa_std) = mean_std(rep.kappas);
  return rep;
}

inline json kind_report_to_json(const KindReport& r) {
  return {{"accuracy_mean", r.accuracy_mean},
          {"accuracy_std", r.accuracy_std},
          {"accuracies", r.accuracies},
          {"kappa", {{"mean", r.kappa_mean}, {"std", r.kappa_std}, {"per_repeat", r.kappas}}},
          {"classes", r.classes},
          {"confusion", r.confusion}};
}

struct AssessorParams {
  std::size_t trees = 100;
  std::size_t rounds = 50;
  std::uint64_t seed = 1;
};

/// Evaluates random forest and AdaBoost (and the worst-case baseline when a
/// scalar dataset is supplied). Top-level fields describe the random forest.
inline json evaluate_report(const Dataset& d, const EvalConfig& cfg, const AssessorParams& ap,
                            const std::optional<Dataset>& worst_case = std::nullopt) {
  json assessors;
  const auto rf = evaluate(d, cfg, [&](const Dataset& train, std::size_t r) {
    return train_random_forest(train, ap.trees, derive_seed(ap.seed, r));
  });
  assessors["random_forest"] = kind_report_to_json(rf);
  const auto ada = evaluate(d, cfg, [&](const Dataset& train, std::size_t r) {
    return train_adaboost(train, ap.rounds, derive_seed(ap.seed, r));
  });
  assessors["adaboost"] = kind_report_to_json(ada);
  if (worst_case && worst_case->size() > 0) {
    const auto wc = evaluate(*worst_case, cfg, [](const Dataset& train, std::size_t) { return train_threshold_baseline(train); });
    assessors["threshold_baseline"] = kind_report_to_json(wc);
  }
  json out = kind_report_to_json(rf);
  out["kind"] = "random_forest";
  out["models"] = d.size();
  out["repeats"] = cfg.repeats;
  out["train_frac"] = cfg.train_frac;
  out["stratified"] = cfg.stratified;
  out["assessors"] = std::move(assessors);
  return out;
}

}  // namespace bginv
