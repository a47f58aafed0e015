#pragma once

#include <algorithm>
#include <ctime>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bginv/common.hpp"

namespace bginv {

using Label = int;

inline constexpr Label kNotInvariant = 1;
inline constexpr Label kBorderline = 2;
inline constexpr Label kInvariant = 3;

inline bool valid_label(Label l) { return l >= kNotInvariant && l <= kInvariant; }

/// Cohen's kappa between two raters. Perfect agreement with a single shared
/// category (p_e == 1) returns 1.
inline double cohen_kappa(const std::vector<Label>& a, const std::vector<Label>& b) {
  if (a.size() != b.size()) throw Error("cohen_kappa: length mismatch");
  if (a.empty()) throw Error("cohen_kappa: empty input");
  std::set<Label> cats(a.begin(), a.end());
  cats.insert(b.begin(), b.end());
  const auto n = static_cast<double>(a.size());
  std::map<Label, double> ma, mb;
  double agree = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma[a[i]] += 1.0;
    mb[b[i]] += 1.0;
    agree += a[i] == b[i];
  }
  const double po = agree / n;
  double pe = 0.0;
  for (Label c : cats) pe += (ma[c] / n) * (mb[c] / n);
  if (pe >= 1.0) return po >= 1.0 ? 1.0 : 0.0;
  return (po - pe) / (1.0 - pe);
}

struct FleissResult {
  double kappa = 0.0;
  bool degenerate = false;  // every rating in one category; kappa reported as 1
};

/// Fleiss' kappa over items x raters (same rater count per item).
inline FleissResult fleiss_kappa(const std::vector<std::vector<Label>>& ratings) {
  if (ratings.empty()) throw Error("fleiss_kappa: no items");
  const std::size_t raters = ratings.front().size();
  if (raters < 2) throw Error("fleiss_kappa: need at least two raters");
  std::set<Label> cats;
  for (const auto& item : ratings) {
    if (item.size() != raters) throw Error("fleiss_kappa: ragged rating table");
    cats.insert(item.begin(), item.end());
  }
  const auto n = static_cast<double>(raters);
  const auto items = static_cast<double>(ratings.size());
  std::map<Label, double> totals;
  double p_bar = 0.0;
  for (const auto& item : ratings) {
    std::map<Label, double> counts;
    for (Label l : item) counts[l] += 1.0;
    double sq = 0.0;
    for (const auto& [c, k] : counts) {
      sq += k * k;
      totals[c] += k;
    }
    p_bar += (sq - n) / (n * (n - 1.0));
  }
  p_bar /= items;
  double pe = 0.0;
  for (const auto& [c, k] : totals) {
    const double p = k / (items * n);
    pe += p * p;
  }
  if (pe >= 1.0) return {1.0, true};
  return {(p_bar - pe) / (1.0 - pe), false};
}

struct Annotation {
  std::string model_id;
  std::string annotator;
  Label label = 0;
};

/// Latest label per (model, annotator); later rows override earlier ones.
class AnnotationSet {
 public:
  void set(const std::string& model, const std::string& annotator, Label label) {
    if (!valid_label(label)) throw Error("label must be 1, 2 or 3");
    labels_[model][annotator] = label;
    annotators_.insert(annotator);
  }

  const std::map<std::string, std::map<std::string, Label>>& by_model() const { return labels_; }
  const std::set<std::string>& annotators() const { return annotators_; }

  std::optional<Label> get(const std::string& model, const std::string& annotator) const {
    auto it = labels_.find(model);
    if (it == labels_.end()) return std::nullopt;
    auto jt = it->second.find(annotator);
    if (jt == it->second.end()) return std::nullopt;
    return jt->second;
  }

  /// Majority vote per model; any tie resolves to borderline.
  std::map<std::string, Label> majority() const {
    std::map<std::string, Label> out;
    for (const auto& [model, votes] : labels_) {
      std::map<Label, int> counts;
      for (const auto& [_, l] : votes) ++counts[l];
      int best = 0;
      std::vector<Label> winners;
      for (const auto& [l, c] : counts) {
        if (c > best) {
          best = c;
          winners = {l};
        } else if (c == best) {
          winners.push_back(l);
        }
      }
      out[model] = winners.size() == 1 ? winners.front() : kBorderline;
    }
    return out;
  }

 private:
  std::map<std::string, std::map<std::string, Label>> labels_;
  std::set<std::string> annotators_;
};

inline AnnotationSet load_annotations_file(const std::string& path) {
  AnnotationSet set;
  for_each_jsonl_file(path, [&](const json& j, std::size_t lineno) {
    try {
      set.set(j.at("model_id").get<std::string>(), j.at("annotator").get<std::string>(), j.at("label").get<Label>());
    } catch (const json::exception& e) {
      throw Error(path + ": line " + std::to_string(lineno) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(path + ": line " + std::to_string(lineno) + ": " + e.what());
    }
  });
  return set;
}

/// Pairwise Cohen's kappa over commonly labelled models and Fleiss' kappa over
/// models labelled by every annotator.
inline json inter_rater_report(const AnnotationSet& set) {
  const std::vector<std::string> raters(set.annotators().begin(), set.annotators().end());
  json cohen = json::array();
  for (const auto& a : raters) {
    json row = json::array();
    for (const auto& b : raters) {
      std::vector<Label> la, lb;
      for (const auto& [model, votes] : set.by_model()) {
        auto ia = votes.find(a), ib = votes.find(b);
        if (ia != votes.end() && ib != votes.end()) {
          la.push_back(ia->second);
          lb.push_back(ib->second);
        }
      }
      row.push_back(la.empty() ? json(nullptr) : json(cohen_kappa(la, lb)));
    }
    cohen.push_back(std::move(row));
  }
  json out{{"annotators", raters}, {"cohen", std::move(cohen)}, {"fleiss", nullptr}, {"fleiss_items", 0},
           {"fleiss_degenerate", false}};
  if (raters.size() >= 2) {
    std::vector<std::vector<Label>> table;
    for (const auto& [model, votes] : set.by_model()) {
      if (votes.size() != raters.size()) continue;
      std::vector<Label> row;
      for (const auto& [_, l] : votes) row.push_back(l);
      table.push_back(std::move(row));
    }
    if (!table.empty()) {
      const auto f = fleiss_kappa(table);
      out["fleiss"] = f.kappa;
      out["fleiss_items"] = table.size();
      out["fleiss_degenerate"] = f.degenerate;
    }
  }
  return out;
}

}  // namespace bginv
