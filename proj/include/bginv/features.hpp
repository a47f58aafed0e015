#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "bginv/resample.hpp"

namespace bginv {

inline const std::vector<std::string>& matrix_feature_names() {
  static const std::vector<std::string> names = {
      "mean",           "std",           "max",
      "min",            "abs_mean",      "abs_std",
      "diag_band",      "far_corner",    "quad_top_left",
      "quad_top_right", "quad_bottom_left", "quad_bottom_right",
      "center_block",   "upper_minus_lower", "trend_slope"};
  return names;
}

namespace detail {

struct Accum {
  double sum = 0.0;
  std::size_t n = 0;
  void add(double v) {
    sum += v;
    ++n;
  }
  double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
};

inline double population_std(const std::vector<double>& v, double mean) {
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace detail

/// Fixed-order statistics of one variance matrix; order matches
/// matrix_feature_names().
inline std::vector<double> extract_features(const VarianceMatrix& m) {
  const std::size_t r = m.r;
  if (r == 0 || m.values.size() != r * r) throw Error("malformed matrix");
  for (double v : m.values)
    if (!std::isfinite(v)) throw Error("cannot extract features from a non-finite matrix");

  const auto total = static_cast<double>(m.values.size());
  double sum = 0.0, asum = 0.0, vmax = m.values[0], vmin = m.values[0];
  std::vector<double> absvals;
  absvals.reserve(m.values.size());
  for (double v : m.values) {
    sum += v;
    asum += std::abs(v);
    vmax = std::max(vmax, v);
    vmin = std::min(vmin, v);
    absvals.push_back(std::abs(v));
  }
  const double mean = sum / total;
  const double amean = asum / total;

  const std::size_t band = r / 8;
  const std::size_t far = (3 * r) / 4;
  const std::size_t half = r / 2;
  const std::size_t c0 = r / 4, c1 = r / 4 + r / 2;
  detail::Accum diag, corner, q00, q01, q10, q11, center, upper, lower;

  // Least squares of value on s = i + j.
  double s_mean = 0.0;
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j) s_mean += static_cast<double>(i + j);
  s_mean /= total;
  double sxy = 0.0, sxx = 0.0;

  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < r; ++j) {
      const double v = m.at(i, j);
      const std::size_t gap = i > j ? i - j : j - i;
      if (gap <= band) diag.add(v);
      if (i >= far && j >= far) corner.add(v);
      (i < half ? (j < half ? q00 : q01) : (j < half ? q10 : q11)).add(v);
      if (i >= c0 && i < c1 && j >= c0 && j < c1) center.add(v);
      if (j > i) upper.add(v);
      if (j < i) lower.add(v);
      const double ds = static_cast<double>(i + j) - s_mean;
      sxy += ds * (v - mean);
      sxx += ds * ds;
    }
  }

  return {mean,
          detail::population_std(m.values, mean),
          vmax,
          vmin,
          amean,
          detail::population_std(absvals, amean),
          diag.mean(),
          corner.mean(),
          q00.mean(),
          q01.mean(),
          q10.mean(),
          q11.mean(),
          center.mean(),
          upper.mean() - lower.mean(),
          sxx > 0.0 ? sxy / sxx : 0.0};
}

/// One model's features across all of its positions, positions in sorted order.
struct FeatureVector {
  std::string model_id;
  std::vector<std::string> names;
  std::vector<double> values;
};

inline std::vector<FeatureVector> features_by_model(const std::vector<VarianceMatrix>& matrices) {
  std::map<std::string, std::map<std::string, const VarianceMatrix*>> grouped;
  for (const auto& m : matrices) {
    auto [it, ok] = grouped[m.model_id].emplace(m.position, &m);
    if (!ok) throw Error("duplicate matrix for " + m.model_id + "/" + m.position);
  }
  std::vector<FeatureVector> out;
  for (const auto& [model, positions] : grouped) {
    FeatureVector fv{model, {}, {}};
    for (const auto& [pos, m] : positions) {
      const auto vals = extract_features(*m);
      for (std::size_t f = 0; f < vals.size(); ++f) {
        fv.names.push_back(pos + "." + matrix_feature_names()[f]);
        fv.values.push_back(vals[f]);
      }
    }
    if (!out.empty() && out.front().names != fv.names)
      throw Error("model '" + model + "' has a different set of positions than '" + out.front().model_id + "'");
    out.push_back(std::move(fv));
  }
  return out;
}

inline std::string save_features(const std::vector<FeatureVector>& fvs) {
  std::vector<json> rows;
  for (const auto& f : fvs) rows.push_back({{"model_id", f.model_id}, {"names", f.names}, {"values", f.values}});
  return to_jsonl(rows);
}

inline std::vector<FeatureVector> load_features_file(const std::string& path) {
  std::vector<FeatureVector> out;
  for_each_jsonl_file(path, [&](const json& j, std::size_t lineno) {
    try {
      FeatureVector f{j.at("model_id").get<std::string>(), j.at("names").get<std::vector<std::string>>(),
                      j.at("values").get<std::vector<double>>()};
      if (f.names.size() != f.values.size()) throw Error("names/values length mismatch");
      if (!out.empty() && out.front().names != f.names) throw Error("feature names differ across models");
      out.push_back(std::move(f));
    } catch (const json::exception& e) {
      throw Error(path + ": line " + std::to_string(lineno) + ": " + e.what());
    }
  });
  return out;
}

}  // namespace bginv
