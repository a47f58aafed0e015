#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "bginv/search.hpp"

namespace bginv {

enum class Modality { max, mean };
enum class DifMode { subtract, absdiff };

inline Modality parse_modality(const std::string& s) {
  if (s == "max") return Modality::max;
  if (s == "mean") return Modality::mean;
  throw Error("unknown modality '" + s + "'");
}

inline DifMode parse_dif(const std::string& s) {
  if (s == "subtract") return DifMode::subtract;
  if (s == "absdiff") return DifMode::absdiff;
  throw Error("unknown dif mode '" + s + "'");
}

inline std::string_view to_string(DifMode d) { return d == DifMode::subtract ? "subtract" : "absdiff"; }

/// One raw row from the model-testing harness; exactly one of scalar/vector set.
struct RawMeasurement {
  std::string model_id;
  std::string test_id;
  std::string position;
  std::optional<double> scalar;
  std::vector<double> vector;
  std::optional<bool> correct;
};

struct Measurement {
  std::string model_id;
  std::string test_id;
  std::string position;
  double value = 0.0;
  std::optional<bool> correct;
};

using MeasurementKey = std::tuple<std::string, std::string, std::string>;  // model, test, position

inline double reduce_vector(const std::vector<double>& v, Modality modality) {
  if (v.empty()) throw Error("empty measurement vector");
  for (double x : v)
    if (std::isnan(x)) throw Error("NaN in measurement vector");
  if (modality == Modality::max) return *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline std::vector<Measurement> reduce_measurements(const std::vector<RawMeasurement>& raw, Modality modality) {
  std::vector<Measurement> out;
  std::set<MeasurementKey> seen;
  out.reserve(raw.size());
  for (const auto& r : raw) {
    double v = 0.0;
    if (r.scalar) {
      v = *r.scalar;
    } else {
      v = reduce_vector(r.vector, modality);
    }
    if (!std::isfinite(v))
      throw Error("non-finite measurement for " + r.model_id + "/" + r.test_id + "/" + r.position);
    if (!seen.insert({r.model_id, r.test_id, r.position}).second)
      throw Error("duplicate measurement for " + r.model_id + "/" + r.test_id + "/" + r.position);
    out.push_back({r.model_id, r.test_id, r.position, v, r.correct});
  }
  return out;
}

inline std::vector<RawMeasurement> load_measurements_file(const std::string& path) {
  std::vector<RawMeasurement> out;
  for_each_jsonl_file(path, [&](const json& j, std::size_t lineno) {
    try {
      RawMeasurement m;
      m.model_id = j.at("model_id").get<std::string>();
      m.test_id = j.at("test_id").get<std::string>();
      m.position = j.at("position").get<std::string>();
      if (j.contains("value")) {
        if (j["value"].is_null()) throw Error("NaN value");
        m.scalar = j["value"].get<double>();
      } else if (j.contains("vector")) {
        for (const auto& x : j["vector"]) {
          if (x.is_null()) throw Error("NaN in measurement vector");
          m.vector.push_back(x.get<double>());
        }
        if (m.vector.empty()) throw Error("empty measurement vector");
      } else {
        throw Error("row has neither 'value' nor 'vector'");
      }
      if (j.contains("correct")) m.correct = j["correct"].get<bool>();
      out.push_back(std::move(m));
    } catch (const json::exception& e) {
      throw Error(path + ": line " + std::to_string(lineno) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(path + ": line " + std::to_string(lineno) + ": " + e.what());
    }
  });
  return out;
}

inline json raw_measurement_to_json(const RawMeasurement& m) {
  json j{{"model_id", m.model_id}, {"test_id", m.test_id}, {"position", m.position}};
  if (m.scalar) {
    j["value"] = *m.scalar;
  } else {
    j["vector"] = m.vector;
  }
  if (m.correct) j["correct"] = *m.correct;
  return j;
}

/// Non-target rows whose minimum is exactly zero are lifted to this floor so
/// they stay distinguishable from the target itself.
inline constexpr double kSharedKeywordFloor = 0.5;

struct DistanceAssignment {
  std::map<std::string, double> distance;  // test_id (or target_id) -> d
  std::map<std::string, std::string> target_of;

  double at(const std::string& id) const {
    auto it = distance.find(id);
    if (it == distance.end()) throw Error("no semantic distance for '" + id + "'");
    return it->second;
  }
};

/// Directional semantic distance from a target to one background:
/// min over keyword pairs of hops + (1 - aggregate), starting at the target.
class DistanceOracle {
 public:
  DistanceOracle(const Ontology& onto, std::size_t max_level) : onto_(onto), max_level_(max_level) {}

  double distance(const std::vector<KeywordId>& from_set, const KeywordSet& to_set) {
    double best = std::numeric_limits<double>::infinity();
    for (KeywordId kx : from_set) {
      const SourceTable& t = table(kx);
      for (KeywordId kb : to_set) {
        if (kb >= t.hops.size() || !t.reachable(kb)) continue;
        best = std::min(best, static_cast<double>(t.hops[kb]) + (1.0 - t.aggregate[kb]));
      }
    }
    if (!std::isfinite(best)) return static_cast<double>(max_level_ + 1);
    return std::max(best, kSharedKeywordFloor);
  }

 private:
  const SourceTable& table(KeywordId k) {
    auto it = cache_.find(k);
    if (it == cache_.end()) it = cache_.emplace(k, single_source(onto_, k)).first;
    return it->second;
  }

  const Ontology& onto_;
  std::size_t max_level_;
  std::map<KeywordId, SourceTable> cache_;
};

inline DistanceAssignment assign_distances(const Corpus& corpus, const Ontology& onto, const Manifest& manifest,
                                           std::size_t max_level) {
  DistanceAssignment out;
  DistanceOracle oracle(onto, max_level);
  for (const auto& row : manifest) {
    const ImageRecord& t = corpus.record(row.target_id);
    const ImageRecord& b = corpus.record(row.background_id);
    out.distance[row.target_id] = 0.0;
    out.target_of[row.target_id] = row.target_id;
    out.distance[row.test_id] = oracle.distance(search_seed(t), b.keywords);
    out.target_of[row.test_id] = row.target_id;
  }
  return out;
}

inline std::string save_distances(const DistanceAssignment& d) {
  std::vector<json> rows;
  for (const auto& [id, dist] : d.distance) rows.push_back({{"test_id", id}, {"target_id", d.target_of.at(id)}, {"distance", dist}});
  return to_jsonl(rows);
}

inline DistanceAssignment load_distances_file(const std::string& path) {
  DistanceAssignment d;
  for_each_jsonl_file(path, [&](const json& j, std::size_t lineno) {
    try {
      const auto id = j.at("test_id").get<std::string>();
      d.distance[id] = j.at("distance").get<double>();
      d.target_of[id] = j.at("target_id").get<std::string>();
    } catch (const json::exception& e) {
      throw Error(path + ": line " + std::to_string(lineno) + ": " + e.what());
    }
  });
  return d;
}

struct CloudPoint {
  double da = 0.0;
  double db = 0.0;
  double v = 0.0;

  friend bool operator==(const CloudPoint&, const CloudPoint&) = default;
};

struct PointCloud {
  std::string model_id;
  std::string position;
  DifMode dif = DifMode::subtract;
  double d_max = 0.0;
  std::vector<CloudPoint> points;
};

inline double apply_dif(double a, double b, DifMode dif) { return dif == DifMode::subtract ? a - b : std::abs(a - b); }

/// Measurement lookup keyed by (model, test, position).
class MeasurementIndex {
 public:
  explicit MeasurementIndex(const std::vector<Measurement>& ms) {
    for (const auto& m : ms) map_.emplace(MeasurementKey{m.model_id, m.test_id, m.position}, &m);
  }
  const Measurement& at(const std::string& model, const std::string& test, const std::string& position) const {
    auto it = map_.find({model, test, position});
    if (it == map_.end()) throw Error("missing measurement for model '" + model + "', test '" + test + "', position '" + position + "'");
    return *it->second;
  }

 private:
  std::map<MeasurementKey, const Measurement*> map_;
};

/// Per target, the target id followed by its testing images in manifest order.
inline std::vector<std::vector<std::string>> group_by_target(const Manifest& manifest) {
  std::map<std::string, std::vector<std::string>> groups;
  std::vector<std::string> order;
  for (const auto& r : manifest) {
    auto [it, inserted] = groups.try_emplace(r.target_id);
    if (inserted) {
      order.push_back(r.target_id);
      it->second.push_back(r.target_id);
    }
    it->second.push_back(r.test_id);
  }
  std::vector<std::vector<std::string>> out;
  for (const auto& t : order) out.push_back(std::move(groups[t]));
  return out;
}

/// For every target and ordered pair (a, b), a != b, of its n + 1 images,
/// one point at (d_a, d_b). Each unordered pair is emitted as adjacent
/// mirror points (a, b), (b, a).
inline PointCloud build_point_cloud(const MeasurementIndex& measurements, const DistanceAssignment& distances,
                                    const Manifest& manifest, const std::string& model_id, const std::string& position,
                                    DifMode dif, std::optional<double> d_max_override = std::nullopt) {
  PointCloud pc{model_id, position, dif, 0.0, {}};
  for (const auto& group : group_by_target(manifest)) {
    std::vector<double> d, s;
    for (const auto& id : group) {
      d.push_back(distances.at(id));
      s.push_back(measurements.at(model_id, id, position).value);
    }
    for (std::size_t a = 0; a < group.size(); ++a) {
      for (std::size_t b = a + 1; b < group.size(); ++b) {
        pc.points.push_back({d[a], d[b], apply_dif(s[a], s[b], dif)});
        pc.points.push_back({d[b], d[a], apply_dif(s[b], s[a], dif)});
      }
    }
    for (double x : d) pc.d_max = std::max(pc.d_max, x);
  }
  if (d_max_override) pc.d_max = *d_max_override;
  return pc;
}

/// Distinct (model, position) pairs present in the measurements, sorted.
inline std::vector<std::pair<std::string, std::string>> model_positions(const std::vector<Measurement>& ms) {
  std::set<std::pair<std::string, std::string>> s;
  for (const auto& m : ms) s.insert({m.model_id, m.position});
  return {s.begin(), s.end()};
}

inline json point_cloud_to_json(const PointCloud& pc) {
  json pts = json::array();
  for (const auto& p : pc.points) pts.push_back(json::array({p.da, p.db, p.v}));
  return {{"model_id", pc.model_id}, {"position", pc.position}, {"dif", to_string(pc.dif)}, {"d_max", pc.d_max}, {"points", std::move(pts)}};
}

inline PointCloud point_cloud_from_json(const json& j) {
  PointCloud pc;
  pc.model_id = j.at("model_id").get<std::string>();
  pc.position = j.at("position").get<std::string>();
  pc.dif = parse_dif(j.at("dif").get<std::string>());
  pc.d_max = j.at("d_max").get<double>();
  for (const auto& p : j.at("points")) pc.points.push_back({p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()});
  return pc;
}

inline std::string artifact_stem(const std::string& model_id, const std::string& position) {
  return sanitize_filename(model_id) + "__" + sanitize_filename(position);
}

}  // namespace bginv
