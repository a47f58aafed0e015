#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "bginv/agreement.hpp"
#include "bginv/mining.hpp"
#include "bginv/ontology.hpp"
#include "bginv/search.hpp"
#include "bginv/signals.hpp"

namespace bginv {

struct SynthSpec {
  std::size_t keywords = 24;
  std::size_t foregrounds = 4;
  std::size_t backgrounds = 600;
  std::size_t targets = 5;         // l
  std::size_t per_target = 10;     // n
  std::size_t models_per_profile = 20;
  double noise = 0.02;
  std::uint64_t seed = 7;
  // Search parameters the manifest is generated with; `pipeline` must reuse them.
  std::size_t min_support_count = 3;
  double min_confidence = 0.0;
  std::size_t max_level = 4;

  void validate() const {
    if (keywords < 1 || foregrounds < 1 || backgrounds < 1 || targets < 1 || per_target < 1 || models_per_profile < 1)
      throw Error("synth counts must be >= 1");
    if (!(noise >= 0.0)) throw Error("synth noise must be >= 0");
  }
};

enum class Profile { invariant, borderline, variant };

inline std::string_view to_string(Profile p) {
  switch (p) {
    case Profile::invariant: return "invariant";
    case Profile::borderline: return "borderline";
    case Profile::variant: return "variant";
  }
  return "";
}

inline Label profile_label(Profile p) {
  switch (p) {
    case Profile::invariant: return kInvariant;
    case Profile::borderline: return kBorderline;
    case Profile::variant: return kNotInvariant;
  }
  return 0;
}

/// Signal decay per unit of semantic distance for each profile.
inline double profile_slope(Profile p) {
  switch (p) {
    case Profile::invariant: return 0.0;
    case Profile::borderline: return 0.1;
    case Profile::variant: return 0.4;
  }
  return 0.0;
}

inline constexpr double kVariantDropout = 0.25;
inline constexpr double kCorrectThreshold = 0.5;
inline const std::vector<std::string>& synth_positions() {
  static const std::vector<std::string> p = {"Max@CONF", "Max@CONV-1"};
  return p;
}

struct SynthModel {
  std::string model_id;
  Profile profile = Profile::invariant;
};

struct SynthBundle {
  std::string corpus_jsonl;
  Manifest manifest;
  DistanceAssignment distances;
  std::vector<RawMeasurement> measurements;
  std::vector<SynthModel> models;
};

namespace detail {

inline std::string scene_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "scene %02zu", i);
  return buf;
}

inline std::string object_name(std::size_t i) { return "object " + std::to_string(i); }

/// Keywords drawn from a window around `center` on a line of scene keywords,
/// so co-occurrence (and hence the ontology) has a chain-like hop structure.
inline std::vector<std::string> window_keywords(Rng& rng, std::size_t keywords, std::size_t count) {
  const std::size_t center = rng.below(keywords);
  const std::size_t lo = center >= 2 ? center - 2 : 0;
  const std::size_t hi = std::min(keywords - 1, center + 2);
  std::set<std::size_t> pick{center};
  for (std::size_t tries = 0; pick.size() < count && tries < 16; ++tries) pick.insert(lo + rng.below(hi - lo + 1));
  std::vector<std::string> out;
  for (std::size_t k : pick) out.push_back(scene_name(k));
  return out;
}

}  // namespace detail

inline std::string synth_corpus(const SynthSpec& spec) {
  Rng rng(derive_seed(spec.seed, "corpus"));
  std::vector<json> rows;
  for (std::size_t b = 0; b < spec.backgrounds; ++b) {
    auto kws = detail::window_keywords(rng, spec.keywords, 2 + rng.below(3));
    if (rng.uniform() < 0.04) kws.push_back(detail::object_name(rng.below(spec.foregrounds)));
    char id[32];
    std::snprintf(id, sizeof id, "bg%05zu", b);
    rows.push_back({{"id", id}, {"role", "background"}, {"keywords", kws}});
  }
  for (std::size_t t = 0; t < spec.targets; ++t) {
    auto kws = detail::window_keywords(rng, spec.keywords, 1 + rng.below(2));
    const std::string fg = detail::object_name(t % spec.foregrounds);
    kws.push_back(fg);
    char id[32];
    std::snprintf(id, sizeof id, "tg%04zu", t);
    rows.push_back({{"id", id}, {"role", "target"}, {"keywords", kws}, {"foreground", fg}});
  }
  return to_jsonl(rows);
}

/// Piecewise-linear signal in semantic distance with Gaussian noise. Variant
/// models additionally lose `kVariantDropout` inside one distance band.
inline std::vector<RawMeasurement> synth_measurements(const SynthSpec& spec, const std::vector<SynthModel>& models,
                                                      const Manifest& manifest, const DistanceAssignment& dist) {
  std::vector<RawMeasurement> out;
  const auto groups = group_by_target(manifest);
  for (const auto& m : models) {
    Rng rng(derive_seed(spec.seed, m.model_id));
    const double base = rng.uniform(0.8, 0.95);
    const auto dropout_band = static_cast<long>(1 + rng.below(spec.max_level + 1));
    for (const auto& group : groups) {
      for (const auto& id : group) {
        const double d = dist.at(id);
        double clean = base - profile_slope(m.profile) * d;
        if (m.profile == Profile::variant && static_cast<long>(std::floor(d)) == dropout_band) clean -= kVariantDropout;
        bool correct = false;
        for (std::size_t p = 0; p < synth_positions().size(); ++p) {
          const double s = clean + spec.noise * rng.normal();
          RawMeasurement r{m.model_id, id, synth_positions()[p], std::nullopt, {}, std::nullopt};
          if (p == 0) {
            // Final-layer confidence vector; its max is the signal.
            correct = s >= kCorrectThreshold;
            r.vector = {s, s - 0.1 - 0.2 * rng.uniform(), s - 0.35};
          } else {
            r.scalar = s;
          }
          r.correct = correct;
          out.push_back(std::move(r));
        }
      }
    }
  }
  return out;
}

inline std::vector<SynthModel> synth_models(const SynthSpec& spec) {
  std::vector<Profile> profiles;
  for (Profile p : {Profile::invariant, Profile::borderline, Profile::variant})
    for (std::size_t i = 0; i < spec.models_per_profile; ++i) profiles.push_back(p);
  Rng rng(derive_seed(spec.seed, "models"));
  for (std::size_t i = 0; i + 1 < profiles.size(); ++i) std::swap(profiles[i], profiles[i + rng.below(profiles.size() - i)]);
  std::vector<SynthModel> out;
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "model_%03zu", i);
    out.push_back({id, profiles[i]});
  }
  return out;
}

/// Corpus, manifest (via the same mine/ontology/search path as `pipeline`),
/// measurements and ground-truth profiles.
inline SearchConfig synth_search_config(const SynthSpec& spec) {
  return SearchConfig{spec.per_target, spec.max_level, {}, spec.seed};
}

inline SynthBundle generate(const SynthSpec& spec) {
  spec.validate();
  const SearchConfig search = synth_search_config(spec);
  SynthBundle b;
  b.corpus_jsonl = synth_corpus(spec);
  const Corpus corpus = load_corpus_string(b.corpus_jsonl);
  const auto txns = background_transactions(corpus);
  const double min_support = static_cast<double>(spec.min_support_count) / static_cast<double>(txns.size());
  const auto support = mine_fpgrowth(txns, std::min(1.0, min_support));
  const Ontology onto = build_ontology(confidences(support), corpus.keyword_table(), spec.min_confidence);
  b.manifest = search_all(corpus, onto, search);
  b.distances = assign_distances(corpus, onto, b.manifest, spec.max_level);
  b.models = synth_models(spec);
  b.measurements = synth_measurements(spec, b.models, b.manifest, b.distances);
  return b;
}

}  // namespace bginv
