#pragma once

// File-in/file-out pipeline stages. Each stage returns a one-line JSON
// summary; the CLI prints it and `run_pipeline` chains the same calls.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bginv/assessor.hpp"
#include "bginv/corpus.hpp"
#include "bginv/features.hpp"
#include "bginv/mining.hpp"
#include "bginv/ontology.hpp"
#include "bginv/resample.hpp"
#include "bginv/search.hpp"
#include "bginv/signals.hpp"
#include "bginv/synth.hpp"

namespace bginv {

namespace fs = std::filesystem;

enum class MiningAlgorithm { apriori, fpgrowth, bruteforce };

inline MiningAlgorithm parse_algorithm(const std::string& s) {
  if (s == "apriori") return MiningAlgorithm::apriori;
  if (s == "fpgrowth") return MiningAlgorithm::fpgrowth;
  if (s == "bruteforce") return MiningAlgorithm::bruteforce;
  throw Error("unknown mining algorithm '" + s + "'");
}

/// Files with the given extension in a directory, sorted by name.
inline std::vector<std::string> list_files(const std::string& dir, const std::string& ext) {
  if (!fs::is_directory(dir)) throw Error("not a directory: '" + dir + "'");
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ext) out.push_back(e.path().string());
  std::sort(out.begin(), out.end());
  return out;
}

inline void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create directory '" + dir + "': " + ec.message());
}

struct MineOptions {
  MiningAlgorithm algorithm = MiningAlgorithm::fpgrowth;
  std::optional<double> min_support;          // fraction; takes precedence
  std::size_t min_support_count = 3;
};

inline json stage_mine(const std::string& corpus_path, const MineOptions& opt, const std::string& out) {
  const Corpus corpus = load_corpus_file(corpus_path);
  const auto txns = background_transactions(corpus);
  const double min_support = opt.min_support.value_or(
      std::min(1.0, static_cast<double>(std::max<std::size_t>(1, opt.min_support_count)) / static_cast<double>(txns.size())));
  SupportTable s;
  switch (opt.algorithm) {
    case MiningAlgorithm::apriori: s = mine_apriori(txns, min_support); break;
    case MiningAlgorithm::fpgrowth: s = mine_fpgrowth(txns, min_support); break;
    case MiningAlgorithm::bruteforce: s = mine_bruteforce(txns, corpus.keyword_count(), min_support); break;
  }
  write_text_file(out, support_to_json(s, corpus.keyword_table()).dump() + "\n");
  return {{"stage", "mine"}, {"transactions", s.total_images}, {"singletons", s.singleton_count.size()},
          {"pairs", s.pair_count.size()}, {"out", out}};
}

inline json stage_build_ontology(const std::string& corpus_path, const std::string& support_path, double min_confidence,
                                 const std::string& out) {
  const Corpus corpus = load_corpus_file(corpus_path);
  json sj;
  try {
    sj = json::parse(read_text_file(support_path));
  } catch (const json::exception& e) {
    throw Error(support_path + ": " + e.what());
  }
  const auto support = support_from_json(sj, corpus);
  const Ontology onto = build_ontology(confidences(support), corpus.keyword_table(), min_confidence);
  write_text_file(out, ontology_to_json(onto).dump() + "\n");
  return {{"stage", "build-ontology"}, {"keywords", onto.size()}, {"edges", onto.edge_count()}, {"out", out}};
}

inline json stage_expand(const std::string& ontology_path, const std::vector<std::string>& keywords, std::size_t max_level) {
  const Ontology onto = load_ontology_file(ontology_path);
  std::vector<KeywordId> seed;
  for (const auto& k : keywords) seed.push_back(onto.keyword_id(k));
  const auto ex = expand(onto, seed, max_level);
  auto names = [&](const std::vector<std::vector<KeywordId>>& sets) {
    json out = json::array();
    for (const auto& set : sets) {
      json row = json::array();
      for (KeywordId k : set) row.push_back(onto.keyword_table()[k]);
      out.push_back(std::move(row));
    }
    return out;
  };
  return {{"stage", "expand"}, {"levels", names(ex.levels)}, {"frontiers", names(ex.frontiers)},
          {"fixed_point_level", ex.computed_levels() - 1}};
}

inline json stage_search(const std::string& corpus_path, const std::string& ontology_path, const SearchConfig& cfg,
                         const std::string& out) {
  const Corpus corpus = load_corpus_file(corpus_path);
  const Ontology onto = load_ontology_file(ontology_path);
  const Manifest m = search_all(corpus, onto, cfg);
  write_text_file(out, save_manifest(m));
  return {{"stage", "search"}, {"targets", corpus.target_count()}, {"rows", m.size()}, {"out", out}};
}

inline json stage_distances(const std::string& corpus_path, const std::string& ontology_path,
                            const std::string& manifest_path, std::size_t max_level, const std::string& out) {
  const Corpus corpus = load_corpus_file(corpus_path);
  const Ontology onto = load_ontology_file(ontology_path);
  const Manifest m = load_manifest_file(manifest_path);
  const auto d = assign_distances(corpus, onto, m, max_level);
  write_text_file(out, save_distances(d));
  return {{"stage", "distances"}, {"rows", d.distance.size()}, {"out", out}};
}

struct CloudOptions {
  DifMode dif = DifMode::subtract;
  Modality modality = Modality::max;
  std::optional<double> d_max;
};

inline json stage_pointcloud(const std::string& manifest_path, const std::string& distances_path,
                             const std::string& measurements_path, const CloudOptions& opt, const std::string& out_dir) {
  const Manifest manifest = load_manifest_file(manifest_path);
  const auto dist = load_distances_file(distances_path);
  const auto ms = reduce_measurements(load_measurements_file(measurements_path), opt.modality);
  const MeasurementIndex index(ms);
  ensure_dir(out_dir);
  std::size_t clouds = 0, points = 0;
  for (const auto& [model, position] : model_positions(ms)) {
    const auto pc = build_point_cloud(index, dist, manifest, model, position, opt.dif, opt.d_max);
    write_text_file((fs::path(out_dir) / (artifact_stem(model, position) + ".json")).string(), point_cloud_to_json(pc).dump() + "\n");
    ++clouds;
    points += pc.points.size();
  }
  return {{"stage", "pointcloud"}, {"clouds", clouds}, {"points", points}, {"out", out_dir}};
}

inline PointCloud load_point_cloud_file(const std::string& path) {
  try {
    return point_cloud_from_json(json::parse(read_text_file(path)));
  } catch (const json::exception& e) {
    throw Error(path + ": " + e.what());
  }
}

inline json stage_resample(const std::string& clouds_dir, const RbfConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  const auto files = list_files(clouds_dir, ".json");
  ensure_dir(out_dir);
  for (const auto& f : files) {
    const auto pc = load_point_cloud_file(f);
    const auto m = interpolate(pc, cfg);
    write_text_file((fs::path(out_dir) / (artifact_stem(m.model_id, m.position) + ".json")).string(), matrix_to_json(m).dump() + "\n");
  }
  return {{"stage", "resample"}, {"matrices", files.size()}, {"r", cfg.r}, {"out", out_dir}};
}

/// Writes <stem>.ppm beside each matrix and, when a clouds directory is
/// given, <model>.scatter.ppm from the model's first position.
inline json stage_render(const std::string& matrices_dir, std::size_t scale, const std::optional<std::string>& clouds_dir) {
  const auto files = list_files(matrices_dir, ".json");
  for (const auto& f : files) {
    const auto m = load_matrix_file(f);
    write_text_file(fs::path(f).replace_extension(".ppm").string(), render_matrix(m, scale).to_ppm());
  }
  std::size_t scatters = 0;
  if (clouds_dir) {
    std::set<std::string> done;
    for (const auto& f : list_files(*clouds_dir, ".json")) {
      const auto pc = load_point_cloud_file(f);
      if (!done.insert(pc.model_id).second) continue;
      const std::string path = (fs::path(matrices_dir) / (sanitize_filename(pc.model_id) + ".scatter.ppm")).string();
      write_text_file(path, render_scatter(pc, 256).to_ppm());
      ++scatters;
    }
  }
  return {{"stage", "render"}, {"images", files.size()}, {"scatters", scatters}, {"out", matrices_dir}};
}

inline std::vector<VarianceMatrix> load_matrices_dir(const std::string& dir) {
  std::vector<VarianceMatrix> out;
  for (const auto& f : list_files(dir, ".json")) out.push_back(load_matrix_file(f));
  return out;
}

inline json stage_features(const std::string& matrices_dir, const std::string& out) {
  const auto fvs = features_by_model(load_matrices_dir(matrices_dir));
  write_text_file(out, save_features(fvs));
  return {{"stage", "features"}, {"models", fvs.size()}, {"features", fvs.empty() ? 0 : fvs.front().names.size()}, {"out", out}};
}

/// Inputs for the worst-case baseline: measurements carrying correctness and
/// the distances file.
struct WorstCaseInputs {
  std::string measurements;
  std::string distances;
};

inline std::map<std::string, double> load_worst_case_scalars(const WorstCaseInputs& in) {
  const auto ms = reduce_measurements(load_measurements_file(in.measurements), Modality::max);
  return worst_case_accuracy(ms, load_distances_file(in.distances));
}

struct TrainOptions {
  AssessorKind kind = AssessorKind::random_forest;
  AssessorParams params;
};

inline json stage_train(const std::optional<std::string>& features_path, const std::string& annotations_path,
                        const TrainOptions& opt, const std::optional<WorstCaseInputs>& wc, const std::string& out) {
  const auto labels = load_annotations_file(annotations_path).majority();
  Dataset d;
  if (opt.kind == AssessorKind::threshold_baseline) {
    if (!wc) throw Error("worst-case baseline needs --measurements and --distances");
    d = worst_case_dataset(load_worst_case_scalars(*wc), labels);
  } else {
    if (!features_path) throw Error("--features is required");
    d = make_dataset(load_features_file(*features_path), labels);
  }
  if (d.size() == 0) throw Error("no labelled models to train on");
  AssessorModel m;
  switch (opt.kind) {
    case AssessorKind::random_forest: m = train_random_forest(d, opt.params.trees, opt.params.seed); break;
    case AssessorKind::adaboost: m = train_adaboost(d, opt.params.rounds, opt.params.seed); break;
    case AssessorKind::threshold_baseline: m = train_threshold_baseline(d); break;
  }
  write_text_file(out, assessor_to_json(m).dump() + "\n");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < d.size(); ++i) hit += m.predict(d.x[i]) == d.y[i];
  return {{"stage", "train"}, {"kind", to_string(m.kind)}, {"models", d.size()},
          {"train_accuracy", static_cast<double>(hit) / static_cast<double>(d.size())}, {"out", out}};
}

inline json stage_assess(const std::string& assessor_path, const std::optional<std::string>& features_path,
                         const std::optional<WorstCaseInputs>& wc, const std::string& out) {
  AssessorModel m;
  try {
    m = assessor_from_json(json::parse(read_text_file(assessor_path)));
  } catch (const json::exception& e) {
    throw Error(assessor_path + ": " + e.what());
  }
  std::vector<json> rows;
  if (m.kind == AssessorKind::threshold_baseline) {
    if (!wc) throw Error("worst-case baseline needs --measurements and --distances");
    for (const auto& [model, s] : load_worst_case_scalars(*wc)) rows.push_back({{"model_id", model}, {"label", m.predict({s})}});
  } else {
    if (!features_path) throw Error("--features is required");
    for (const auto& f : load_features_file(*features_path)) {
      if (f.names != m.feature_names) throw Error("feature names of '" + f.model_id + "' do not match the assessor");
      rows.push_back({{"model_id", f.model_id}, {"label", m.predict(f.values)}});
    }
  }
  write_text_file(out, to_jsonl(rows));
  return {{"stage", "assess"}, {"models", rows.size()}, {"out", out}};
}

inline json stage_evaluate(const std::string& features_path, const std::string& annotations_path, const EvalConfig& cfg,
                           const AssessorParams& ap, const std::optional<WorstCaseInputs>& wc, const std::string& out) {
  const auto annotations = load_annotations_file(annotations_path);
  const auto labels = annotations.majority();
  const Dataset d = make_dataset(load_features_file(features_path), labels);
  std::optional<Dataset> wcd;
  if (wc) wcd = worst_case_dataset(load_worst_case_scalars(*wc), labels);
  json report = evaluate_report(d, cfg, ap, wcd);
  report["annotator_irr"] = inter_rater_report(annotations);
  write_text_file(out, report.dump(2) + "\n");
  return {{"stage", "evaluate"}, {"models", d.size()}, {"accuracy_mean", report["accuracy_mean"]},
          {"accuracy_std", report["accuracy_std"]}, {"kappa_mean", report["kappa"]["mean"]}, {"out", out}};
}

/// Everything `pipeline` needs. Relative paths resolve against the config
/// file's directory.
struct PipelineConfig {
  std::string corpus = "corpus.jsonl";
  std::string measurements = "measurements.jsonl";
  std::string annotations = "labels.jsonl";
  std::string out_dir = "run";
  MiningAlgorithm algorithm = MiningAlgorithm::fpgrowth;
  std::size_t min_support_count = 3;
  double min_confidence = 0.0;
  SearchConfig search;
  CloudOptions cloud;
  RbfConfig rbf;
  std::size_t render_scale = 8;
  EvalConfig eval;
  AssessorParams assessor;
  bool worst_case = true;
};

inline json pipeline_config_to_json(const PipelineConfig& c) {
  static const char* algos[] = {"apriori", "fpgrowth", "bruteforce"};
  return {{"corpus", c.corpus},
          {"measurements", c.measurements},
          {"annotations", c.annotations},
          {"out_dir", c.out_dir},
          {"algorithm", algos[static_cast<int>(c.algorithm)]},
          {"min_support_count", c.min_support_count},
          {"min_confidence", c.min_confidence},
          {"n", c.search.n},
          {"max_level", c.search.max_level},
          {"weights", c.search.weights},
          {"seed", c.search.seed},
          {"dif", to_string(c.cloud.dif)},
          {"modality", c.cloud.modality == Modality::max ? "max" : "mean"},
          {"r", c.rbf.r},
          {"radius", c.rbf.radius},
          {"sigma", c.rbf.sigma},
          {"k", c.rbf.k},
          {"render_scale", c.render_scale},
          {"repeats", c.eval.repeats},
          {"train_frac", c.eval.train_frac},
          {"stratified", c.eval.stratified},
          {"trees", c.assessor.trees},
          {"rounds", c.assessor.rounds},
          {"assessor_seed", c.assessor.seed},
          {"worst_case", c.worst_case}};
}

inline PipelineConfig pipeline_config_from_json(const json& j) {
  PipelineConfig c;
  auto get = [&](const char* key, auto& dst) {
    if (j.contains(key)) dst = j[key].get<std::decay_t<decltype(dst)>>();
  };
  get("corpus", c.corpus);
  get("measurements", c.measurements);
  get("annotations", c.annotations);
  get("out_dir", c.out_dir);
  if (j.contains("algorithm")) c.algorithm = parse_algorithm(j["algorithm"].get<std::string>());
  get("min_support_count", c.min_support_count);
  get("min_confidence", c.min_confidence);
  get("n", c.search.n);
  get("max_level", c.search.max_level);
  get("weights", c.search.weights);
  get("seed", c.search.seed);
  if (j.contains("dif")) c.cloud.dif = parse_dif(j["dif"].get<std::string>());
  if (j.contains("modality")) c.cloud.modality = parse_modality(j["modality"].get<std::string>());
  get("r", c.rbf.r);
  get("radius", c.rbf.radius);
  get("sigma", c.rbf.sigma);
  get("k", c.rbf.k);
  get("render_scale", c.render_scale);
  get("repeats", c.eval.repeats);
  get("train_frac", c.eval.train_frac);
  get("stratified", c.eval.stratified);
  get("trees", c.assessor.trees);
  get("rounds", c.assessor.rounds);
  get("assessor_seed", c.assessor.seed);
  get("worst_case", c.worst_case);
  c.eval.seed = c.assessor.seed;
  return c;
}

inline void validate(const PipelineConfig& c) {
  c.rbf.validate();
  if (c.search.n < 1) throw Error("n must be >= 1");
  if (!(c.min_confidence >= 0.0) || c.min_confidence >= 1.0) throw Error("min_confidence must lie in [0, 1)");
  if (c.render_scale < 1) throw Error("render scale must be >= 1");
}

/// Runs every stage in order, writing into out_dir. Returns the per-stage
/// summaries.
inline json run_pipeline(const PipelineConfig& cfg_in, const fs::path& base_dir) {
  PipelineConfig cfg = cfg_in;
  validate(cfg);
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? p : (base_dir / p).string(); };
  const std::string corpus = resolve(cfg.corpus), measurements = resolve(cfg.measurements),
                    annotations = resolve(cfg.annotations), out = resolve(cfg.out_dir);
  ensure_dir(out);
  auto at = [&](const char* name) { return (fs::path(out) / name).string(); };

  json stages = json::array();
  auto run = [&](const char* name, auto&& fn) {
    try {
      stages.push_back(fn());
    } catch (const Error& e) {
      throw Error(std::string("[") + name + "] " + e.what());
    }
  };
  MineOptions mo{cfg.algorithm, std::nullopt, cfg.min_support_count};
  run("mine", [&] { return stage_mine(corpus, mo, at("support.json")); });
  run("build-ontology", [&] { return stage_build_ontology(corpus, at("support.json"), cfg.min_confidence, at("ontology.json")); });
  run("search", [&] { return stage_search(corpus, at("ontology.json"), cfg.search, at("manifest.jsonl")); });
  run("distances", [&] {
    return stage_distances(corpus, at("ontology.json"), at("manifest.jsonl"), cfg.search.max_level, at("distances.jsonl"));
  });
  run("pointcloud", [&] { return stage_pointcloud(at("manifest.jsonl"), at("distances.jsonl"), measurements, cfg.cloud, at("clouds")); });
  run("resample", [&] { return stage_resample(at("clouds"), cfg.rbf, at("matrices")); });
  run("render", [&] { return stage_render(at("matrices"), cfg.render_scale, at("clouds")); });
  run("features", [&] { return stage_features(at("matrices"), at("features.jsonl")); });
  std::optional<WorstCaseInputs> wc;
  if (cfg.worst_case) wc = WorstCaseInputs{measurements, at("distances.jsonl")};
  run("evaluate", [&] { return stage_evaluate(at("features.jsonl"), annotations, cfg.eval, cfg.assessor, wc, at("report.json")); });
  return stages;
}

inline json run_pipeline_file(const std::string& config_path) {
  json j;
  try {
    j = json::parse(read_text_file(config_path));
  } catch (const json::exception& e) {
    throw Error(config_path + ": " + e.what());
  }
  return run_pipeline(pipeline_config_from_json(j), fs::path(config_path).parent_path());
}

/// Writes a synthetic bundle plus a pipeline.json that reproduces its manifest.
inline json stage_synth(const SynthSpec& spec, const std::string& out_dir) {
  const SynthBundle b = generate(spec);
  ensure_dir(out_dir);
  const fs::path dir(out_dir);
  write_text_file((dir / "corpus.jsonl").string(), b.corpus_jsonl);
  write_text_file((dir / "manifest.jsonl").string(), save_manifest(b.manifest));
  std::vector<json> ms, labels, models;
  for (const auto& m : b.measurements) ms.push_back(raw_measurement_to_json(m));
  for (const auto& m : b.models) {
    labels.push_back({{"model_id", m.model_id}, {"annotator", "truth"}, {"label", profile_label(m.profile)}});
    models.push_back({{"model_id", m.model_id}, {"profile", to_string(m.profile)}});
  }
  write_text_file((dir / "measurements.jsonl").string(), to_jsonl(ms));
  write_text_file((dir / "labels.jsonl").string(), to_jsonl(labels));
  write_text_file((dir / "models.jsonl").string(), to_jsonl(models));

  PipelineConfig pc;
  pc.min_support_count = spec.min_support_count;
  pc.min_confidence = spec.min_confidence;
  pc.search = synth_search_config(spec);
  pc.assessor.seed = spec.seed;
  pc.eval.seed = spec.seed;
  write_text_file((dir / "pipeline.json").string(), pipeline_config_to_json(pc).dump(2) + "\n");
  return {{"stage", "synth"}, {"models", b.models.size()}, {"manifest_rows", b.manifest.size()},
          {"measurements", b.measurements.size()}, {"out", out_dir}};
}

}  // namespace bginv
