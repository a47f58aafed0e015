// Command-line front end: one subcommand per pipeline stage.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "bginv/annotate_server.hpp"
#include "bginv/stages.hpp"

namespace {

using bginv::json;

struct WorstCaseFlags {
  std::string measurements;
  std::string distances;

  std::optional<bginv::WorstCaseInputs> get() const {
    if (measurements.empty() && distances.empty()) return std::nullopt;
    if (measurements.empty() || distances.empty())
      throw bginv::Error("--measurements and --distances must be given together");
    return bginv::WorstCaseInputs{measurements, distances};
  }
};

std::optional<std::string> opt_string(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Background-invariance testing pipeline: ontology mining, semantic background search, "
               "variance matrices and invariance assessors"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  std::string stage;
  std::function<json()> action;
  auto bind = [&](CLI::App* sub, std::function<json()> fn) {
    sub->callback([&, sub, fn] {
      stage = sub->get_name();
      action = fn;
    });
  };

  // mine
  std::string corpus, out, algorithm = "fpgrowth";
  std::size_t min_support_count = 3;
  double min_support = 0.0;
  auto* mine = app.add_subcommand("mine", "Frequent keyword pairs over background records");
  mine->add_option("--corpus", corpus, "Corpus JSONL")->required();
  mine->add_option("--algorithm", algorithm)->check(CLI::IsMember({"apriori", "fpgrowth", "bruteforce"}));
  auto* ms_count = mine->add_option("--min-support-count", min_support_count, "Absolute support threshold")->check(CLI::PositiveNumber);
  mine->add_option("--min-support", min_support, "Fractional support threshold in (0,1]")
      ->check(CLI::Range(1e-12, 1.0))
      ->excludes(ms_count);
  mine->add_option("--out", out)->required();
  bind(mine, [&] {
    bginv::MineOptions o{bginv::parse_algorithm(algorithm), std::nullopt, min_support_count};
    if (min_support > 0.0) o.min_support = min_support;
    return bginv::stage_mine(corpus, o, out);
  });

  // build-ontology
  std::string support;
  double min_confidence = 0.0;
  auto* bo = app.add_subcommand("build-ontology", "Confidence-weighted keyword graph");
  bo->add_option("--corpus", corpus)->required();
  bo->add_option("--support", support)->required();
  bo->add_option("--min-confidence", min_confidence)->check(CLI::Range(0.0, 0.999999999));
  bo->add_option("--out", out)->required();
  bind(bo, [&] { return bginv::stage_build_ontology(corpus, support, min_confidence, out); });

  // expand
  std::string ontology;
  std::vector<std::string> keywords;
  std::size_t max_level = 4;
  auto* ex = app.add_subcommand("expand", "Level-wise keyword expansion");
  ex->add_option("--ontology", ontology)->required();
  ex->add_option("--keywords", keywords)->required()->delimiter(',');
  ex->add_option("--max-level", max_level);
  bind(ex, [&] { return bginv::stage_expand(ontology, keywords, max_level); });

  // search
  bginv::SearchConfig search_cfg;
  auto* se = app.add_subcommand("search", "Background discovery, band sampling and composition manifest");
  se->add_option("--corpus", corpus)->required();
  se->add_option("--ontology", ontology)->required();
  se->add_option("--n", search_cfg.n)->check(CLI::PositiveNumber);
  se->add_option("--max-level", search_cfg.max_level);
  se->add_option("--weights", search_cfg.weights)->delimiter(',')->check(CLI::NonNegativeNumber);
  se->add_option("--seed", search_cfg.seed);
  se->add_option("--out", out)->required();
  bind(se, [&] { return bginv::stage_search(corpus, ontology, search_cfg, out); });

  // distances
  std::string manifest;
  auto* di = app.add_subcommand("distances", "Semantic distance of every testing image from its target");
  di->add_option("--corpus", corpus)->required();
  di->add_option("--ontology", ontology)->required();
  di->add_option("--manifest", manifest)->required();
  di->add_option("--max-level", max_level);
  di->add_option("--out", out)->required();
  bind(di, [&] { return bginv::stage_distances(corpus, ontology, manifest, max_level, out); });

  // pointcloud
  std::string distances, measurements, dif = "subtract", modality = "max", out_dir;
  double d_max = 0.0;
  auto* pc = app.add_subcommand("pointcloud", "Pairwise measurement differences at (d_a, d_b)");
  pc->add_option("--manifest", manifest)->required();
  pc->add_option("--distances", distances)->required();
  pc->add_option("--measurements", measurements)->required();
  pc->add_option("--dif", dif)->check(CLI::IsMember({"subtract", "absdiff"}));
  pc->add_option("--modality", modality)->check(CLI::IsMember({"max", "mean"}));
  pc->add_option("--d-max", d_max, "Override the distance normalisation bound")->check(CLI::PositiveNumber);
  pc->add_option("--out-dir", out_dir)->required();
  bind(pc, [&] {
    bginv::CloudOptions o{bginv::parse_dif(dif), bginv::parse_modality(modality), std::nullopt};
    if (d_max > 0.0) o.d_max = d_max;
    return bginv::stage_pointcloud(manifest, distances, measurements, o, out_dir);
  });

  // resample
  bginv::RbfConfig rbf;
  std::string clouds_dir;
  auto* rs = app.add_subcommand("resample", "Gaussian RBF resampling into r x r variance matrices");
  rs->add_option("--clouds-dir", clouds_dir)->required();
  rs->add_option("--r", rbf.r, "Grid size")->check(CLI::Range(std::size_t{2}, std::size_t{4096}));
  rs->add_option("--radius", rbf.radius, "Kernel support radius in grid units")->check(CLI::PositiveNumber);
  rs->add_option("--sigma", rbf.sigma)->check(CLI::PositiveNumber);
  rs->add_option("--k", rbf.k, "Neighbours for the fallback value")->check(CLI::PositiveNumber);
  rs->add_option("--out-dir", out_dir)->required();
  bind(rs, [&] { return bginv::stage_resample(clouds_dir, rbf, out_dir); });

  // render
  std::string matrices_dir;
  std::size_t scale = 8;
  auto* rd = app.add_subcommand("render", "Binary PPM images of variance matrices (and scatter plots)");
  rd->add_option("--matrices-dir", matrices_dir)->required();
  rd->add_option("--clouds-dir", clouds_dir, "Also render one scatter plot per model");
  rd->add_option("--scale", scale)->check(CLI::PositiveNumber);
  bind(rd, [&] { return bginv::stage_render(matrices_dir, scale, opt_string(clouds_dir)); });

  // features
  auto* fe = app.add_subcommand("features", "Statistical features per model");
  fe->add_option("--matrices-dir", matrices_dir)->required();
  fe->add_option("--out", out)->required();
  bind(fe, [&] { return bginv::stage_features(matrices_dir, out); });

  // train
  std::string features, annotations, kind = "random_forest";
  bginv::AssessorParams ap;
  WorstCaseFlags wc;
  auto* tr = app.add_subcommand("train", "Train an assessor on annotated models");
  tr->add_option("--features", features);
  tr->add_option("--annotations", annotations)->required();
  tr->add_option("--kind", kind)->check(CLI::IsMember({"random_forest", "rf", "adaboost", "worst-case", "threshold_baseline"}));
  tr->add_option("--trees", ap.trees)->check(CLI::PositiveNumber);
  tr->add_option("--rounds", ap.rounds)->check(CLI::PositiveNumber);
  tr->add_option("--seed", ap.seed);
  tr->add_option("--measurements", wc.measurements, "Worst-case baseline input");
  tr->add_option("--distances", wc.distances, "Worst-case baseline input");
  tr->add_option("--out", out)->required();
  bind(tr, [&] {
    return bginv::stage_train(opt_string(features), annotations, {bginv::parse_assessor_kind(kind), ap}, wc.get(), out);
  });

  // assess
  std::string assessor;
  auto* as = app.add_subcommand("assess", "Predict invariance labels with a trained assessor");
  as->add_option("--assessor", assessor)->required();
  as->add_option("--features", features);
  as->add_option("--measurements", wc.measurements);
  as->add_option("--distances", wc.distances);
  as->add_option("--out", out)->required();
  bind(as, [&] { return bginv::stage_assess(assessor, opt_string(features), wc.get(), out); });

  // evaluate
  bginv::EvalConfig eval;
  bool random_split = false;
  auto* ev = app.add_subcommand("evaluate", "Repeated train/test evaluation of all assessor kinds");
  ev->add_option("--features", features)->required();
  ev->add_option("--annotations", annotations)->required();
  ev->add_option("--repeats", eval.repeats)->check(CLI::PositiveNumber);
  ev->add_option("--train-frac", eval.train_frac)->check(CLI::Range(1e-9, 1.0));
  ev->add_option("--trees", ap.trees)->check(CLI::PositiveNumber);
  ev->add_option("--rounds", ap.rounds)->check(CLI::PositiveNumber);
  ev->add_option("--seed", ap.seed);
  ev->add_flag("--random-split", random_split, "Plain random instead of stratified splits");
  ev->add_option("--measurements", wc.measurements, "Adds the worst-case baseline");
  ev->add_option("--distances", wc.distances);
  ev->add_option("--out", out)->required();
  bind(ev, [&] {
    eval.seed = ap.seed;
    eval.stratified = !random_split;
    return bginv::stage_evaluate(features, annotations, eval, ap, wc.get(), out);
  });

  // synth
  bginv::SynthSpec spec;
  auto* sy = app.add_subcommand("synth", "Generate a seeded synthetic bundle");
  sy->add_option("--out-dir", out_dir)->required();
  sy->add_option("--keywords", spec.keywords)->check(CLI::PositiveNumber);
  sy->add_option("--backgrounds", spec.backgrounds)->check(CLI::PositiveNumber);
  sy->add_option("--targets", spec.targets)->check(CLI::PositiveNumber);
  sy->add_option("--per-target", spec.per_target)->check(CLI::PositiveNumber);
  sy->add_option("--models-per-profile", spec.models_per_profile)->check(CLI::PositiveNumber);
  sy->add_option("--noise", spec.noise)->check(CLI::NonNegativeNumber);
  sy->add_option("--max-level", spec.max_level);
  sy->add_option("--seed", spec.seed);
  bind(sy, [&] { return bginv::stage_synth(spec, out_dir); });

  // pipeline
  std::string config;
  auto* pl = app.add_subcommand("pipeline", "Run every stage from one config file");
  pl->add_option("--config", config)->required()->check(CLI::ExistingFile);
  bind(pl, [&] {
    json stages = bginv::run_pipeline_file(config);
    return json{{"stage", "pipeline"}, {"stages", stages.size()}, {"summary", stages.back()}};
  });

  // annotate-serve
  std::string bind_addr = "127.0.0.1:8080", static_dir;
  auto* an = app.add_subcommand("annotate-serve", "HTTP annotation API over rendered matrices");
  an->add_option("--matrices-dir", matrices_dir)->required();
  an->add_option("--annotations", annotations)->required();
  an->add_option("--bind", bind_addr, "host:port");
  an->add_option("--static-dir", static_dir, "Built annotation UI assets");
  bind(an, [&]() -> json {
    const auto colon = bind_addr.rfind(':');
    if (colon == std::string::npos) throw bginv::Error("--bind must be host:port");
    const std::string host = bind_addr.substr(0, colon);
    const int port = std::stoi(bind_addr.substr(colon + 1));
    bginv::AnnotateServer server(matrices_dir, annotations, opt_string(static_dir));
    const int bound = server.bind(host, port);
    std::cout << json{{"stage", "annotate-serve"}, {"listening", host + ":" + std::to_string(bound)}}.dump() << std::endl;
    server.serve();
    return json{{"stage", "annotate-serve"}, {"stopped", true}};
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const json summary = action();
    std::cout << summary.dump() << std::endl;
  } catch (const bginv::Error& e) {
    std::cerr << "error: " << stage << ": " << e.what() << std::endl;
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << stage << ": " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
