#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>

#include "bginv/stages.hpp"
#include "test_util.hpp"

namespace bginv {
namespace {

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

RunResult run(const std::string& dir, const std::string& args) {
  const std::string out = dir + "/stdout.txt", err = dir + "/stderr.txt";
  const std::string cmd = std::string(BGINV_CLI_PATH) + " " + args + " >" + out + " 2>" + err;
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_text_file(out);
  r.err = read_text_file(err);
  return r;
}

// Small synthetic bundle shared by the end-to-end tests.
std::string synth_args(const std::string& out_dir) {
  return "synth --out-dir " + out_dir + " --backgrounds 200 --targets 3 --per-target 5 --models-per-profile 4";
}

TEST(Cli, UnknownFlagIsUsageError) {
  const std::string dir = testing::scratch_dir("cli_unknown_flag");
  const auto r = run(dir, "mine --corpus x --out y --bogus 3");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE((r.out + r.err).find("Usage"), std::string::npos);
  EXPECT_EQ(run(dir, "no-such-command").code, 2);
  EXPECT_EQ(run(dir, "").code, 2);
}

TEST(Cli, ResampleRejectsTinyGridBeforeReadingInputs) {
  const std::string dir = testing::scratch_dir("cli_resample_r1");
  const auto r = run(dir, "resample --clouds-dir " + dir + "/does-not-exist --r 1 --out-dir " + dir + "/m");
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("--r"), std::string::npos);
  EXPECT_EQ(r.err.find("does-not-exist"), std::string::npos);
}

TEST(Cli, RuntimeErrorNamesStageAndInput) {
  const std::string dir = testing::scratch_dir("cli_runtime_error");
  write_text_file(dir + "/bad.jsonl", "{\"id\":\"a\",\"role\":\"background\",\"keywords\":[]}\n");
  const auto r = run(dir, "mine --corpus " + dir + "/bad.jsonl --out " + dir + "/s.json");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("error: mine"), std::string::npos);
  EXPECT_NE(r.err.find("bad.jsonl"), std::string::npos);
}

TEST(Cli, SynthThenPipeline) {
  const std::string dir = testing::scratch_dir("cli_synth_pipeline");
  ASSERT_EQ(run(dir, synth_args(dir + "/bundle")).code, 0);
  const auto r = run(dir, "pipeline --config " + dir + "/bundle/pipeline.json");
  ASSERT_EQ(r.code, 0) << r.err;
  const json summary = json::parse(r.out);
  EXPECT_EQ(summary["stage"], "pipeline");
  const json report = json::parse(read_text_file(dir + "/bundle/run/report.json"));
  EXPECT_EQ(report["accuracies"].size(), 10u);
  EXPECT_TRUE(report["assessors"].contains("threshold_baseline"));
  EXPECT_FALSE(list_files(dir + "/bundle/run/matrices", ".ppm").empty());
}

// Stage-by-stage invocation must reproduce the pipeline's artifacts.
TEST(Cli, StagesReproducePipeline) {
  const std::string dir = testing::scratch_dir("cli_stages");
  const std::string b = dir + "/bundle";
  ASSERT_EQ(run(dir, synth_args(b)).code, 0);
  ASSERT_EQ(run(dir, "pipeline --config " + b + "/pipeline.json").code, 0);
  const std::string s = dir + "/stages";
  ensure_dir(s);
  const std::vector<std::string> steps = {
      "mine --corpus " + b + "/corpus.jsonl --min-support-count 3 --out " + s + "/support.json",
      "build-ontology --corpus " + b + "/corpus.jsonl --support " + s + "/support.json --out " + s + "/ontology.json",
      "search --corpus " + b + "/corpus.jsonl --ontology " + s + "/ontology.json --n 5 --max-level 4 --seed 7 --out " + s +
          "/manifest.jsonl",
      "distances --corpus " + b + "/corpus.jsonl --ontology " + s + "/ontology.json --manifest " + s +
          "/manifest.jsonl --max-level 4 --out " + s + "/distances.jsonl",
      "pointcloud --manifest " + s + "/manifest.jsonl --distances " + s + "/distances.jsonl --measurements " + b +
          "/measurements.jsonl --out-dir " + s + "/clouds",
      "resample --clouds-dir " + s + "/clouds --out-dir " + s + "/matrices",
      "render --matrices-dir " + s + "/matrices --clouds-dir " + s + "/clouds",
      "features --matrices-dir " + s + "/matrices --out " + s + "/features.jsonl",
      "evaluate --features " + s + "/features.jsonl --annotations " + b + "/labels.jsonl --seed 7 --measurements " + b +
          "/measurements.jsonl --distances " + s + "/distances.jsonl --out " + s + "/report.json",
  };
  for (const auto& step : steps) {
    const auto r = run(dir, step);
    ASSERT_EQ(r.code, 0) << step << "\n" << r.err;
    EXPECT_NO_THROW(json::parse(r.out)) << step;
  }
  for (const char* f : {"support.json", "ontology.json", "manifest.jsonl", "distances.jsonl", "features.jsonl", "report.json"})
    EXPECT_EQ(read_text_file(s + "/" + f), read_text_file(b + "/run/" + f)) << f;
  for (const auto& f : list_files(s + "/matrices", ".json"))
    EXPECT_EQ(read_text_file(f), read_text_file(b + "/run/matrices/" + fs::path(f).filename().string()));
}

TEST(Cli, TrainAndAssess) {
  const std::string dir = testing::scratch_dir("cli_train_assess");
  const std::string b = dir + "/bundle";
  ASSERT_EQ(run(dir, synth_args(b)).code, 0);
  ASSERT_EQ(run(dir, "pipeline --config " + b + "/pipeline.json").code, 0);
  const std::string run_dir = b + "/run";
  for (const char* kind : {"random_forest", "adaboost"}) {
    const std::string model = dir + "/" + kind + ".json";
    auto r = run(dir, std::string("train --kind ") + kind + " --features " + run_dir + "/features.jsonl --annotations " + b +
                          "/labels.jsonl --trees 20 --rounds 20 --out " + model);
    ASSERT_EQ(r.code, 0) << r.err;
    r = run(dir, "assess --assessor " + model + " --features " + run_dir + "/features.jsonl --out " + dir + "/pred.jsonl");
    ASSERT_EQ(r.code, 0) << r.err;
    std::size_t rows = 0;
    for_each_jsonl_file(dir + "/pred.jsonl", [&](const json& j, std::size_t) {
      EXPECT_TRUE(valid_label(j.at("label").get<Label>()));
      ++rows;
    });
    EXPECT_EQ(rows, 12u);
  }
  const auto r = run(dir, "train --kind worst-case --annotations " + b + "/labels.jsonl --measurements " + b +
                              "/measurements.jsonl --distances " + run_dir + "/distances.jsonl --out " + dir + "/wc.json");
  EXPECT_EQ(r.code, 0) << r.err;
}

TEST(Cli, ExpandPrintsLevels) {
  const std::string dir = testing::scratch_dir("cli_expand");
  write_text_file(dir + "/c.jsonl", testing::kFourImageCorpus);
  ASSERT_EQ(run(dir, "mine --corpus " + dir + "/c.jsonl --min-support 0.25 --out " + dir + "/s.json").code, 0);
  ASSERT_EQ(run(dir, "build-ontology --corpus " + dir + "/c.jsonl --support " + dir + "/s.json --min-confidence 0.4 --out " +
                         dir + "/o.json")
                .code,
            0);
  const auto r = run(dir, "expand --ontology " + dir + "/o.json --keywords sky --max-level 3");
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["levels"][1], json::array({"sky", "tree"}));
  EXPECT_EQ(j["levels"][2], json::array({"sky", "tree", "water"}));
}

TEST(Cli, ReRunsAreIdempotent) {
  const std::string dir = testing::scratch_dir("cli_idempotent");
  ASSERT_EQ(run(dir, synth_args(dir + "/a")).code, 0);
  ASSERT_EQ(run(dir, synth_args(dir + "/b")).code, 0);
  for (const char* f : {"corpus.jsonl", "manifest.jsonl", "measurements.jsonl", "labels.jsonl"})
    EXPECT_EQ(read_text_file(dir + "/a/" + f), read_text_file(dir + "/b/" + f)) << f;
}

}  // namespace
}  // namespace bginv
