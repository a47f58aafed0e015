#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "bginv/signals.hpp"
#include "test_util.hpp"

namespace bginv {
namespace {

TEST(Reduce, Modalities) {
  EXPECT_DOUBLE_EQ(reduce_vector({0.1, 0.9, 0.3}, Modality::max), 0.9);
  EXPECT_DOUBLE_EQ(reduce_vector({0.2, 0.4}, Modality::mean), 0.3);
  RawMeasurement s{"m", "t", "p", 0.7, {}, std::nullopt};
  for (Modality md : {Modality::max, Modality::mean}) EXPECT_DOUBLE_EQ(reduce_measurements({s}, md)[0].value, 0.7);
  EXPECT_THROW(reduce_vector({}, Modality::max), Error);
  EXPECT_THROW(reduce_vector({0.1, std::nan("")}, Modality::mean), Error);
}

TEST(Reduce, RejectsDuplicatesAndNonFinite) {
  RawMeasurement a{"m", "t", "p", 0.1, {}, std::nullopt};
  EXPECT_THROW(reduce_measurements({a, a}, Modality::max), Error);
  RawMeasurement inf{"m", "t", "q", std::numeric_limits<double>::infinity(), {}, std::nullopt};
  EXPECT_THROW(reduce_measurements({inf}, Modality::max), Error);
}

TEST(MeasurementsFile, ParsesAndReportsLine) {
  const std::string dir = testing::scratch_dir("measurements_file");
  write_text_file(dir + "/ok.jsonl",
                  R"({"model_id":"m","test_id":"t","position":"p","value":0.5,"correct":true})"
                  "\n"
                  R"({"model_id":"m","test_id":"u","position":"p","vector":[0.1,0.3]})"
                  "\n");
  const auto raw = load_measurements_file(dir + "/ok.jsonl");
  ASSERT_EQ(raw.size(), 2u);
  EXPECT_EQ(raw[0].correct, std::optional<bool>(true));
  EXPECT_EQ(raw[1].vector.size(), 2u);
  write_text_file(dir + "/bad.jsonl",
                  R"({"model_id":"m","test_id":"t","position":"p","value":0.5})"
                  "\n"
                  R"({"model_id":"m","test_id":"u","position":"p","vector":[]})"
                  "\n");
  try {
    load_measurements_file(dir + "/bad.jsonl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

// Target T {sky, dog} with foreground dog; backgrounds sharing sky, one edge
// away (sky -> sea, confidence 0.5), and unreachable.
struct DistanceFixture {
  Corpus corpus;
  Ontology onto;
  Manifest manifest;
};

DistanceFixture distance_fixture() {
  DistanceFixture f;
  f.corpus.add("T", Role::target, {"sky", "dog"}, "dog");
  f.corpus.add("Bshared", Role::background, {"sky", "tree"});
  f.corpus.add("Bedge", Role::background, {"sea"});
  f.corpus.add("Bfar", Role::background, {"desert"});
  f.corpus.add("Btwo", Role::background, {"sand"});
  f.onto = Ontology(f.corpus.keyword_table());
  auto k = [&](const char* s) { return f.onto.keyword_id(s); };
  f.onto.add_edge({k("sky"), k("sea"), 0.5, 1});
  f.onto.add_edge({k("sea"), k("sky"), 1.0, 1});
  f.onto.add_edge({k("sea"), k("sand"), 0.8, 1});
  // The foreground's own edges must not shorten anything.
  f.onto.add_edge({k("dog"), k("desert"), 1.0, 1});
  for (const char* b : {"Bshared", "Bedge", "Bfar", "Btwo"})
    f.manifest.push_back({make_test_id("T", b), "T", b, 0});
  return f;
}

TEST(AssignDistances, FormulaExamples) {
  const auto f = distance_fixture();
  const auto d = assign_distances(f.corpus, f.onto, f.manifest, 4);
  EXPECT_DOUBLE_EQ(d.at("T"), 0.0);
  EXPECT_DOUBLE_EQ(d.at("T__Bshared"), 0.5);
  EXPECT_DOUBLE_EQ(d.at("T__Bedge"), 1.5);
  EXPECT_DOUBLE_EQ(d.at("T__Btwo"), 2.0 + (1.0 - 0.4));
  EXPECT_DOUBLE_EQ(d.at("T__Bfar"), 5.0);
  EXPECT_EQ(d.target_of.at("T__Bedge"), "T");
  EXPECT_THROW(d.at("nope"), Error);
}

TEST(AssignDistances, IndependentOfKeywordEnumerationOrder) {
  // Same images, keywords interned in a different order.
  const auto f = distance_fixture();
  Corpus c;
  c.add("Btwo", Role::background, {"sand"});
  c.add("Bfar", Role::background, {"desert"});
  c.add("Bedge", Role::background, {"sea"});
  c.add("Bshared", Role::background, {"tree", "sky"});
  c.add("T", Role::target, {"dog", "sky"}, "dog");
  Ontology o(c.keyword_table());
  for (const auto& e : f.onto.edges())
    o.add_edge({o.keyword_id(f.onto.keyword_table()[e.from]), o.keyword_id(f.onto.keyword_table()[e.to]), e.confidence, e.count});
  EXPECT_EQ(assign_distances(c, o, f.manifest, 4).distance, assign_distances(f.corpus, f.onto, f.manifest, 4).distance);
}

TEST(DistancesFile, RoundTrip) {
  const auto f = distance_fixture();
  const auto d = assign_distances(f.corpus, f.onto, f.manifest, 4);
  const std::string dir = testing::scratch_dir("distances_file");
  write_text_file(dir + "/d.jsonl", save_distances(d));
  const auto back = load_distances_file(dir + "/d.jsonl");
  EXPECT_EQ(back.distance, d.distance);
  EXPECT_EQ(back.target_of, d.target_of);
}

// l targets with n testing images each; distances and values from `rng`.
struct CloudInputs {
  Manifest manifest;
  DistanceAssignment dist;
  std::vector<Measurement> ms;
};

CloudInputs cloud_inputs(std::size_t l, std::size_t n, std::uint64_t seed, bool constant = false) {
  Rng rng(seed);
  CloudInputs in;
  for (std::size_t t = 0; t < l; ++t) {
    const std::string tid = "T" + std::to_string(t);
    in.dist.distance[tid] = 0.0;
    in.ms.push_back({"m", tid, "p", constant ? 0.3 : rng.uniform(), std::nullopt});
    for (std::size_t j = 0; j < n; ++j) {
      const std::string bid = "B" + std::to_string(t) + "_" + std::to_string(j);
      const std::string test = make_test_id(tid, bid);
      in.manifest.push_back({test, tid, bid, 0});
      in.dist.distance[test] = rng.uniform(0.5, 5.0);
      in.ms.push_back({"m", test, "p", constant ? 0.3 : rng.uniform(), std::nullopt});
    }
  }
  return in;
}

TEST(PointCloud, Cardinality) {
  for (auto [l, n] : std::vector<std::pair<std::size_t, std::size_t>>{{1, 3}, {5, 10}, {20, 25}}) {
    const auto in = cloud_inputs(l, n, 1);
    const MeasurementIndex idx(in.ms);
    const auto pc = build_point_cloud(idx, in.dist, in.manifest, "m", "p", DifMode::subtract);
    EXPECT_EQ(pc.points.size(), l * n * (n + 1));
  }
}

TEST(PointCloud, SubtractIsAntisymmetric) {
  const auto in = cloud_inputs(3, 6, 2);
  const MeasurementIndex idx(in.ms);
  const auto pc = build_point_cloud(idx, in.dist, in.manifest, "m", "p", DifMode::subtract);
  auto key = [](const CloudPoint& p) { return std::make_tuple(p.da, p.db, p.v); };
  std::vector<std::tuple<double, double, double>> pts, mirrored;
  for (const auto& p : pc.points) {
    pts.push_back(key(p));
    mirrored.push_back({p.db, p.da, -p.v});
  }
  std::sort(pts.begin(), pts.end());
  std::sort(mirrored.begin(), mirrored.end());
  EXPECT_EQ(pts, mirrored);
}

TEST(PointCloud, TwoValueExample) {
  Manifest m{{"T__B", "T", "B", 1}};
  DistanceAssignment d;
  d.distance = {{"T", 0.0}, {"T__B", 1.5}};
  std::vector<Measurement> ms{{"m", "T", "p", 0.9, std::nullopt}, {"m", "T__B", "p", 0.7, std::nullopt}};
  const auto pc = build_point_cloud(MeasurementIndex(ms), d, m, "m", "p", DifMode::subtract);
  ASSERT_EQ(pc.points.size(), 2u);
  EXPECT_EQ(pc.points[0].da, 0.0);
  EXPECT_EQ(pc.points[0].db, 1.5);
  EXPECT_NEAR(pc.points[0].v, 0.2, 1e-15);
  EXPECT_NEAR(pc.points[1].v, -0.2, 1e-15);
  EXPECT_EQ(pc.d_max, 1.5);
  EXPECT_EQ(build_point_cloud(MeasurementIndex(ms), d, m, "m", "p", DifMode::subtract, 4.0).d_max, 4.0);
}

TEST(PointCloud, AbsdiffIsAbsoluteSubtract) {
  const auto in = cloud_inputs(2, 5, 3);
  const MeasurementIndex idx(in.ms);
  const auto s = build_point_cloud(idx, in.dist, in.manifest, "m", "p", DifMode::subtract);
  const auto a = build_point_cloud(idx, in.dist, in.manifest, "m", "p", DifMode::absdiff);
  ASSERT_EQ(s.points.size(), a.points.size());
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    EXPECT_EQ(a.points[i].da, s.points[i].da);
    EXPECT_EQ(a.points[i].v, std::abs(s.points[i].v));
  }
}

TEST(PointCloud, ConstantMeasurementsGiveZeros) {
  const auto in = cloud_inputs(2, 4, 4, true);
  const auto pc = build_point_cloud(MeasurementIndex(in.ms), in.dist, in.manifest, "m", "p", DifMode::subtract);
  for (const auto& p : pc.points) EXPECT_EQ(p.v, 0.0);
}

TEST(PointCloud, MissingMeasurementNamesTheRow) {
  auto in = cloud_inputs(1, 3, 5);
  in.ms.erase(in.ms.begin() + 2);
  try {
    build_point_cloud(MeasurementIndex(in.ms), in.dist, in.manifest, "m", "p", DifMode::subtract);
    FAIL();
  } catch (const Error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("T0__B0_1"), std::string::npos);
    EXPECT_NE(msg.find("'m'"), std::string::npos);
    EXPECT_NE(msg.find("'p'"), std::string::npos);
  }
}

TEST(PointCloud, JsonRoundTrip) {
  const auto in = cloud_inputs(2, 3, 6);
  const auto pc = build_point_cloud(MeasurementIndex(in.ms), in.dist, in.manifest, "m", "p", DifMode::absdiff);
  const auto back = point_cloud_from_json(json::parse(point_cloud_to_json(pc).dump()));
  EXPECT_EQ(back.points, pc.points);
  EXPECT_EQ(back.d_max, pc.d_max);
  EXPECT_EQ(back.dif, DifMode::absdiff);
}

}  // namespace
}  // namespace bginv
