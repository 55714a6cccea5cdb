#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "synthetic.hpp"
#include "uuaudit/errors.hpp"
#include "uuaudit/io.hpp"
#include "uuaudit/testset.hpp"

using namespace uuaudit;
namespace ut = uuaudit::testing;

namespace {

AuditData csv(const std::string& text, LoadOptions opts = {}) {
  std::istringstream in(text);
  return read_csv(in, opts);
}

TestPoint pt(std::string id, std::vector<double> x, double c, std::string pred = "a") {
  return TestPoint{std::move(id), std::move(x), c, std::move(pred), std::nullopt};
}

}  // namespace

TEST(LoadCsv, ThreeRowsTwoFeatures) {
  const auto d = csv(
      "id,f0,f1,confidence,predicted_class\n"
      "a,0,1,0.7,x\n"
      "b,1,2,0.7,y\n"
      "c,2,3,0.7,x\n");
  EXPECT_EQ(d.set.size(), 3u);
  EXPECT_EQ(d.set.dim(), 2u);
  EXPECT_EQ(d.set[1].id, "b");
  EXPECT_EQ(d.set[2].features, (std::vector<double>{2, 3}));
  EXPECT_FALSE(d.fully_labeled());
}

TEST(LoadCsv, ColumnsFoundByNameWithOptionalLabels) {
  const auto d = csv(
      "predicted_class,confidence,f1,id,f0,true_label,display_uri\n"
      "x,0.9,5,a,4,y,http://img/1\n");
  EXPECT_EQ(d.set[0].features, (std::vector<double>{4, 5}));
  EXPECT_EQ(d.truth[0], "y");
  EXPECT_EQ(d.set[0].display_uri, "http://img/1");
  EXPECT_TRUE(d.fully_labeled());
}

TEST(LoadCsv, QuotedFields) {
  const auto d = csv(
      "id,f0,confidence,predicted_class\n"
      "\"a,1\",0.5,0.8,\"say \"\"hi\"\"\"\n");
  EXPECT_EQ(d.set[0].id, "a,1");
  EXPECT_EQ(d.set[0].predicted_class, "say \"hi\"");
}

TEST(LoadCsv, ConfidenceOutOfRangeCitesRow) {
  try {
    csv("id,f0,confidence,predicted_class\nok,0,0.5,x\nbad7,0,1.3,x\n");
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("bad7"), std::string::npos) << e.what();
  }
}

TEST(LoadCsv, DuplicateIdRejected) {
  try {
    csv("id,f0,confidence,predicted_class\na7,0,0.5,x\na7,1,0.6,x\n");
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("a7"), std::string::npos);
  }
}

TEST(LoadCsv, MissingColumnNamed) {
  try {
    csv("id,f0,predicted_class\na,0,x\n");
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("confidence"), std::string::npos);
  }
}

TEST(LoadCsv, RaggedRowIsDimensionError) {
  EXPECT_THROW(csv("id,f0,f1,confidence,predicted_class\na,0,1,0.5,x\nb,0,0.5,x\n"),
               DimensionError);
}

TEST(LoadJsonl, RaggedFeaturesIsDimensionError) {
  std::istringstream in(
      R"({"id":"a","features":[0,1],"confidence":0.5,"predicted_class":"x"})"
      "\n"
      R"({"id":"b","features":[0],"confidence":0.5,"predicted_class":"x"})"
      "\n");
  EXPECT_THROW(read_jsonl(in), DimensionError);
}

TEST(LoadJsonl, MissingKeyIsSchemaError) {
  std::istringstream in(R"({"id":"a","features":[0],"predicted_class":"x"})" "\n");
  EXPECT_THROW(read_jsonl(in), SchemaError);
}

TEST(TestSetTest, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(TestSet({}), ValidationError);
  EXPECT_THROW(TestSet({pt("a", {NAN}, 0.5)}), ValidationError);
  EXPECT_THROW(TestSet({pt("a", {0.0}, -0.1)}), ValidationError);
}

TEST(TestSetTest, CriticalClassNeverPredictedWarns) {
  const TestSet ts({pt("a", {0}, 0.5, "x")}, "z");
  ASSERT_EQ(ts.warnings().size(), 1u);
  EXPECT_NE(ts.warnings()[0].find("z"), std::string::npos);
}

TEST(TestSetTest, IsUuHonoursCriticalClass) {
  const TestSet plain({pt("a", {0}, 0.9, "x"), pt("b", {1}, 0.9, "y")});
  EXPECT_TRUE(plain.is_uu(0, "y"));
  EXPECT_FALSE(plain.is_uu(0, "x"));
  const TestSet crit = plain.with_critical_class("x");
  EXPECT_TRUE(crit.is_uu(0, "y"));
  EXPECT_FALSE(crit.is_uu(1, "x"));  // wrong, but not the critical class
}

TEST(TestSetTest, IdRankIsLexicographic) {
  const TestSet ts({pt("b", {0}, 0.5), pt("a10", {0}, 0.5), pt("a9", {0}, 0.5)});
  EXPECT_EQ(ts.id_rank(0), 2u);
  EXPECT_EQ(ts.id_rank(1), 0u);
  EXPECT_EQ(ts.id_rank(2), 1u);
  EXPECT_THROW(ts.index_of("nope"), ConsistencyError);
  EXPECT_EQ(ts.index_of("a9"), 2u);
}

TEST(RoundTrip, CsvAndJsonlBitIdentical) {
  uuaudit::Rng rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    AuditData d = ut::random_instance(rng, 1 + rng.below(30), 1 + rng.below(4), false);
    // Awkward doubles survive the text form exactly.
    std::vector<TestPoint> pts(d.set.points().begin(), d.set.points().end());
    pts[0].features[0] = 0.1 + 0.2;
    pts[0].confidence = 1.0 / 3.0;
    pts[0].display_uri = "file:///x,y.png";
    d = AuditData(TestSet(pts, "pos"), d.truth);
    d.truth[0].reset();

    std::ostringstream c;
    write_csv(c, d);
    std::istringstream ci(c.str());
    EXPECT_EQ(read_csv(ci, {"pos"}), d);

    std::ostringstream j;
    write_jsonl(j, d);
    std::istringstream ji(j.str());
    EXPECT_EQ(read_jsonl(ji, {"pos"}), d);
  }
}

TEST(SampleTestset, ExhaustiveSampleKeepsEveryPoint) {
  const AuditData d = ut::calibrated_pool(5, 1);
  const AuditData s = sample_testset(d, 5, 1);
  EXPECT_EQ(s, d);
}

TEST(SampleTestset, DeterministicAndCarriesCriticalClass) {
  const AuditData base = ut::calibrated_pool(100, 2);
  const AuditData d(base.set.with_critical_class("pos"), base.truth);
  const AuditData a = sample_testset(d, 10, 9);
  const AuditData b = sample_testset(d, 10, 9);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.set.critical_class(), "pos");
  for (std::size_t i = 0; i < a.set.size(); ++i) {
    EXPECT_EQ(a.truth[i], d.truth[d.set.index_of(a.set[i].id)]);
  }
}

TEST(SampleTestset, SeedsGiveDifferentDraws) {
  const AuditData d = ut::calibrated_pool(1000, 3);
  std::size_t equal = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    std::set<std::string> a;
    std::set<std::string> b;
    const AuditData sa = sample_testset(d, 10, 2 * s + 1);
    const AuditData sb = sample_testset(d, 10, 2 * s + 2);
    for (const auto& p : sa.set.points()) a.insert(p.id);
    for (const auto& p : sb.set.points()) b.insert(p.id);
    if (a == b) ++equal;
  }
  EXPECT_LT(equal, 100u);
  EXPECT_EQ(equal, 0u);  // C(1000,10) draws: a collision would be astonishing
}

TEST(SampleTestset, UniformInclusion) {
  // Each of 20 points should appear in a 5-point sample with probability 1/4.
  const AuditData d = ut::calibrated_pool(20, 4);
  std::vector<int> hits(20, 0);
  const int draws = 8000;
  for (int s = 0; s < draws; ++s) {
    const AuditData sample = sample_testset(d, 5, s);
    for (const auto& p : sample.set.points()) ++hits[d.set.index_of(p.id)];
  }
  const double expect = draws * 0.25;
  const double sd = std::sqrt(draws * 0.25 * 0.75);
  for (int h : hits) EXPECT_NEAR(h, expect, 4 * sd);
}

TEST(SampleTestset, SizeOutOfRange) {
  const AuditData d = ut::calibrated_pool(5, 1);
  EXPECT_THROW(sample_testset(d, 6, 1), DimensionError);
  EXPECT_THROW(sample_testset(d, 0, 1), DimensionError);
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.5), "0.5");
  EXPECT_EQ(format_double(2.0), "2");
  const double v = 0.1 + 0.2;
  EXPECT_EQ(std::stod(format_double(v)), v);
}
