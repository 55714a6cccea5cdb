#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "synthetic.hpp"
#include "uuaudit/distance.hpp"
#include "uuaudit/errors.hpp"
#include "uuaudit/search_state.hpp"
#include "uuaudit/utility.hpp"

using namespace uuaudit;
namespace ut = uuaudit::testing;

namespace {

TestSet line_set(const std::vector<double>& xs, const std::vector<double>& cs) {
  std::vector<TestPoint> pts;
  for (std::size_t i = 0; i < xs.size(); ++i)
    pts.push_back({ut::point_id(i), {xs[i]}, cs[i], "pos", std::nullopt});
  return TestSet(std::move(pts));
}

// Queries a random subset of points, answering from the ground truth.
SearchState random_state(const AuditData& d, Rng& rng) {
  SearchState st(d.set);
  const std::size_t q = rng.below(d.set.size());
  for (std::size_t t = 0; t < q; ++t) {
    const std::size_t i = rng.below(d.set.size());
    if (!st.is_queried(i)) st.record(d.set, i, *d.truth[i]);
  }
  return st;
}

}  // namespace

TEST(Reward, Values) {
  EXPECT_NEAR(reward(0.5), std::log(2.0), 1e-15);
  EXPECT_NEAR(reward(0.9), std::log(10.0), 1e-12);
  EXPECT_EQ(reward(0.0), 0.0);
  EXPECT_NEAR(reward(1.0), std::log(1e6), 1e-6);
  EXPECT_THROW(reward(1.1), DomainError);
  EXPECT_THROW(reward(-0.01), DomainError);
}

TEST(FacilityUtility, EmptyEqualsMinusCap) {
  const TestSet ts = line_set({0, 1, 2}, {0.7, 0.7, 0.7});
  const SearchState st(ts, 2.5);
  EXPECT_EQ(facility_utility(ts, st).total, -2.5);
}

TEST(FacilityUtility, CoincidentUuHasNoPenalty) {
  const TestSet ts = line_set({3, 3, 3}, {0.5, 0.5, 0.5});
  SearchState st(ts);
  st.record(ts, 1, "neg");
  EXPECT_NEAR(facility_utility(ts, st).total, std::log(2.0), 1e-15);
}

TEST(FacilityUtility, CollinearThreePoints) {
  const TestSet ts = line_set({0, 1, 2}, {0.9, 0.7, 0.8});
  SearchState st(ts);
  st.record(ts, 0, "neg");
  const UtilityValue w = facility_utility(ts, st);
  EXPECT_NEAR(w.total, std::log(10.0) - 1.0, 1e-12);
  EXPECT_NEAR(w.total, ut::naive_facility(ts, {0}, st.d_cap()), 1e-12);
  EXPECT_NEAR(w.reward_term - w.penalty_term, w.total, 1e-15);
}

TEST(FacilityUtility, WrongStateSize) {
  const TestSet a = line_set({0, 1, 2}, {0.9, 0.7, 0.8});
  const TestSet b = line_set({0, 1}, {0.9, 0.7});
  const SearchState st(b);
  EXPECT_THROW(facility_utility(a, st), ConsistencyError);
}

TEST(ExpectedFl, Branches) {
  const TestSet ts = line_set({0, 1, 2}, {0.9, 0.7, 0.8});
  SearchState st(ts);
  st.record(ts, 0, "neg");
  const double w = facility_utility(ts, st).total;
  EXPECT_EQ(expected_fl_utility(ts, st, 2, 0.0), w);
  EXPECT_NEAR(expected_fl_utility(ts, st, 2, 1.0),
              std::log(10.0) + std::log(5.0) - 1.0 / 3.0, 1e-12);
  const double hand = 0.5 * (std::log(10.0) + std::log(5.0) - 1.0 / 3.0) +
                      0.5 * (std::log(10.0) - 1.0);
  EXPECT_NEAR(expected_fl_utility(ts, st, 2, 0.5), hand, 1e-12);
  EXPECT_NEAR(ut::naive_expected_fl(ts, {0}, 2, 0.5, st.d_cap()), hand, 1e-12);
  EXPECT_THROW(expected_fl_utility(ts, st, 0, 0.5), ReuseError);
}

TEST(FlGain, ZeroPhiAndCoincidentCandidate) {
  const TestSet ts = line_set({4, 4, 1}, {0.6, 0.8, 0.9});
  SearchState st(ts);
  st.record(ts, 0, "neg");
  EXPECT_EQ(fl_gain(ts, st, 1, 0.0), 0.0);
  EXPECT_NEAR(fl_gain(ts, st, 1, 0.3), 0.3 * reward(0.8), 1e-15);
}

TEST(FlGain, IdentityAgainstExpectationOnRandomInstances) {
  Rng rng(11);
  int checked = 0;
  while (checked < 200) {
    const AuditData d = ut::random_instance(rng, 2 + rng.below(20), 1 + rng.below(3),
                                            rng.below(2) == 1);
    const SearchState st = random_state(d, rng);
    for (std::size_t c = 0; c < d.set.size() && checked < 200; ++c) {
      if (st.is_queried(c)) continue;
      const double phi = rng.unit();
      const double w = facility_utility(d.set, st).total;
      const double e = expected_fl_utility(d.set, st, c, phi);
      const double g = fl_gain(d.set, st, c, phi);
      EXPECT_GE(g, 0.0);
      EXPECT_NEAR(g + w, e, 1e-10);
      EXPECT_NEAR(e, ut::naive_expected_fl(d.set, st.uus(), c, phi, st.d_cap()), 1e-10);
      ++checked;
    }
  }
}

TEST(FlGain, ArgmaxMatchesExpectationArgmax) {
  Rng rng(12);
  for (int t = 0; t < 300; ++t) {
    const AuditData d = ut::random_instance(rng, 2 + rng.below(29), 1 + rng.below(3),
                                            rng.below(2) == 1);
    const SearchState st = random_state(d, rng);
    std::vector<double> phi(d.set.size());
    for (auto& p : phi) p = rng.below(4) == 0 ? 0.5 : rng.unit();
    std::vector<bool> eligible(d.set.size());
    for (std::size_t i = 0; i < eligible.size(); ++i) eligible[i] = !st.is_queried(i);
    const long a = ut::argmax_by_id(d.set, eligible, [&](std::size_t i) {
      return fl_gain(d.set, st, i, phi[i]);
    });
    const long b = ut::argmax_by_id(d.set, eligible, [&](std::size_t i) {
      return ut::naive_expected_fl(d.set, st.uus(), i, phi[i], st.d_cap());
    });
    EXPECT_EQ(a, b) << "instance " << t;
  }
}

TEST(Similarity, Values) {
  const std::vector<double> x{1.0, 2.0};
  EXPECT_EQ(similarity(x, x), 1.0);
  const std::vector<double> q{1.0 + std::log(2.0), 2.0};
  EXPECT_NEAR(similarity(x, q), 0.5, 1e-15);
}

TEST(CoverageUtility, Values) {
  const TestSet one = line_set({1.5}, {0.9});
  SearchState st(one);
  EXPECT_EQ(coverage_utility(one, st), 0.0);
  st.record(one, 0, "neg");
  EXPECT_NEAR(coverage_utility(one, st), 0.9, 1e-15);
}

TEST(CoverageUtility, MatchesNaive) {
  Rng rng(13);
  for (int t = 0; t < 100; ++t) {
    const AuditData d = ut::random_instance(rng, 1 + rng.below(20), 1 + rng.below(3), false);
    const SearchState st = random_state(d, rng);
    EXPECT_NEAR(coverage_utility(d.set, st), ut::naive_coverage(d.set, st.uus()), 1e-12);
  }
}

TEST(ExpectedCoverageGain, Values) {
  const TestSet ts = line_set({2, 2, 2}, {0.9, 0.7, 0.8});
  const SearchState st(ts);
  EXPECT_EQ(expected_coverage_gain(ts, st, 1, 0.0), 0.0);
  EXPECT_NEAR(expected_coverage_gain(ts, st, 1, 1.0), 0.9 + 0.7 + 0.8, 1e-12);
}

TEST(ExpectedCoverageGain, MatchesTwoBranchExpectation) {
  Rng rng(14);
  for (int t = 0; t < 100; ++t) {
    const AuditData d = ut::random_instance(rng, 2 + rng.below(20), 1 + rng.below(3), false);
    const SearchState st = random_state(d, rng);
    for (std::size_t c = 0; c < d.set.size(); ++c) {
      if (st.is_queried(c)) continue;
      const double phi = rng.unit();
      EXPECT_NEAR(expected_coverage_gain(d.set, st, c, phi),
                  ut::naive_expected_coverage_increase(d.set, st.uus(), c, phi), 1e-10);
    }
  }
}

TEST(SearchStateTest, NearestCacheAndErrors) {
  Rng rng(15);
  for (int t = 0; t < 50; ++t) {
    const AuditData d = ut::random_instance(rng, 1 + rng.below(25), 2, false);
    const SearchState st = random_state(d, rng);
    for (std::size_t x = 0; x < d.set.size(); ++x) {
      double m = st.d_cap();
      for (std::size_t q : st.uus()) m = std::min(m, ut::naive_distance(d.set[x], d.set[q]));
      EXPECT_EQ(st.nearest_uu_dist()[x], m);
    }
    EXPECT_LE(st.uu_count(), st.queried().size());
  }
  const TestSet ts = line_set({0, 1}, {0.9, 0.7});
  SearchState st(ts, std::nullopt, 1);
  st.record(ts, 0, "pos");
  EXPECT_FALSE(st.is_uu(0));
  EXPECT_THROW(st.record(ts, 0, "pos"), ReuseError);
  EXPECT_THROW(st.record(ts, 1, "pos"), ConfigError);
  SearchState fresh(ts);
  EXPECT_THROW(fresh.record(ts, 5, "pos"), ConsistencyError);
}
