// Copyright 2026 The Int2Plan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <random>

#include <gtest/gtest.h>

#include "int2plan/error.hpp"
#include "int2plan/intention.hpp"
#include "support/intention_oracles.hpp"
#include "support/scenes.hpp"

namespace int2plan {
namespace {

using testing::make_polyline;

Polyline route(std::vector<Vec2> pts) { return make_polyline(0, PolylineKind::kRoute, std::move(pts)); }

void expect_points(const std::vector<Vec2> & got, const std::vector<Vec2> & want)
{
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_LT((got[i] - want[i]).norm(), 1e-12) << i;
}

TEST(Resample, StraightTwentyMetres)
{
  expect_points(resample_polyline(route({{0, 0}, {20, 0}}), 4.0), {{4, 0}, {8, 0}, {12, 0}, {16, 0}, {20, 0}});
}

TEST(Resample, ThreeFourFive)
{
  expect_points(resample_polyline(route({{0, 0}, {3, 4}}), 5.0), {{3, 4}});
}

TEST(Resample, TooShort)
{
  EXPECT_TRUE(resample_polyline(route({{0, 0}, {1, 0}}), 4.0).empty());
}

TEST(Resample, AcrossCorner)
{
  // 3 m east then 3 m north; 4 m lands 1 m up the second leg.
  expect_points(resample_polyline(route({{0, 0}, {3, 0}, {3, 3}}), 4.0), {{3, 1}});
}

TEST(Resample, RejectsNonPositiveInterval)
{
  EXPECT_THROW(resample_polyline(route({{0, 0}, {1, 0}}), 0.0), Error);
}

TEST(RouteIntentions, PrimaryThenSecondaryThenPadding)
{
  RouteSet r;
  r.primary.push_back(route({{0, 0}, {12, 0}}));
  const Vec2 diag = Vec2(1, 1).normalized() * 8.0;
  r.secondary.push_back(route({{0, 0}, diag}));
  const auto row = sample_route_intentions(r, 4.0, 8);
  ASSERT_EQ(row.size(), 8u);
  for (int i = 0; i < 3; ++i) {
    EXPECT_TRUE(row[i].valid);
    EXPECT_EQ(row[i].source, IntentionSource::kRoutePrimary);
    EXPECT_NEAR(row[i].position.x(), 4.0 * (i + 1), 1e-12);
  }
  for (int i = 3; i < 5; ++i) {
    EXPECT_TRUE(row[i].valid);
    EXPECT_EQ(row[i].source, IntentionSource::kRouteSecondary);
  }
  EXPECT_LT((row[4].position - diag).norm(), 1e-12);
  for (int i = 5; i < 8; ++i) {
    EXPECT_FALSE(row[i].valid);
    EXPECT_EQ(row[i].position, row[4].position);
  }
}

TEST(RouteIntentions, TruncationKeepsPrimaryFirst)
{
  RouteSet r;
  r.primary.push_back(route({{0, 0}, {12, 0}}));
  r.secondary.push_back(route({{0, 0}, {0, 8}}));
  const auto row = sample_route_intentions(r, 4.0, 2);
  ASSERT_EQ(row.size(), 2u);
  EXPECT_EQ(row[0].position, Vec2(4, 0));
  EXPECT_EQ(row[1].position, Vec2(8, 0));
  EXPECT_EQ(row[1].source, IntentionSource::kRoutePrimary);
}

TEST(RouteIntentions, FullRowOnLongPrimary)
{
  // 256 m, d_r 4 m, 64 slots
  RouteSet r;
  r.primary.push_back(route({{0, 0}, {100, 0}, {256, 0}}));
  const auto row = sample_route_intentions(r, 4.0, 64);
  ASSERT_EQ(row.size(), 64u);
  for (const auto & p : row) {
    EXPECT_TRUE(p.valid);
    EXPECT_EQ(p.source, IntentionSource::kRoutePrimary);
  }
  EXPECT_NEAR(row.back().position.x(), 256.0, 1e-9);
}

TEST(RouteIntentions, EmptyPrimaryIsAnError)
{
  RouteSet r;
  r.secondary.push_back(route({{0, 0}, {12, 0}}));
  EXPECT_THROW(sample_route_intentions(r, 4.0, 4), Error);
}

TEST(RouteIntentions, ShortRouteFallsBackToEndpoint)
{
  RouteSet r;
  r.primary.push_back(route({{0, 0}, {1.5, 0}}));
  const auto row = sample_route_intentions(r, 4.0, 3);
  EXPECT_TRUE(row[0].valid);
  EXPECT_EQ(row[0].position, Vec2(1.5, 0));
  EXPECT_FALSE(row[1].valid);
}

TEST(RouteIntentions, RandomizedAgainstOracle)
{
  std::mt19937_64 rng(17);
  for (int i = 0; i < 200; ++i) {
    const auto why = testing::check_route_sampling_once(rng);
    ASSERT_TRUE(why.empty()) << "instance " << i << ": " << why;
  }
}

// Padding never changes the valid prefix.
TEST(RouteIntentions, PaddingMonotone)
{
  RouteSet r;
  r.primary.push_back(route({{0, 0}, {30, 0}}));
  r.secondary.push_back(route({{0, 0}, {0, 9}}));
  const auto small = sample_route_intentions(r, 4.0, 5);
  const auto big = sample_route_intentions(r, 4.0, 20);
  for (int i = 0; i < 5; ++i) {
    EXPECT_EQ(small[i].position, big[i].position);
    EXPECT_EQ(small[i].valid, big[i].valid);
  }
  int valid = 0;
  for (const auto & p : big) valid += p.valid;
  EXPECT_EQ(valid, 7 + 2);
}

TEST(Cluster, SeparatedClusters)
{
  std::vector<Vec2> pts;
  for (int i = 0; i < 3; ++i) {
    pts.emplace_back(0, 0);
    pts.emplace_back(10, 10);
  }
  const auto r = cluster_intentions(pts, 2, 7);
  ASSERT_EQ(r.centers.size(), 2u);
  const bool order_a = r.centers[0].position == Vec2(0, 0) && r.centers[1].position == Vec2(10, 10);
  const bool order_b = r.centers[1].position == Vec2(0, 0) && r.centers[0].position == Vec2(10, 10);
  EXPECT_TRUE(order_a || order_b);
  EXPECT_TRUE(r.centers[0].valid && r.centers[1].valid);
}

TEST(Cluster, SingleEndpointPads)
{
  const std::vector<Vec2> pts{{3, 4}};
  const auto r = cluster_intentions(pts, 4, 1);
  ASSERT_EQ(r.centers.size(), 4u);
  EXPECT_TRUE(r.centers[0].valid);
  EXPECT_EQ(r.centers[0].position, Vec2(3, 4));
  for (int i = 1; i < 4; ++i) {
    EXPECT_FALSE(r.centers[i].valid);
    EXPECT_EQ(r.centers[i].position, Vec2(3, 4));
  }
  for (const auto & c : r.centers) EXPECT_EQ(c.source, IntentionSource::kCluster);
}

double objective(const std::vector<Vec2> & pts, const IntentionRow & centers)
{
  double total = 0.0;
  for (const auto & p : pts) {
    double best = 1e300;
    for (const auto & c : centers) best = std::min(best, (p - c.position).squaredNorm());
    total += best;
  }
  return total;
}

TEST(Cluster, ObjectiveNonIncreasing)
{
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto pts = testing::random_points(rng, 300, 50.0);
    const auto r = cluster_intentions(pts, 16, trial);
    ASSERT_FALSE(r.objective_history.empty());
    for (std::size_t i = 1; i < r.objective_history.size(); ++i) {
      EXPECT_LE(r.objective_history[i], r.objective_history[i - 1] * (1 + 1e-12));
    }
    EXPECT_NEAR(objective(pts, r.centers), r.objective_history.back(), 1e-6 * r.objective_history.back());
  }
}

TEST(Cluster, SeedDeterministic)
{
  std::mt19937_64 rng(8);
  const auto pts = testing::random_points(rng, 200, 30.0);
  const auto a = cluster_intentions(pts, 8, 99);
  const auto b = cluster_intentions(pts, 8, 99);
  for (int i = 0; i < 8; ++i) EXPECT_EQ(a.centers[i].position, b.centers[i].position);
  EXPECT_EQ(a.objective_history, b.objective_history);
}

TEST(Positive, HandExample)
{
  IntentionRow row(2);
  row[0] = {{8, 0}, IntentionSource::kCluster, true};
  row[1] = {{12, 1}, IntentionSource::kCluster, true};
  EXPECT_EQ(select_positive_intention(row, {10, 0}), 0);
}

TEST(Positive, ExactHitAndTie)
{
  IntentionRow row(6);
  for (int i = 0; i < 6; ++i) row[i] = {{double(i) * 10, 50}, IntentionSource::kCluster, true};
  row[3].position = {1, 1};
  EXPECT_EQ(select_positive_intention(row, {1, 1}), 3);
  row[3].position = {30, 50};
  row[1].position = {2, 0};
  row[4].position = {0, 2};
  EXPECT_EQ(select_positive_intention(row, {0, 0}), 1);
}

TEST(Positive, IgnoresPadding)
{
  IntentionRow row(3);
  row[0] = {{9, 0}, IntentionSource::kCluster, true};
  row[1] = {{0, 0}, IntentionSource::kCluster, false};
  row[2] = {{5, 0}, IntentionSource::kCluster, true};
  EXPECT_EQ(select_positive_intention(row, {0, 0}), 2);
  row[0].valid = row[2].valid = false;
  EXPECT_THROW(select_positive_intention(row, {0, 0}), Error);
}

TEST(Positive, BruteForceAgreement)
{
  std::mt19937_64 rng(23);
  int ties = 0;
  for (int i = 0; i < 2000; ++i) {
    bool tie = false;
    const auto why = testing::check_positive_selection_once(rng, &tie);
    ASSERT_TRUE(why.empty()) << why;
    ties += tie;
  }
  EXPECT_GT(ties, 50);
}

TEST(Placement, AgentFrameRoundTrip)
{
  auto agent = testing::constant_velocity_agent(3, Vec2(10, -4), 0.7, 6.0, 3);
  const auto future = testing::constant_velocity_future(Vec2(10, -4), 0.7, 6.0, 20);
  const auto local = agent_centric_endpoint(agent, future);
  ASSERT_TRUE(local.has_value());
  // 20 steps at 6 m/s straight ahead
  EXPECT_NEAR(local->x(), 12.0, 1e-9);
  EXPECT_NEAR(local->y(), 0.0, 1e-9);
  IntentionRow centers{{*local, IntentionSource::kCluster, true}};
  const auto placed = place_intentions(centers, agent.current().position(), 0.7);
  EXPECT_LT((placed[0].position - future.back().position()).norm(), 1e-9);
}

}  // namespace
}  // namespace int2plan
