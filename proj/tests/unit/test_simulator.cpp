#include <gtest/gtest.h>

#include <sstream>

#include "../oracles/provenance_audit.hpp"
#include "../support/fixtures.hpp"
#include "proxrec/errors.hpp"
#include "proxrec/simulator.hpp"

using namespace proxrec;
using fixtures::rec;

namespace {

// n nodes, each with `per_node` own ratings on a shared item pool.
SimInputs small_world(int n, int per_node) {
  SimInputs in;
  for (int u = 1; u <= n; ++u)
    for (int i = 0; i < per_node; ++i)
      in.ratings.push_back(rec(static_cast<std::uint64_t>(u), "m" + std::to_string((u + i) % 7),
                               static_cast<float>(1 + (u * 3 + i) % 5), static_cast<std::uint64_t>(10 * u + i)));
  return in;
}

// Every pair meets once per `period`, starting at `period`.
std::vector<EncounterEvent> complete_schedule(int n, double period, int rounds) {
  std::vector<EncounterEvent> out;
  double t = period;
  for (int r = 0; r < rounds; ++r, t += period)
    for (int a = 1; a <= n; ++a)
      for (int b = a + 1; b <= n; ++b)
        out.push_back({t, UserId{static_cast<std::uint64_t>(a)}, UserId{static_cast<std::uint64_t>(b)}, 60});
  return out;
}

SimConfig base_config() {
  SimConfig cfg = fixtures::epidemic_config(1, false, 5);
  cfg.exchange.upload_period = 10;
  cfg.horizon = 600;
  cfg.metric_period = 60;
  return cfg;
}

}  // namespace

TEST(Simulator, HorizonZeroGivesOneSnapshotOfOwnShare) {
  SimConfig cfg = base_config();
  cfg.horizon = 0;
  auto in = small_world(4, 3);
  in.trace = complete_schedule(4, 1, 3);
  const auto res = run(cfg, in);
  ASSERT_EQ(res.metrics.size(), 1u);
  EXPECT_EQ(res.metrics[0].time, 0.0);
  EXPECT_DOUBLE_EQ(res.metrics[0].spread, 0.25);
  EXPECT_EQ(res.stats.encounters, 0u);
}

TEST(Simulator, UnavailableCspKeepsSpreadConstant) {
  SimConfig cfg = base_config();
  cfg.csp.availability = 0.0;
  auto in = small_world(5, 2);
  in.trace = complete_schedule(5, 50, 10);
  const auto res = run(cfg, in);
  ASSERT_GT(res.metrics.size(), 2u);
  for (const auto& row : res.metrics) EXPECT_DOUBLE_EQ(row.spread, res.metrics.front().spread);
  EXPECT_GT(res.metrics.back().fetches_attempted, 0u);
  EXPECT_EQ(res.metrics.back().fetches_attempted, res.metrics.back().fetches_dropped);
}

TEST(Simulator, CompleteScheduleConvergesWithoutRelay) {
  SimConfig cfg = base_config();
  auto in = small_world(5, 3);
  in.trace = complete_schedule(5, 50, 3);
  const auto res = run(cfg, in);
  EXPECT_DOUBLE_EQ(res.metrics.back().spread, 1.0);
  for (std::size_t i = 1; i < res.metrics.size(); ++i) EXPECT_GE(res.metrics[i].spread, res.metrics[i - 1].spread);
  for (const auto& s : res.stores)
    for (const auto& r : s.records()) EXPECT_LE(r.hops, 1);
}

TEST(Simulator, DeterministicAndSeedSensitive) {
  SimConfig cfg = base_config();
  cfg.exchange.relay = RelayPolicy::unlimited();
  cfg.csp = {3.0, 2.0, 0.7};
  cfg.exchange.fetch_deferral = 5;
  cfg.holdout_fraction = 0.3;
  auto in = small_world(6, 4);
  in.trace = complete_schedule(6, 40, 12);
  std::ostringstream a;
  std::ostringstream b;
  const auto r1 = run(cfg, in);
  const auto r2 = run(cfg, in);
  write_metrics_csv(r1.metrics, a);
  write_metrics_csv(r2.metrics, b);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(r1.stats.payload_digest, r2.stats.payload_digest);
  cfg.seed = 6;
  const auto r3 = run(cfg, in);
  EXPECT_NE(r1.stats.payload_digest, r3.stats.payload_digest);
}

TEST(Simulator, HoldoutTakesCeilPerUser) {
  SimConfig cfg = base_config();
  cfg.holdout_fraction = 0.3;
  auto in = small_world(4, 4);
  const auto res = run(cfg, in);
  // ceil(0.3 * 4) = 2 per user
  EXPECT_EQ(res.holdout.size(), 8u);
  EXPECT_EQ(res.total_records, 8u);
  for (const auto& h : res.holdout) {
    const LocalStore* s = res.store_of(h.user);
    ASSERT_NE(s, nullptr);
    EXPECT_EQ(s->find(h.user, h.item), nullptr);
  }
}

TEST(Simulator, RejectsBadInputs) {
  SimConfig cfg = base_config();
  auto in = small_world(2, 1);
  in.ratings.push_back(rec(1, "relayed", 3, 1, 2));
  EXPECT_THROW(run(cfg, in), ValidationError);
  cfg.holdout_fraction = 1.0;
  EXPECT_THROW(run(cfg, small_world(2, 1)), ValidationError);
}

TEST(Simulator, ProvenanceAuditOnRelayRun) {
  SimConfig cfg = base_config();
  cfg.exchange.relay = RelayPolicy::limited(3);
  cfg.csp = {1.0, 4.0, 0.9};
  auto in = small_world(6, 3);
  std::mt19937_64 rng(2);
  for (int t = 5; t < 600; t += 7) {
    const auto a = 1 + rng() % 6;
    auto b = 1 + rng() % 5;
    if (b >= a) ++b;
    in.trace.push_back({static_cast<double>(t), UserId{std::min(a, b)}, UserId{std::max(a, b)}, 30});
  }
  oracle::ProvenanceAudit audit;
  for (const auto& r : in.ratings) audit.add_own(r);
  const auto res = run(cfg, in, &audit);
  audit.check_final(res);
  EXPECT_TRUE(audit.ok()) << (audit.errors().empty() ? "" : audit.errors().front());
  EXPECT_GT(audit.deliveries_seen(), 0u);
}

TEST(Simulator, SnapshotRmseOverCfPredictions) {
  // Two nodes sharing three items; node 1 holds out one item that node 2 rated.
  std::vector<LocalStore> nodes;
  nodes.emplace_back(UserId{1});
  nodes.emplace_back(UserId{2});
  for (auto [k, v] : {std::pair{"a", 4.0f}, {"b", 2.0f}, {"c", 5.0f}}) {
    nodes[0].merge_record(rec(1, k, v));
    nodes[0].merge_record(rec(2, k, v + (k[0] == 'c' ? -1.0f : k[0] == 'a' ? 1.0f : -1.0f), 1, 1));
  }
  nodes[0].merge_record(rec(2, "d", 3, 1, 1));
  const std::vector<HeldOutRating> holdout{{UserId{1}, ItemId("movies", "d"), 4.0}};
  SimilarityConfig c;
  c.min_overlap = 1;
  c.significance_gamma = 3;
  c.hybrid_weight = 1.0;
  const auto row = snapshot_metrics(nodes, holdout, 0, 7, c, 5);
  EXPECT_DOUBLE_EQ(row.coverage, 1.0);
  ASSERT_TRUE(row.rmse);
  // prediction 41/12 as in the recommender test
  EXPECT_NEAR(*row.rmse, 4.0 - 41.0 / 12.0, 1e-12);
  EXPECT_NEAR(*row.mae, 4.0 - 41.0 / 12.0, 1e-12);
}
