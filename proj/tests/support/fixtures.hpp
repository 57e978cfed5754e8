#pragma once

// Random instance generators shared by unit and acceptance tests.

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "../oracles/cf_oracle.hpp"
#include "proxrec/recommender.hpp"
#include "proxrec/simulator.hpp"

namespace fixtures {

inline proxrec::RatingRecord rec(std::uint64_t rater, const std::string& key, float value, std::uint64_t ts = 1,
                                 std::uint8_t hops = 0, const std::string& category = "movies") {
  return {proxrec::UserId{rater}, proxrec::ItemId(category, key), value, ts, proxrec::Source::manual, hops};
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("proxrec_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

struct CfInstance {
  proxrec::LocalStore store;
  oracle::CfWorld world;
  proxrec::SimilarityConfig cfg;
  oracle::CfParams params;
  std::size_t k;
  std::vector<std::uint64_t> users;
};

/// Up to 8 users and 12 items, half-star ratings, a random encounter log for
/// the owner and a random similarity configuration.
inline CfInstance make_cf_instance(std::mt19937_64& rng) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto unit = [&] { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); };

  const int n_users = pick(2, 8);
  const int n_items = pick(2, 12);
  const double density = 0.3 + 0.6 * unit();
  const std::uint64_t owner = static_cast<std::uint64_t>(pick(1, n_users));

  CfInstance inst{proxrec::LocalStore(proxrec::UserId{owner}), {}, {}, {}, 1, {}};
  inst.world.owner = owner;
  for (int u = 1; u <= n_users; ++u) {
    std::vector<proxrec::RatingRecord> mine;
    for (int i = 0; i < n_items; ++i) {
      if (unit() > density) continue;
      const float value = static_cast<float>(pick(2, 10)) / 2.0f;
      const std::string key = "i" + std::to_string(i);
      mine.push_back(rec(static_cast<std::uint64_t>(u), key, value, static_cast<std::uint64_t>(pick(1, 100)),
                         u == static_cast<int>(owner) ? 0 : static_cast<std::uint8_t>(pick(1, 3))));
    }
    if (mine.empty()) {
      const std::string key = "i" + std::to_string(pick(0, n_items - 1));
      mine.push_back(rec(static_cast<std::uint64_t>(u), key, static_cast<float>(pick(2, 10)) / 2.0f, 1,
                         u == static_cast<int>(owner) ? 0 : 1));
    }
    for (const auto& r : mine) {
      inst.store.merge_record(r);
      inst.world.ratings[r.rater.value][{std::string(r.item.category()), std::string(r.item.key())}] = r.value;
    }
    inst.users.push_back(static_cast<std::uint64_t>(u));
  }
  for (int u = 1; u <= n_users; ++u) {
    if (u == static_cast<int>(owner) || unit() < 0.3) continue;
    const int meetings = pick(1, 6);
    double total = 0;
    for (int m = 0; m < meetings; ++m) {
      const double d = static_cast<double>(pick(0, 1800));
      inst.store.record_encounter(proxrec::UserId{static_cast<std::uint64_t>(u)}, d);
      total += d;
    }
    inst.world.encounters[static_cast<std::uint64_t>(u)] = {static_cast<std::uint64_t>(meetings), total};
  }

  inst.cfg.metric = unit() < 0.5 ? proxrec::SimilarityMetric::pearson : proxrec::SimilarityMetric::cosine;
  inst.cfg.min_overlap = static_cast<std::size_t>(pick(1, 3));
  inst.cfg.significance_gamma = static_cast<std::size_t>(pick(1, 10));
  inst.cfg.propinquity_kappa = 1.0 + 9.0 * unit();
  inst.cfg.propinquity_tau = 600.0 + 3000.0 * unit();
  inst.cfg.duration_weight = unit();
  inst.cfg.hybrid_weight = unit() < 0.2 ? 1.0 : unit();
  inst.cfg.fallback_to_propinquity = unit() < 0.7;
  inst.k = static_cast<std::size_t>(pick(1, 5));

  oracle::CfParams& p = inst.params;
  p.pearson = inst.cfg.metric == proxrec::SimilarityMetric::pearson;
  p.min_overlap = inst.cfg.min_overlap;
  p.gamma = inst.cfg.significance_gamma;
  p.kappa = inst.cfg.propinquity_kappa;
  p.tau = inst.cfg.propinquity_tau;
  p.beta = inst.cfg.duration_weight;
  p.w = inst.cfg.hybrid_weight;
  p.fallback = inst.cfg.fallback_to_propinquity;
  p.k = inst.k;
  return inst;
}

inline oracle::Item item_of(const proxrec::ItemId& id) { return {std::string(id.category()), std::string(id.key())}; }

struct EpidemicInstance {
  std::vector<proxrec::RatingRecord> ratings;
  std::vector<proxrec::EncounterEvent> trace;
  std::vector<std::uint64_t> nodes;
};

/// Up to 8 nodes with 1-3 own ratings each and up to 50 encounters at
/// distinct integer times >= 1.
inline EpidemicInstance make_epidemic_instance(std::mt19937_64& rng) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  EpidemicInstance inst;
  const int n = pick(2, 8);
  for (int u = 1; u <= n; ++u) {
    inst.nodes.push_back(static_cast<std::uint64_t>(u));
    const int count = pick(1, 3);
    std::vector<int> items;
    while (static_cast<int>(items.size()) < count) {
      const int i = pick(0, 9);
      if (std::find(items.begin(), items.end(), i) == items.end()) items.push_back(i);
    }
    for (int i : items)
      inst.ratings.push_back(rec(static_cast<std::uint64_t>(u), "m" + std::to_string(i),
                                 static_cast<float>(pick(1, 5)), static_cast<std::uint64_t>(pick(1, 1000))));
  }
  const int events = pick(1, 50);
  std::vector<int> times;
  for (int t = 1; t <= 120; ++t) times.push_back(t);
  std::shuffle(times.begin(), times.end(), rng);
  times.resize(static_cast<std::size_t>(events));
  std::sort(times.begin(), times.end());
  for (int t : times) {
    const int a = pick(1, n);
    int b = pick(1, n - 1);
    if (b >= a) ++b;
    inst.trace.push_back({static_cast<double>(t), proxrec::UserId{static_cast<std::uint64_t>(a)},
                          proxrec::UserId{static_cast<std::uint64_t>(b)}, static_cast<double>(pick(0, 300))});
  }
  return inst;
}

/// Exchange settings under which the reachability oracle's model holds:
/// re-upload every half second, instant CSP, no deferral.
inline proxrec::SimConfig epidemic_config(std::uint8_t max_hops, bool relay, std::uint64_t seed) {
  proxrec::SimConfig cfg;
  cfg.exchange.upload_period = 0.5;
  cfg.exchange.relay = relay ? proxrec::RelayPolicy::limited(max_hops) : proxrec::RelayPolicy::off();
  cfg.exchange.fetch_deferral = 0.0;
  cfg.csp = {0.0, 0.0, 1.0};
  cfg.horizon = 121.0;
  cfg.metric_period = 30.0;
  cfg.holdout_fraction = 0.0;
  cfg.k_neighbors = 5;
  cfg.seed = seed;
  return cfg;
}

}  // namespace fixtures
