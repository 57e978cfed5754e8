#include "proxrec/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <stdexcept>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "csv.hpp"
#include "proxrec/errors.hpp"
#include "proxrec/recommender.hpp"
#include "rng.hpp"

namespace proxrec {

namespace {

// stream ids for derive_seed
constexpr std::uint64_t kPhaseStream = 0x100000000ULL;
constexpr std::uint64_t kHoldoutStream = 0x200000000ULL;
constexpr std::uint64_t kCspStream = 0x300000000ULL;
constexpr std::uint64_t kTraceStream = 0x400000000ULL;

void invariant(bool ok, const std::string& what) {
  if (!ok) throw std::logic_error("simulation invariant violated: " + what);
}

std::uint64_t fnv1a(std::uint64_t h, std::span<const std::uint8_t> bytes) {
  for (auto b : bytes) {
    h ^= b;
    h *= 0x100000001B3ULL;
  }
  return h;
}

enum class Phase : int { upload = 0, encounter = 1, fetch = 2, metric = 3 };

struct Event {
  double time;
  Phase phase;
  std::uint64_t k1;  // node / a / fetcher
  std::uint64_t k2;  // b / sender
  int sub;           // fetch before delivery for equal keys
  std::uint64_t seq;
  std::size_t index;

  bool operator>(const Event& o) const {
    if (time != o.time) return time > o.time;
    if (phase != o.phase) return phase > o.phase;
    if (k1 != o.k1) return k1 > o.k1;
    if (k2 != o.k2) return k2 > o.k2;
    if (sub != o.sub) return sub > o.sub;
    return seq > o.seq;
  }
};

struct Delivery {
  UserId node;
  std::shared_ptr<const Payload> payload;
};

}  // namespace

void SimConfig::validate(bool require_trace_source) const {
  scale.validate();
  exchange.validate();
  csp.validate();
  similarity.validate();
  if (require_trace_source && trace_path.has_value() == trace_gen.has_value())
    throw ConfigError("exactly one of trace and trace_gen must be set");
  if (trace_gen) {
    TraceGenParams p = *trace_gen;
    p.n_nodes = std::max<std::uint64_t>(p.n_nodes, 1);
    p.validate();
  }
  if (k_neighbors < 1) throw ConfigError("k_neighbors must be >= 1");
  if (!std::isfinite(horizon) || horizon < 0) throw ConfigError("horizon must be >= 0");
  if (!std::isfinite(metric_period) || metric_period <= 0) throw ConfigError("metric_period must be > 0");
  if (!(holdout_fraction >= 0 && holdout_fraction < 1)) throw ConfigError("holdout_fraction must be in [0,1)");
}

std::uint64_t derived_trace_seed(std::uint64_t run_seed) noexcept {
  return detail::derive_seed(run_seed, kTraceStream);
}

const LocalStore* RunResult::store_of(UserId node) const noexcept {
  auto it = std::lower_bound(stores.begin(), stores.end(), node,
                             [](const LocalStore& s, UserId u) { return s.owner() < u; });
  return it != stores.end() && it->owner() == node ? &*it : nullptr;
}

SimInputs load_inputs(const SimConfig& cfg) {
  cfg.validate();
  SimInputs in;
  in.ratings = load_ratings(cfg.ratings_path, cfg.scale, cfg.ontology);
  if (cfg.trace_path) {
    in.trace = load_trace(*cfg.trace_path);
  } else {
    std::vector<UserId> nodes;
    for (const auto& r : in.ratings) nodes.push_back(r.rater);
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    if (nodes.size() >= 2) in.trace = generate_trace(*cfg.trace_gen, nodes);
  }
  if (cfg.catalog_path) in.catalog = load_catalog(*cfg.catalog_path, cfg.ontology);
  return in;
}

RunResult run(const SimConfig& cfg, SimObserver* observer) { return run(cfg, load_inputs(cfg), observer); }

MetricsRow snapshot_metrics(std::span<const LocalStore> nodes, std::span<const HeldOutRating> holdout, double now,
                            std::size_t total_records, const SimilarityConfig& cfg, std::size_t k) {
  MetricsRow row;
  row.time = now;
  if (!nodes.empty()) {
    double spread = 0;
    double bytes = 0;
    for (const auto& s : nodes) {
      spread += total_records == 0 ? 0.0 : static_cast<double>(s.size()) / static_cast<double>(total_records);
      bytes += static_cast<double>(encoded_size(s.records()));
    }
    row.spread = spread / static_cast<double>(nodes.size());
    row.mean_store_bytes = bytes / static_cast<double>(nodes.size());
  }

  std::size_t covered = 0;
  double sq = 0;
  double abs = 0;
  for (std::size_t i = 0; i < holdout.size();) {
    const UserId user = holdout[i].user;
    std::size_t j = i;
    while (j < holdout.size() && holdout[j].user == user) ++j;
    auto node = std::lower_bound(nodes.begin(), nodes.end(), user,
                                 [](const LocalStore& s, UserId u) { return s.owner() < u; });
    if (node != nodes.end() && node->owner() == user && !node->ratings_by(user).empty()) {
      Recommender rec(*node, cfg, k);
      for (std::size_t h = i; h < j; ++h) {
        const Prediction p = rec.predict(user, holdout[h].item);
        if (p.basis != Basis::cf) continue;
        ++covered;
        const double err = p.score - holdout[h].value;
        sq += err * err;
        abs += std::abs(err);
      }
    }
    i = j;
  }
  if (!holdout.empty()) row.coverage = static_cast<double>(covered) / static_cast<double>(holdout.size());
  if (covered > 0) {
    row.rmse = std::sqrt(sq / static_cast<double>(covered));
    row.mae = abs / static_cast<double>(covered);
  }
  return row;
}

RunResult run(const SimConfig& cfg, SimInputs inputs, SimObserver* observer) {
  cfg.validate(false);
  for (const auto& e : inputs.trace) validate_event(e);
  normalize_trace(inputs.trace);
  if (inputs.catalog)
    for (const auto& [item, meta] : inputs.catalog->items())
      if (!cfg.ontology.contains(item.category()))
        throw ValidationError("catalog item " + item.to_string() + " is outside the ontology");

  // Node set: raters plus every trace participant.
  std::vector<UserId> node_ids;
  for (const auto& r : inputs.ratings) node_ids.push_back(r.rater);
  for (const auto& e : inputs.trace) {
    node_ids.push_back(e.a);
    node_ids.push_back(e.b);
  }
  std::sort(node_ids.begin(), node_ids.end());
  node_ids.erase(std::unique(node_ids.begin(), node_ids.end()), node_ids.end());
  std::unordered_map<UserId, std::size_t> index_of;
  for (std::size_t i = 0; i < node_ids.size(); ++i) index_of.emplace(node_ids[i], i);

  RunResult result;
  result.stores.reserve(node_ids.size());
  for (UserId id : node_ids) result.stores.emplace_back(id, cfg.scale);

  // Own ratings, deduplicated by the merge rule, then per-user holdout.
  {
    std::vector<LocalStore> own;
    own.reserve(node_ids.size());
    for (UserId id : node_ids) own.emplace_back(id, cfg.scale);
    for (const auto& r : inputs.ratings) {
      if (r.hops != 0) throw ValidationError("input ratings must have hops = 0");
      own[index_of.at(r.rater)].merge_record(r);
    }
    for (std::size_t n = 0; n < node_ids.size(); ++n) {
      auto records = own[n].records();
      std::vector<bool> held(records.size(), false);
      if (cfg.holdout_fraction > 0 && !records.empty()) {
        const auto count = static_cast<std::size_t>(
            std::ceil(cfg.holdout_fraction * static_cast<double>(records.size())));
        std::vector<std::size_t> order(records.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        detail::Rng rng(detail::derive_seed(cfg.seed, kHoldoutStream + node_ids[n].value));
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
        for (std::size_t i = 0; i < count; ++i) held[order[i]] = true;
      }
      std::vector<RatingRecord> kept;
      for (std::size_t i = 0; i < records.size(); ++i) {
        if (held[i]) {
          result.holdout.push_back({records[i].rater, records[i].item, static_cast<double>(records[i].value)});
        } else {
          kept.push_back(records[i]);
        }
      }
      result.stores[n].merge_sorted(kept);
      result.total_records += kept.size();
    }
  }

  CspSim csp(cfg.csp, detail::derive_seed(cfg.seed, kCspStream), cfg.ontology, cfg.scale);
  std::vector<std::optional<Token>> tokens(node_ids.size());

  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue;
  std::uint64_t seq = 0;
  std::vector<PendingFetch> fetches;
  std::map<std::size_t, Delivery> deliveries;

  for (std::size_t n = 0; n < node_ids.size(); ++n) {
    detail::Rng rng(detail::derive_seed(cfg.seed, kPhaseStream + node_ids[n].value));
    const double phase = rng.uniform01() * cfg.exchange.upload_period;
    if (phase <= cfg.horizon) queue.push({phase, Phase::upload, node_ids[n].value, 0, 0, seq++, n});
  }
  for (std::size_t e = 0; e < inputs.trace.size(); ++e) {
    const auto& ev = inputs.trace[e];
    if (ev.time > cfg.horizon) break;
    queue.push({ev.time, Phase::encounter, ev.a.value, ev.b.value, 0, seq++, e});
  }
  {
    std::uint64_t m = 0;
    for (;; ++m) {
      const double t = static_cast<double>(m) * cfg.metric_period;
      if (t > cfg.horizon) break;
      queue.push({t, Phase::metric, 0, 0, 0, seq++, 0});
    }
    if (static_cast<double>(m - 1) * cfg.metric_period < cfg.horizon)
      queue.push({cfg.horizon, Phase::metric, 0, 0, 0, seq++, 0});
  }

  std::uint64_t fetches_attempted = 0;
  std::uint64_t fetches_dropped = 0;
  std::uint64_t digest = 0xCBF29CE484222325ULL;
  std::optional<double> last_spread;

  auto deliver = [&](double t, std::size_t node, const Payload& payload) {
    const MergeStats stats = merge_payload(result.stores[node], payload);
    if (stats.dropped) ++fetches_dropped;
    ++result.stats.deliveries;
    if (observer) observer->on_delivery(t, node_ids[node], payload, stats);
  };

  while (!queue.empty()) {
    const Event ev = queue.top();
    queue.pop();
    switch (ev.phase) {
      case Phase::upload: {
        const std::size_t n = ev.index;
        const Payload payload = build_payload(result.stores[n], cfg.exchange, ev.time);
        const Token token = upload(csp, payload, ev.time, cfg.exchange);
        const Bytes* bytes = csp.stored_bytes(token);
        invariant(bytes != nullptr && bytes->size() <= cfg.exchange.payload_size_cap, "payload size law");
        digest = fnv1a(digest, *bytes);
        result.stats.max_payload_bytes = std::max(result.stats.max_payload_bytes, bytes->size());
        ++result.stats.uploads;
        tokens[n] = token;
        if (observer) observer->on_upload(ev.time, node_ids[n], payload, token);
        const double next = ev.time + cfg.exchange.upload_period;
        if (next <= cfg.horizon) queue.push({next, Phase::upload, ev.k1, 0, 0, seq++, n});
        break;
      }
      case Phase::encounter: {
        const auto& e = inputs.trace[ev.index];
        const std::size_t a = index_of.at(e.a);
        const std::size_t b = index_of.at(e.b);
        auto queued =
            broadcast_on_encounter(result.stores[a], result.stores[b], tokens[a], tokens[b], e, cfg.exchange);
        if (!queued.empty()) {
          const std::size_t adv =
              encode_advertisement(Advertisement{queued.front().sender, queued.front().token, e.time}).size();
          invariant(adv <= cfg.exchange.adv_size_cap, "advertisement size law");
          result.stats.max_advertisement_bytes = std::max(result.stats.max_advertisement_bytes, adv);
        }
        ++result.stats.encounters;
        if (observer) observer->on_encounter(e, queued);
        for (const auto& f : queued) {
          if (f.due > cfg.horizon) continue;
          fetches.push_back(f);
          queue.push({f.due, Phase::fetch, f.fetcher.value, f.sender.value, 0, seq++, fetches.size() - 1});
        }
        break;
      }
      case Phase::fetch: {
        if (ev.sub == 1) {
          auto node = deliveries.extract(ev.index);
          deliver(ev.time, index_of.at(node.mapped().node), *node.mapped().payload);
          break;
        }
        const PendingFetch& f = fetches[ev.index];
        ++fetches_attempted;
        auto fetched = csp.fetch(f.token, ev.time);
        if (observer) observer->on_fetch(ev.time, f, fetched.status);
        if (fetched.status != CspSim::FetchStatus::ok) {
          ++fetches_dropped;
          break;
        }
        const std::size_t node = index_of.at(f.fetcher);
        if (fetched.ready_at <= ev.time) {
          deliver(ev.time, node, *fetched.payload);
        } else if (fetched.ready_at <= cfg.horizon) {
          deliveries.emplace(ev.index, Delivery{f.fetcher, std::move(fetched.payload)});
          queue.push({fetched.ready_at, Phase::fetch, f.fetcher.value, f.sender.value, 1, seq++, ev.index});
        }
        break;
      }
      case Phase::metric: {
        MetricsRow row = snapshot_metrics(result.stores, result.holdout, ev.time, result.total_records,
                                          cfg.similarity, cfg.k_neighbors);
        row.fetches_attempted = fetches_attempted;
        row.fetches_dropped = fetches_dropped;
        invariant(row.spread >= 0 && row.spread <= 1, "spread within [0,1]");
        invariant(!last_spread || row.spread >= *last_spread, "spread is non-decreasing");
        last_spread = row.spread;
        spdlog::debug("t={} spread={} coverage={}", row.time, row.spread, row.coverage);
        if (observer) observer->on_snapshot(row);
        result.metrics.push_back(row);
        break;
      }
    }
  }
  result.stats.payload_digest = digest;
  return result;
}

void write_metrics_csv(const MetricsLog& log, std::ostream& out) {
  out << kMetricsHeader << '\n';
  for (const auto& r : log) {
    out << csv::format_double(r.time) << ',' << csv::format_double(r.spread) << ','
        << csv::format_double(r.coverage) << ',' << (r.rmse ? csv::format_double(*r.rmse) : "") << ','
        << (r.mae ? csv::format_double(*r.mae) : "") << ',' << csv::format_double(r.mean_store_bytes) << ','
        << r.fetches_attempted << ',' << r.fetches_dropped << '\n';
  }
}

}  // namespace proxrec
