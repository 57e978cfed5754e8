#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "proxrec/catalog.hpp"
#include "proxrec/exchange.hpp"
#include "proxrec/ingestion.hpp"
#include "proxrec/local_store.hpp"
#include "proxrec/similarity.hpp"

namespace proxrec {

struct SimConfig {
  std::filesystem::path ratings_path;
  std::optional<std::filesystem::path> trace_path;
  std::optional<TraceGenParams> trace_gen;  // n_nodes is taken from the node set
  std::optional<std::filesystem::path> catalog_path;

  RatingScale scale;
  Ontology ontology;
  ExchangePolicy exchange;
  CspParams csp;
  SimilarityConfig similarity;
  std::size_t k_neighbors = 20;
  double horizon = 86400.0;
  double metric_period = 3600.0;
  double holdout_fraction = 0.0;
  std::uint64_t seed = 0;

  /// Throws ValidationError / ConfigError. `require_trace_source` checks that
  /// exactly one of trace_path and trace_gen is set.
  void validate(bool require_trace_source = true) const;
};

/// Trace seed used when trace_gen gives none.
std::uint64_t derived_trace_seed(std::uint64_t run_seed) noexcept;

/// Everything a run consumes, already loaded.
struct SimInputs {
  std::vector<RatingRecord> ratings;
  std::vector<EncounterEvent> trace;
  std::optional<Catalog> catalog;
};

/// Loads the files named in `cfg`, generating the trace when trace_gen is set.
SimInputs load_inputs(const SimConfig& cfg);

struct HeldOutRating {
  UserId user;
  ItemId item;
  double value;
};

struct MetricsRow {
  double time = 0.0;
  double spread = 0.0;    // mean over nodes of |store| / |exchangeable records|
  double coverage = 0.0;  // held-out pairs predicted with basis cf at the user's node
  std::optional<double> rmse;
  std::optional<double> mae;
  double mean_store_bytes = 0.0;  // payload-codec size of each node's full store
  std::uint64_t fetches_attempted = 0;
  std::uint64_t fetches_dropped = 0;
};

using MetricsLog = std::vector<MetricsRow>;

struct RunStats {
  std::uint64_t uploads = 0;
  std::uint64_t encounters = 0;
  std::uint64_t deliveries = 0;
  std::size_t max_payload_bytes = 0;
  std::size_t max_advertisement_bytes = 0;
  std::uint64_t payload_digest = 0;  // FNV-1a over every uploaded payload, in upload order
};

struct RunResult {
  MetricsLog metrics;
  std::vector<LocalStore> stores;  // one per node, ascending owner
  std::vector<HeldOutRating> holdout;
  std::size_t total_records = 0;  // exchangeable (non-held-out) records
  RunStats stats;

  const LocalStore* store_of(UserId node) const noexcept;
};

/// Hooks for auditing a run. Callbacks fire in event order.
class SimObserver {
 public:
  virtual ~SimObserver() = default;
  virtual void on_upload(double /*time*/, UserId /*node*/, const Payload& /*payload*/, const Token& /*token*/) {}
  virtual void on_encounter(const EncounterEvent& /*event*/, std::span<const PendingFetch> /*queued*/) {}
  virtual void on_fetch(double /*time*/, const PendingFetch& /*fetch*/, CspSim::FetchStatus /*status*/) {}
  virtual void on_delivery(double /*time*/, UserId /*node*/, const Payload& /*payload*/,
                           const MergeStats& /*stats*/) {}
  virtual void on_snapshot(const MetricsRow& /*row*/) {}
};

/// Runs the discrete-event simulation. Within one timestamp the order is:
/// uploads (by node), encounters (by a, b), due fetches (by fetcher, sender),
/// then the metric snapshot. Identical config and inputs give identical
/// results.
RunResult run(const SimConfig& cfg, SimObserver* observer = nullptr);
RunResult run(const SimConfig& cfg, SimInputs inputs, SimObserver* observer = nullptr);

/// One metrics row from the current node stores (fetch counters left 0).
/// `nodes` must be sorted by owner; `holdout` by (user, item).
MetricsRow snapshot_metrics(std::span<const LocalStore> nodes, std::span<const HeldOutRating> holdout, double now,
                            std::size_t total_records, const SimilarityConfig& cfg, std::size_t k);

inline constexpr const char* kMetricsHeader =
    "time,spread,coverage,rmse,mae,mean_store_bytes,fetches_attempted,fetches_dropped";

void write_metrics_csv(const MetricsLog& log, std::ostream& out);

}  // namespace proxrec
