#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "proxrec/catalog.hpp"
#include "proxrec/types.hpp"

namespace proxrec {

/// Own ratings in the record CSV format; the hops column is optional and
/// must be 0 when present. Throws ParseError naming the line.
std::vector<RatingRecord> load_ratings(const std::filesystem::path& path, const RatingScale& scale = {},
                                       const Ontology& ontology = {});

void save_ratings(std::span<const RatingRecord> records, const std::filesystem::path& path);

/// Contact trace CSV `time,a,b,duration`. Events come back normalized to
/// a < b, sorted by (time, a, b), with duplicates on that key collapsed
/// (keeping the longest duration).
std::vector<EncounterEvent> load_trace(const std::filesystem::path& path);

void save_trace(std::span<const EncounterEvent> events, const std::filesystem::path& path);
void write_trace(std::span<const EncounterEvent> events, std::ostream& out);

/// Sorts, orients and deduplicates in place with the load_trace rules.
void normalize_trace(std::vector<EncounterEvent>& events);

/// Pairwise Poisson contact process.
struct TraceGenParams {
  std::uint64_t n_nodes = 10;
  double horizon = 36000.0;         // seconds
  double mean_rate = 1.0;           // contacts per pair per hour
  double rate_heterogeneity = 1.0;  // multiplier for pairs in the same community
  std::uint64_t n_communities = 1;
  double mean_duration = 60.0;      // seconds
  std::uint64_t seed = 0;

  /// Throws ValidationError.
  void validate() const;
};

/// Nodes get ids 1..n_nodes. Node i (0-based) belongs to community
/// i % n_communities. Deterministic in `params`.
std::vector<EncounterEvent> generate_trace(const TraceGenParams& params);

/// Same process over an explicit node list; `params.n_nodes` is ignored.
std::vector<EncounterEvent> generate_trace(const TraceGenParams& params, std::span<const UserId> nodes);

/// Catalog CSV: header `category,key,<attr1>,...,<attrK>`.
Catalog load_catalog(const std::filesystem::path& path, const Ontology& ontology = {});
void save_catalog(const Catalog& catalog, const std::filesystem::path& path);

/// Converts a MovieLens-100k `u.data` file (tab separated user, item, rating,
/// timestamp) into the ratings CSV. Items land in category `movies` keyed by
/// the MovieLens item id; users keep their ids. Users above `max_user` are
/// skipped when it is non-zero. Returns the number of records written.
std::size_t convert_ml100k(const std::filesystem::path& in, const std::filesystem::path& out,
                           std::uint64_t max_user = 0);

/// Converts a MovieLens-100k `u.item` file (pipe separated, 19 trailing genre
/// flags) into a catalog CSV with one attribute per genre.
std::size_t convert_ml100k_items(const std::filesystem::path& in, const std::filesystem::path& out);

}  // namespace proxrec
