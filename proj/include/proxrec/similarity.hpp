#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "proxrec/local_store.hpp"

namespace proxrec {

enum class SimilarityMetric { pearson, cosine };

struct SimilarityConfig {
  SimilarityMetric metric = SimilarityMetric::pearson;
  std::size_t min_overlap = 3;
  std::size_t significance_gamma = 10;
  double propinquity_kappa = 5.0;     // encounter-count scale
  double propinquity_tau = 3600.0;    // encounter-duration scale, seconds
  double duration_weight = 0.5;       // beta
  double hybrid_weight = 0.7;         // w, weight of the rating similarity
  bool fallback_to_propinquity = true;

  /// Throws ValidationError.
  void validate() const;
};

/// Rating similarity over the co-rated items of two rating lists, each
/// sorted by item. Pearson centers each vector on its mean over the co-rated
/// set; cosine uses raw values. The result is scaled by min(n, gamma)/gamma.
/// nullopt when fewer than min_overlap items are shared or the vectors are
/// degenerate (zero variance or zero norm).
std::optional<double> rating_similarity(std::span<const RatingRecord> u_ratings,
                                        std::span<const RatingRecord> v_ratings, const SimilarityConfig& cfg);

std::optional<double> rating_similarity(UserId u, UserId v, const LocalStore& store, const SimilarityConfig& cfg);

/// 1 - exp(-[(1-beta) count/kappa + beta duration/tau])
double propinquity_similarity(const EncounterStats& stats, const SimilarityConfig& cfg);

/// Propinquity from the store owner's encounter log.
double propinquity_similarity(const LocalStore& store, UserId peer, const SimilarityConfig& cfg);

/// Propinquity between two users as known to `store`: the owner's log entry
/// when one of them is the owner, 0 otherwise.
double pair_propinquity(UserId u, UserId v, const LocalStore& store, const SimilarityConfig& cfg);

/// w * rating + (1-w) * propinquity when the rating similarity is defined;
/// otherwise propinquity if fallback is enabled, else 0.
double hybrid_similarity(UserId u, UserId v, const LocalStore& store, const SimilarityConfig& cfg);

double combine_similarity(std::optional<double> rating, double propinquity, const SimilarityConfig& cfg);

struct Neighbor {
  UserId user;
  double similarity;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Sorts by descending similarity then ascending id, drops non-positive
/// entries and keeps the first k.
void rank_neighbors(std::vector<Neighbor>& candidates, std::size_t k);

/// The k most similar candidates to u with positive hybrid similarity.
/// u itself is skipped if present in `candidates`.
std::vector<Neighbor> select_neighbors(UserId u, std::span<const UserId> candidates, std::size_t k,
                                       const LocalStore& store, const SimilarityConfig& cfg);

}  // namespace proxrec
