#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "proxrec/catalog.hpp"
#include "proxrec/local_store.hpp"
#include "proxrec/similarity.hpp"

namespace proxrec {

enum class Basis { cf, content, user_mean_fallback };

std::string_view to_string(Basis b) noexcept;

struct Prediction {
  ItemId item;
  double score;  // clamped to the rating scale
  Basis basis;
  std::size_t n_neighbors_used = 0;
};

enum class GroupStrategy { average, least_misery, most_pleasure };

std::string_view to_string(GroupStrategy s) noexcept;
std::optional<GroupStrategy> parse_group_strategy(std::string_view name) noexcept;

struct GroupRecommendation {
  ItemId item;
  double score;
  std::vector<Prediction> member_predictions;  // in member order
};

/// User-based collaborative filtering over one node's store.
///
/// The store must outlive the recommender and must not change while it is in
/// use. Similarities and user means are memoized, so one instance should not
/// be shared between threads.
class Recommender {
 public:
  Recommender(const LocalStore& store, SimilarityConfig cfg, std::size_t k);

  /// mean_u + sum_v s(u,v) (r_vi - mean_v) / sum_v |s(u,v)| over the k most
  /// similar raters of i, clamped to the scale. Falls back to mean_u when no
  /// rater of i has positive similarity. Throws ColdUserError if u has no
  /// ratings in the store.
  Prediction predict(UserId u, ItemId i) const;

  /// Highest predicted items among those u has not rated, descending score,
  /// ties by ascending ItemId. Without `candidates`, every item in the store
  /// is considered.
  std::vector<Prediction> top_n(UserId u, std::size_t n) const;
  std::vector<Prediction> top_n(UserId u, std::size_t n, std::span<const ItemId> candidates) const;

  /// Aggregates member predictions per item (mean, min or max) over items no
  /// member has rated. Throws ValidationError for fewer than two distinct
  /// members and ColdUserError listing every member without ratings.
  std::vector<GroupRecommendation> group_recommend(std::span<const UserId> members, std::size_t n,
                                                   GroupStrategy strategy) const;

  /// Throws ColdUserError.
  double user_mean(UserId u) const;
  double similarity(UserId u, UserId v) const;
  std::vector<Neighbor> neighbors(UserId u, ItemId i) const;

  /// Items present in the store, ascending.
  const std::vector<ItemId>& items() const noexcept { return items_; }
  std::span<const UserId> raters_of(ItemId i) const noexcept;

 private:
  const LocalStore& store_;
  SimilarityConfig cfg_;
  std::size_t k_;
  std::vector<ItemId> items_;
  std::unordered_map<ItemId, std::vector<UserId>> raters_;
  mutable std::unordered_map<UserId, double> means_;
  mutable std::map<std::pair<UserId, UserId>, double> similarities_;
};

Prediction predict(UserId u, ItemId i, const LocalStore& store, const SimilarityConfig& cfg, std::size_t k);

std::vector<Prediction> top_n(UserId u, std::size_t n, const LocalStore& store, const SimilarityConfig& cfg,
                              std::size_t k, std::optional<std::span<const ItemId>> candidates = std::nullopt);

std::vector<GroupRecommendation> group_recommend(std::span<const UserId> members, std::size_t n,
                                                 const LocalStore& store, const SimilarityConfig& cfg,
                                                 std::size_t k, GroupStrategy strategy);

/// Content-based score: u's profile is the mean of the attribute vectors of
/// u's cataloged items weighted by (rating - scale midpoint), normalized by
/// the sum of absolute weights. The cosine between profile and item maps
/// affinely from [-1,1] onto the scale; a zero profile or item vector gives
/// the midpoint. Throws ValidationError if `i` is not cataloged and
/// ColdUserError if u has no rating on a cataloged item.
Prediction content_score(UserId u, ItemId i, const LocalStore& store, const Catalog& catalog);

}  // namespace proxrec
