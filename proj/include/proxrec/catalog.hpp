#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "proxrec/types.hpp"

namespace proxrec {

/// Item metadata from a catalog service: attribute weights in [0,1], stored
/// densely in the order of the owning catalog's schema.
struct ItemMeta {
  ItemId item;
  std::vector<double> weights;
};

class Catalog {
 public:
  /// Throws ValidationError on empty or duplicate attribute names.
  explicit Catalog(std::vector<std::string> schema);

  const std::vector<std::string>& schema() const noexcept { return schema_; }

  /// Missing trailing weights are filled with 0. Throws ValidationError for
  /// duplicates, weights outside [0,1] or more weights than the schema has.
  void add(ItemId item, std::vector<double> weights);

  const ItemMeta* find(ItemId item) const noexcept;
  bool contains(ItemId item) const noexcept { return find(item) != nullptr; }
  /// Weight of a named attribute; nullopt for unknown items or attributes.
  std::optional<double> weight(ItemId item, std::string_view attribute) const;

  const std::map<ItemId, ItemMeta>& items() const noexcept { return items_; }
  std::size_t size() const noexcept { return items_.size(); }

 private:
  std::vector<std::string> schema_;
  std::map<ItemId, ItemMeta> items_;
};

}  // namespace proxrec
