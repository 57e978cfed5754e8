#include "proxrec/catalog.hpp"

#include <cmath>

#include "proxrec/errors.hpp"

namespace proxrec {

Catalog::Catalog(std::vector<std::string> schema) : schema_(std::move(schema)) {
  for (std::size_t i = 0; i < schema_.size(); ++i) {
    if (schema_[i].empty()) throw ValidationError("catalog attribute names must not be empty");
    for (std::size_t j = 0; j < i; ++j)
      if (schema_[i] == schema_[j]) throw ValidationError("duplicate catalog attribute '" + schema_[i] + "'");
  }
}

void Catalog::add(ItemId item, std::vector<double> weights) {
  if (items_.contains(item)) throw ValidationError("duplicate catalog item " + item.to_string());
  if (weights.size() > schema_.size())
    throw ValidationError("item " + item.to_string() + " has more weights than the catalog schema");
  for (double w : weights)
    if (!std::isfinite(w) || w < 0 || w > 1)
      throw ValidationError("catalog weight for " + item.to_string() + " outside [0,1]");
  weights.resize(schema_.size(), 0.0);
  items_.emplace(item, ItemMeta{item, std::move(weights)});
}

const ItemMeta* Catalog::find(ItemId item) const noexcept {
  auto it = items_.find(item);
  return it == items_.end() ? nullptr : &it->second;
}

std::optional<double> Catalog::weight(ItemId item, std::string_view attribute) const {
  const ItemMeta* meta = find(item);
  if (!meta) return std::nullopt;
  for (std::size_t i = 0; i < schema_.size(); ++i)
    if (schema_[i] == attribute) return meta->weights[i];
  return std::nullopt;
}

}  // namespace proxrec
