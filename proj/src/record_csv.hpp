#pragma once

#include <filesystem>
#include <ostream>
#include <span>
#include <vector>

#include "proxrec/types.hpp"

namespace proxrec::detail {

inline constexpr const char* kRecordHeader = "rater,category,key,value,timestamp,source,hops";

/// Parses the ratings/snapshot CSV. With `own_only`, rows with hops != 0 are
/// rejected.
std::vector<RatingRecord> read_records_csv(const std::filesystem::path& path, const RatingScale& scale,
                                           const Ontology& ontology, bool own_only);

void write_records_csv(std::ostream& out, std::span<const RatingRecord> records);

}  // namespace proxrec::detail
