#include "proxrec/ingestion.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

#include "csv.hpp"
#include "proxrec/errors.hpp"
#include "record_csv.hpp"
#include "rng.hpp"

namespace proxrec {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

void expect_header(csv::Reader& reader, std::vector<std::string>& f, const std::vector<std::string>& want) {
  if (!reader.next(f)) throw ParseError(reader.name(), 1, "missing header row");
  std::vector<std::string> got;
  for (const auto& s : f) got.emplace_back(csv::trim(s));
  if (got != want) {
    std::string joined;
    for (const auto& w : want) joined += (joined.empty() ? "" : ",") + w;
    throw ParseError(reader.name(), reader.line(), "expected header '" + joined + "'");
  }
}

}  // namespace

std::vector<RatingRecord> load_ratings(const std::filesystem::path& path, const RatingScale& scale,
                                       const Ontology& ontology) {
  return detail::read_records_csv(path, scale, ontology, true);
}

void save_ratings(std::span<const RatingRecord> records, const std::filesystem::path& path) {
  auto out = open_out(path);
  detail::write_records_csv(out, records);
}

void normalize_trace(std::vector<EncounterEvent>& events) {
  for (auto& e : events)
    if (e.b < e.a) std::swap(e.a, e.b);
  std::sort(events.begin(), events.end(), [](const EncounterEvent& x, const EncounterEvent& y) {
    if (x.time != y.time) return x.time < y.time;
    if (x.a != y.a) return x.a < y.a;
    if (x.b != y.b) return x.b < y.b;
    return x.duration > y.duration;
  });
  auto last = std::unique(events.begin(), events.end(), [](const EncounterEvent& x, const EncounterEvent& y) {
    return x.time == y.time && x.a == y.a && x.b == y.b;
  });
  events.erase(last, events.end());
}

std::vector<EncounterEvent> load_trace(const std::filesystem::path& path) {
  csv::Reader reader(path);
  std::vector<std::string> f;
  expect_header(reader, f, {"time", "a", "b", "duration"});
  std::vector<EncounterEvent> events;
  while (reader.next(f)) {
    auto fail = [&](const std::string& what) { throw ParseError(reader.name(), reader.line(), what); };
    if (f.size() != 4) fail("expected 4 fields, found " + std::to_string(f.size()));
    auto time = csv::parse_double(f[0]);
    auto a = csv::parse_u64(f[1]);
    auto b = csv::parse_u64(f[2]);
    auto duration = csv::parse_double(f[3]);
    if (!time || *time < 0) fail("bad time '" + f[0] + "'");
    if (!a) fail("bad node id '" + f[1] + "'");
    if (!b) fail("bad node id '" + f[2] + "'");
    if (*a == *b) fail("node " + f[1] + " encounters itself");
    if (!duration || *duration < 0) fail("bad duration '" + f[3] + "'");
    events.push_back({*time, UserId{*a}, UserId{*b}, *duration});
  }
  normalize_trace(events);
  return events;
}

void write_trace(std::span<const EncounterEvent> events, std::ostream& out) {
  out << "time,a,b,duration\n";
  for (const auto& e : events)
    out << csv::format_double(e.time) << ',' << e.a.value << ',' << e.b.value << ','
        << csv::format_double(e.duration) << '\n';
}

void save_trace(std::span<const EncounterEvent> events, const std::filesystem::path& path) {
  auto out = open_out(path);
  write_trace(events, out);
}

void TraceGenParams::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0; };
  if (n_nodes < 1) throw ValidationError("trace generation needs at least one node");
  if (n_communities < 1) throw ValidationError("trace generation needs at least one community");
  if (!positive(horizon)) throw ValidationError("trace horizon must be > 0");
  if (!positive(mean_rate)) throw ValidationError("contact rate must be > 0");
  if (!positive(mean_duration)) throw ValidationError("mean contact duration must be > 0");
  if (!std::isfinite(rate_heterogeneity) || rate_heterogeneity < 1)
    throw ValidationError("rate heterogeneity must be >= 1");
}

std::vector<EncounterEvent> generate_trace(const TraceGenParams& params, std::span<const UserId> nodes) {
  TraceGenParams p = params;
  p.n_nodes = nodes.size();
  p.validate();
  std::vector<EncounterEvent> events;
  const double base_rate = p.mean_rate / 3600.0;
  std::uint64_t pair = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < nodes.size(); ++j, ++pair) {
      const bool same_community = (i % p.n_communities) == (j % p.n_communities);
      const double rate = base_rate * (same_community ? p.rate_heterogeneity : 1.0);
      detail::Rng rng(detail::derive_seed(p.seed, pair));
      double t = rng.exponential(1.0 / rate);
      while (t < p.horizon) {
        events.push_back({t, nodes[i], nodes[j], rng.exponential(p.mean_duration)});
        t += rng.exponential(1.0 / rate);
      }
    }
  }
  normalize_trace(events);
  return events;
}

std::vector<EncounterEvent> generate_trace(const TraceGenParams& params) {
  params.validate();
  std::vector<UserId> nodes(params.n_nodes);
  for (std::uint64_t i = 0; i < params.n_nodes; ++i) nodes[i] = UserId{i + 1};
  return generate_trace(params, nodes);
}

Catalog load_catalog(const std::filesystem::path& path, const Ontology& ontology) {
  csv::Reader reader(path);
  std::vector<std::string> f;
  if (!reader.next(f)) throw ParseError(reader.name(), 1, "missing header row");
  if (f.size() < 2 || csv::trim(f[0]) != "category" || csv::trim(f[1]) != "key")
    throw ParseError(reader.name(), reader.line(), "catalog header must start with 'category,key'");
  std::vector<std::string> schema;
  for (std::size_t i = 2; i < f.size(); ++i) schema.emplace_back(csv::trim(f[i]));
  Catalog catalog = [&] {
    try {
      return Catalog(schema);
    } catch (const ValidationError& e) {
      throw ParseError(reader.name(), reader.line(), e.what());
    }
  }();

  while (reader.next(f)) {
    auto fail = [&](const std::string& what) { throw ParseError(reader.name(), reader.line(), what); };
    if (f.size() < 2) fail("expected at least category and key");
    if (f.size() > 2 + schema.size())
      fail("row has " + std::to_string(f.size() - 2) + " attributes, schema has " + std::to_string(schema.size()));
    const auto category = csv::trim(f[0]);
    if (!ontology.contains(category)) fail("category '" + std::string(category) + "' is not in the ontology");
    if (f[1].empty()) fail("empty item key");
    std::vector<double> weights;
    for (std::size_t i = 2; i < f.size(); ++i) {
      if (csv::trim(f[i]).empty()) {
        weights.push_back(0.0);
        continue;
      }
      auto w = csv::parse_double(f[i]);
      if (!w) fail("bad weight '" + f[i] + "' for attribute '" + schema[i - 2] + "'");
      if (*w < 0 || *w > 1) fail("weight " + f[i] + " for attribute '" + schema[i - 2] + "' outside [0,1]");
      weights.push_back(*w);
    }
    ItemId item(category, f[1]);
    if (catalog.contains(item)) fail("duplicate catalog item " + item.to_string());
    catalog.add(item, std::move(weights));
  }
  return catalog;
}

void save_catalog(const Catalog& catalog, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "category,key";
  for (const auto& a : catalog.schema()) {
    out << ',';
    csv::write_field(out, a);
  }
  out << '\n';
  for (const auto& [item, meta] : catalog.items()) {
    csv::write_field(out, item.category());
    out << ',';
    csv::write_field(out, item.key());
    for (double w : meta.weights) out << ',' << csv::format_double(w);
    out << '\n';
  }
}

std::size_t convert_ml100k(const std::filesystem::path& in, const std::filesystem::path& out_path,
                           std::uint64_t max_user) {
  std::ifstream in_file(in);
  if (!in_file) throw Error("cannot open " + in.string());
  auto out = open_out(out_path);
  out << detail::kRecordHeader << '\n';
  std::string line;
  std::size_t line_no = 0;
  std::size_t written = 0;
  while (std::getline(in_file, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (csv::trim(line).empty()) continue;
    std::array<std::string, 4> f;
    std::istringstream ss(line);
    for (auto& field : f)
      if (!(ss >> field)) throw ParseError(in.string(), line_no, "expected user, item, rating, timestamp");
    auto user = csv::parse_u64(f[0]);
    auto value = csv::parse_float(f[2]);
    auto ts = csv::parse_u64(f[3]);
    if (!user || !csv::parse_u64(f[1]) || !value || !ts)
      throw ParseError(in.string(), line_no, "malformed MovieLens rating row");
    if (max_user != 0 && *user > max_user) continue;
    out << *user << ",movies," << f[1] << ',' << csv::format_float(*value) << ',' << *ts << ",manual,0\n";
    ++written;
  }
  return written;
}

std::size_t convert_ml100k_items(const std::filesystem::path& in, const std::filesystem::path& out_path) {
  static const std::array<const char*, 19> kGenres{
      "unknown", "action",  "adventure", "animation", "childrens", "comedy",  "crime",
      "documentary", "drama", "fantasy", "film_noir", "horror", "musical", "mystery",
      "romance", "sci_fi",  "thriller", "war",       "western"};
  std::ifstream in_file(in, std::ios::binary);
  if (!in_file) throw Error("cannot open " + in.string());
  Catalog catalog(std::vector<std::string>(kGenres.begin(), kGenres.end()));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in_file, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    for (;;) {
      auto bar = line.find('|', start);
      f.push_back(line.substr(start, bar - start));
      if (bar == std::string::npos) break;
      start = bar + 1;
    }
    if (f.size() != 5 + kGenres.size())
      throw ParseError(in.string(), line_no, "expected 24 '|' separated fields");
    if (!csv::parse_u64(f[0])) throw ParseError(in.string(), line_no, "bad item id '" + f[0] + "'");
    std::vector<double> weights;
    for (std::size_t g = 0; g < kGenres.size(); ++g) {
      const auto& flag = f[5 + g];
      if (flag != "0" && flag != "1") throw ParseError(in.string(), line_no, "genre flags must be 0 or 1");
      weights.push_back(flag == "1" ? 1.0 : 0.0);
    }
    ItemId item("movies", f[0]);
    if (catalog.contains(item)) throw ParseError(in.string(), line_no, "duplicate item id " + f[0]);
    catalog.add(item, std::move(weights));
  }
  save_catalog(catalog, out_path);
  return catalog.size();
}

}  // namespace proxrec
