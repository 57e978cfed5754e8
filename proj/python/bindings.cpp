#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "proxrec/cli.hpp"
#include "proxrec/codec.hpp"
#include "proxrec/errors.hpp"
#include "proxrec/experiment.hpp"
#include "proxrec/ingestion.hpp"
#include "proxrec/recommender.hpp"
#include "proxrec/simulator.hpp"

namespace py = pybind11;
using namespace proxrec;

namespace {

RatingRecord make_record(std::uint64_t rater, const std::string& category, const std::string& key, float value,
                         std::uint64_t timestamp, const std::string& source, std::uint8_t hops) {
  auto src = parse_source(source);
  if (!src) throw ValidationError("unknown source " + source);
  return {UserId{rater}, ItemId(category, key), value, timestamp, *src, hops};
}

py::dict metrics_row(const MetricsRow& r) {
  py::dict d;
  d["time"] = r.time;
  d["spread"] = r.spread;
  d["coverage"] = r.coverage;
  d["rmse"] = r.rmse ? py::cast(*r.rmse) : py::none();
  d["mae"] = r.mae ? py::cast(*r.mae) : py::none();
  d["mean_store_bytes"] = r.mean_store_bytes;
  d["fetches_attempted"] = r.fetches_attempted;
  d["fetches_dropped"] = r.fetches_dropped;
  return d;
}

py::dict prediction(const Prediction& p) {
  py::dict d;
  d["category"] = std::string(p.item.category());
  d["key"] = std::string(p.item.key());
  d["score"] = p.score;
  d["basis"] = std::string(to_string(p.basis));
  d["n_neighbors_used"] = p.n_neighbors_used;
  return d;
}

py::bytes to_bytes(const Bytes& b) { return py::bytes(reinterpret_cast<const char*>(b.data()), b.size()); }

Bytes from_bytes(const py::bytes& b) {
  const std::string s = b;
  return Bytes(s.begin(), s.end());
}

}  // namespace

PYBIND11_MODULE(_proxrec, m) {
  m.doc() = "Decentralized proximity-based recommender: store, codec, similarity, recommender and simulator";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<ProtocolError>(m, "ProtocolError", base.ptr());
  py::register_exception<ColdUserError>(m, "ColdUserError", base.ptr());

  py::class_<RatingRecord>(m, "RatingRecord")
      .def(py::init(&make_record), py::arg("rater"), py::arg("category"), py::arg("key"), py::arg("value"),
           py::arg("timestamp") = 0, py::arg("source") = "manual", py::arg("hops") = 0)
      .def_property_readonly("rater", [](const RatingRecord& r) { return r.rater.value; })
      .def_property_readonly("category", [](const RatingRecord& r) { return std::string(r.item.category()); })
      .def_property_readonly("key", [](const RatingRecord& r) { return std::string(r.item.key()); })
      .def_readonly("value", &RatingRecord::value)
      .def_readonly("timestamp", &RatingRecord::timestamp)
      .def_property_readonly("source", [](const RatingRecord& r) { return std::string(to_string(r.source)); })
      .def_readonly("hops", &RatingRecord::hops)
      .def("__repr__", [](const RatingRecord& r) {
        std::ostringstream os;
        os << "RatingRecord(" << r.rater.value << ", " << r.item.to_string() << ", " << r.value
           << ", hops=" << int(r.hops) << ")";
        return os.str();
      });

  py::class_<SimilarityConfig>(m, "SimilarityConfig")
      .def(py::init<>())
      .def_property(
          "metric", [](const SimilarityConfig& c) { return c.metric == SimilarityMetric::pearson ? "pearson" : "cosine"; },
          [](SimilarityConfig& c, const std::string& v) {
            if (v != "pearson" && v != "cosine") throw ValidationError("metric must be pearson or cosine");
            c.metric = v == "pearson" ? SimilarityMetric::pearson : SimilarityMetric::cosine;
          })
      .def_readwrite("min_overlap", &SimilarityConfig::min_overlap)
      .def_readwrite("significance_gamma", &SimilarityConfig::significance_gamma)
      .def_readwrite("propinquity_kappa", &SimilarityConfig::propinquity_kappa)
      .def_readwrite("propinquity_tau", &SimilarityConfig::propinquity_tau)
      .def_readwrite("duration_weight", &SimilarityConfig::duration_weight)
      .def_readwrite("hybrid_weight", &SimilarityConfig::hybrid_weight)
      .def_readwrite("fallback_to_propinquity", &SimilarityConfig::fallback_to_propinquity);

  py::class_<LocalStore>(m, "LocalStore")
      .def(py::init([](std::uint64_t owner, double lo, double hi) {
             return LocalStore(UserId{owner}, RatingScale{lo, hi});
           }),
           py::arg("owner"), py::arg("scale_min") = 1.0, py::arg("scale_max") = 5.0)
      .def_property_readonly("owner", [](const LocalStore& s) { return s.owner().value; })
      .def("merge",
           [](LocalStore& s, std::vector<RatingRecord> recs) {
             std::sort(recs.begin(), recs.end(),
                       [](const RatingRecord& a, const RatingRecord& b) { return key_of(a) < key_of(b); });
             MergeStats total;
             for (const auto& r : recs) total += s.merge_record(r);
             py::dict d;
             d["inserted"] = total.inserted;
             d["replaced"] = total.replaced;
             d["ignored"] = total.ignored;
             return d;
           })
      .def("record_encounter",
           [](LocalStore& s, std::uint64_t peer, double duration) { s.record_encounter(UserId{peer}, duration); })
      .def("records", [](const LocalStore& s) { return std::vector<RatingRecord>(s.records().begin(), s.records().end()); })
      .def("__len__", &LocalStore::size)
      .def("save", [](const LocalStore& s, const std::filesystem::path& p) { save_snapshot(s, p); });

  m.def("load_ratings", [](const std::filesystem::path& p) { return load_ratings(p); });
  m.def("load_trace", [](const std::filesystem::path& p) {
    std::vector<py::tuple> out;
    for (const auto& e : load_trace(p)) out.push_back(py::make_tuple(e.time, e.a.value, e.b.value, e.duration));
    return out;
  });
  m.def(
      "generate_trace",
      [](std::uint64_t n_nodes, double hours, double rate, std::uint64_t seed, double heterogeneity,
         std::uint64_t communities, double mean_duration) {
        TraceGenParams p{n_nodes, hours * 3600.0, rate, heterogeneity, communities, mean_duration, seed};
        std::vector<py::tuple> out;
        for (const auto& e : generate_trace(p)) out.push_back(py::make_tuple(e.time, e.a.value, e.b.value, e.duration));
        return out;
      },
      py::arg("n_nodes"), py::arg("hours"), py::arg("rate"), py::arg("seed") = 0, py::arg("heterogeneity") = 1.0,
      py::arg("communities") = 1, py::arg("mean_duration") = 60.0);

  m.def(
      "encode_payload",
      [](std::uint64_t sender, std::vector<RatingRecord> recs) {
        std::sort(recs.begin(), recs.end(),
                  [](const RatingRecord& a, const RatingRecord& b) { return key_of(a) < key_of(b); });
        return to_bytes(encode_payload(Payload{UserId{sender}, std::move(recs), 0.0}, Ontology{}));
      },
      py::arg("sender"), py::arg("records"));
  m.def("decode_payload", [](const py::bytes& b) {
    const Payload p = decode_payload(from_bytes(b), Ontology{}, RatingScale{});
    return py::make_tuple(p.sender.value, p.records);
  });
  m.def("encoded_size", [](const std::vector<RatingRecord>& recs) { return encoded_size(recs); });

  m.def(
      "rating_similarity",
      [](const LocalStore& s, std::uint64_t u, std::uint64_t v, const SimilarityConfig& cfg) {
        return rating_similarity(UserId{u}, UserId{v}, s, cfg);
      },
      py::arg("store"), py::arg("u"), py::arg("v"), py::arg("cfg") = SimilarityConfig{});
  m.def(
      "propinquity_similarity",
      [](std::uint64_t count, double duration, const SimilarityConfig& cfg) {
        return propinquity_similarity(EncounterStats{count, duration}, cfg);
      },
      py::arg("count"), py::arg("duration"), py::arg("cfg") = SimilarityConfig{});

  m.def(
      "predict",
      [](const LocalStore& s, std::uint64_t u, const std::string& category, const std::string& key,
         const SimilarityConfig& cfg, std::size_t k) {
        return prediction(predict(UserId{u}, ItemId(category, key), s, cfg, k));
      },
      py::arg("store"), py::arg("user"), py::arg("category"), py::arg("key"), py::arg("cfg") = SimilarityConfig{},
      py::arg("k") = 20);
  m.def(
      "top_n",
      [](const LocalStore& s, std::uint64_t u, std::size_t n, const SimilarityConfig& cfg, std::size_t k) {
        py::list out;
        for (const auto& p : top_n(UserId{u}, n, s, cfg, k)) out.append(prediction(p));
        return out;
      },
      py::arg("store"), py::arg("user"), py::arg("n") = 10, py::arg("cfg") = SimilarityConfig{}, py::arg("k") = 20);
  m.def(
      "group_recommend",
      [](const LocalStore& s, const std::vector<std::uint64_t>& members, std::size_t n, const std::string& strategy,
         const SimilarityConfig& cfg, std::size_t k) {
        auto st = parse_group_strategy(strategy);
        if (!st) throw ValidationError("unknown strategy " + strategy);
        std::vector<UserId> ids;
        for (auto id : members) ids.push_back(UserId{id});
        py::list out;
        for (const auto& g : group_recommend(ids, n, s, cfg, k, *st)) {
          py::dict d;
          d["category"] = std::string(g.item.category());
          d["key"] = std::string(g.item.key());
          d["score"] = g.score;
          py::list members_out;
          for (const auto& p : g.member_predictions) members_out.append(prediction(p));
          d["members"] = members_out;
          out.append(d);
        }
        return out;
      },
      py::arg("store"), py::arg("members"), py::arg("n") = 10, py::arg("strategy") = "average",
      py::arg("cfg") = SimilarityConfig{}, py::arg("k") = 20);

  m.def(
      "simulate",
      [](const std::filesystem::path& config, std::optional<std::uint64_t> seed, bool write) {
        Experiment exp = load_experiment(config);
        if (seed) exp.set_seed(*seed);
        RunResult result;
        {
          py::gil_scoped_release release;
          result = run(exp.sim);
        }
        if (write) write_outputs(exp, result, config);
        py::list rows;
        for (const auto& r : result.metrics) rows.append(metrics_row(r));
        return rows;
      },
      py::arg("config"), py::arg("seed") = py::none(), py::arg("write_outputs") = false,
      "Runs an experiment file and returns the metric rows.");

  m.def(
      "main",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "proxrec");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out;
        std::ostringstream err;
        const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line tool; returns (exit code, stdout, stderr).");
}
