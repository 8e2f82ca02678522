#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "hdrx/aggregator.hpp"
#include "hdrx/anonymizer.hpp"
#include "hdrx/capture.hpp"
#include "hdrx/parser.hpp"
#include "hdrx/pipeline.hpp"
#include "hdrx/rates.hpp"
#include "hdrx/traffic_matrix.hpp"

namespace py = pybind11;
using namespace hdrx;

namespace {

Bytes to_bytes(const py::bytes& b) {
    const std::string_view v = b;
    return Bytes(v.begin(), v.end());
}

py::bytes from_bytes(const Bytes& b) {
    return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
}

py::bytes mac_bytes(const MacAddress& m) {
    return py::bytes(reinterpret_cast<const char*>(m.data()), m.size());
}

MacAddress to_mac(const py::bytes& b) {
    const std::string_view v = b;
    if (v.size() != 6) throw py::value_error("MAC address must be 6 bytes");
    MacAddress m{};
    std::copy(v.begin(), v.end(), m.begin());
    return m;
}

const char* errc_name(DecodeErrc e) {
    switch (e) {
        case DecodeErrc::truncated: return "truncated";
        case DecodeErrc::malformed: return "malformed";
        case DecodeErrc::wrong_protocol: return "wrong_protocol";
    }
    return "unknown";
}

py::dict outcome_dict(const ParseOutcome& o) {
    py::dict d;
    d["verdict"] = o.extracted() ? "extracted_pair" : "accepted_no_pair";
    d["pair"] = o.pair ? py::object(py::make_tuple(o.pair->src_ip, o.pair->dst_ip)) : py::none();
    d["error"] = o.error ? py::object(py::str(errc_name(*o.error))) : py::none();
    d["header_bytes_consumed"] = o.headers.header_bytes_consumed;

    const auto& h = o.headers;
    py::dict eth;
    eth["dst"] = mac_bytes(h.eth.dst_mac);
    eth["src"] = mac_bytes(h.eth.src_mac);
    eth["ethertype"] = h.eth.ethertype;
    d["eth"] = eth;

    if (h.ip) {
        py::dict ip;
        ip["version"] = h.ip->version;
        ip["ihl"] = h.ip->hdr_len;
        ip["total_length"] = h.ip->total_length;
        ip["ttl"] = h.ip->ttl;
        ip["protocol"] = h.ip->protocol;
        ip["src"] = h.ip->src_ip;
        ip["dst"] = h.ip->dst_ip;
        ip["options"] = from_bytes(h.ip->options);
        d["ipv4"] = ip;
    } else {
        d["ipv4"] = py::none();
    }

    if (const auto* t = h.tcp()) {
        py::dict tcp;
        tcp["src_port"] = t->src_port;
        tcp["dst_port"] = t->dst_port;
        tcp["seq"] = t->seq;
        tcp["ack"] = t->ack;
        tcp["data_offset"] = t->data_offset;
        tcp["flags"] = t->flags;
        tcp["options"] = from_bytes(t->options);
        d["l4"] = "tcp";
        d["tcp"] = tcp;
    } else if (const auto* u = h.udp()) {
        py::dict udp;
        udp["src_port"] = u->src_port;
        udp["dst_port"] = u->dst_port;
        udp["length"] = u->length;
        d["l4"] = "udp";
        d["udp"] = udp;
    } else {
        d["l4"] = h.ip ? py::object(py::str("other")) : py::none();
    }
    return d;
}

std::shared_ptr<const Anonymizer> anonymizer_for(const AnonymizerKey& key) {
    return std::make_shared<KeyedAnonymizer>(key);
}

py::tuple rates_tuple(const Rates& r) { return py::make_tuple(r.mbps, r.pps); }

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Header extraction, flow-pair aggregation and traffic-matrix collection.";

    py::register_exception<DecodeError>(m, "DecodeError", PyExc_ValueError);
    py::register_exception<CaptureError>(m, "CaptureError", PyExc_IOError);
    py::register_exception<PipelineError>(m, "PipelineError", PyExc_RuntimeError);

    // parser
    py::class_<ParseStats>(m, "ParseStats")
        .def_readonly("total", &ParseStats::total)
        .def_readonly("ipv4", &ParseStats::ipv4)
        .def_readonly("tcp", &ParseStats::tcp)
        .def_readonly("udp", &ParseStats::udp)
        .def_readonly("other_l4", &ParseStats::other_l4)
        .def_readonly("non_ip", &ParseStats::non_ip)
        .def_readonly("errored", &ParseStats::errored)
        .def("consistent", &ParseStats::consistent)
        .def("__repr__", [](const ParseStats& s) {
            std::ostringstream out;
            out << "ParseStats(total=" << s.total << ", ipv4=" << s.ipv4 << ", tcp=" << s.tcp
                << ", udp=" << s.udp << ", other_l4=" << s.other_l4 << ", non_ip=" << s.non_ip
                << ", errored=" << s.errored << ")";
            return out.str();
        });

    m.def("parse", [](const py::bytes& frame) { return outcome_dict(parse(ByteView(to_bytes(frame)))); },
          py::arg("frame"), "Runs the parse graph over one frame and returns a dict of decoded fields.");
    m.def(
        "parse_stream",
        [](const std::vector<py::bytes>& frames) {
            std::vector<RawPacket> pkts;
            pkts.reserve(frames.size());
            for (const auto& f : frames) pkts.emplace_back(to_bytes(f));
            return parse_stream(pkts).stats;
        },
        py::arg("frames"));

    // aggregator
    py::class_<SummaryPacket>(m, "SummaryPacket")
        .def(py::init([](const std::vector<std::pair<std::uint32_t, std::uint32_t>>& pairs,
                         std::uint16_t ethertype) {
                 SummaryPacket s;
                 s.eth.ethertype = ethertype;
                 for (const auto& [src, dst] : pairs) s.pairs.push_back({src, dst});
                 return s;
             }),
             py::arg("pairs"), py::arg("ethertype") = kDefaultSummaryEthertype)
        .def_property_readonly("pairs",
                               [](const SummaryPacket& s) {
                                   std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
                                   for (const auto& p : s.pairs) out.emplace_back(p.src_ip, p.dst_ip);
                                   return out;
                               })
        .def_property_readonly("count", &SummaryPacket::count)
        .def_property_readonly("ethertype", [](const SummaryPacket& s) { return s.eth.ethertype; })
        .def_property_readonly("wire_size", &SummaryPacket::wire_size)
        .def("__eq__", [](const SummaryPacket& a, const SummaryPacket& b) { return a == b; });

    py::class_<Aggregator>(m, "Aggregator")
        .def(py::init([](unsigned n_p, std::uint16_t ethertype, const py::bytes& dst_mac,
                         const py::bytes& src_mac) {
                 AggregatorConfig cfg;
                 cfg.n_p = n_p;
                 cfg.summary_ethertype = ethertype;
                 cfg.summary_dst_mac = to_mac(dst_mac);
                 cfg.summary_src_mac = to_mac(src_mac);
                 return Aggregator(cfg);
             }),
             py::arg("n_p") = 150, py::arg("ethertype") = kDefaultSummaryEthertype,
             py::arg("dst_mac") = py::bytes(std::string(6, '\0')),
             py::arg("src_mac") = py::bytes(std::string(6, '\0')))
        .def(
            "push",
            [](Aggregator& a, std::uint32_t src, std::uint32_t dst) { return a.push({src, dst}); },
            py::arg("src_ip"), py::arg("dst_ip"))
        .def("flush", &Aggregator::flush)
        .def_property_readonly("pending", &Aggregator::pending)
        .def_property_readonly("emitted", &Aggregator::emitted);

    m.def("encode_summary", [](const SummaryPacket& s) { return from_bytes(encode_summary(s)); });
    m.def(
        "decode_summary",
        [](const py::bytes& data, std::uint16_t ethertype) {
            return decode_summary(ByteView(to_bytes(data)), ethertype);
        },
        py::arg("data"), py::arg("expected_ethertype") = kDefaultSummaryEthertype);
    m.def("theoretical_drop_rate", &theoretical_drop_rate, py::arg("n_p"));
    m.def(
        "simulate_slot_model",
        [](std::uint64_t n_pairs, unsigned n_p) {
            const auto r = simulate_slot_model(n_pairs, n_p);
            py::dict d;
            d["forwarded"] = r.forwarded;
            d["displaced"] = r.displaced;
            d["displaced_fraction"] = r.displaced_fraction();
            return d;
        },
        py::arg("n_pairs"), py::arg("n_p"));

    // collector
    py::class_<AnonymizerKey>(m, "AnonymizerKey")
        .def(py::init([](const py::bytes& raw) {
                 const std::string_view v = raw;
                 if (v.size() != AnonymizerKey::kSize) throw py::value_error("key must be 16 bytes");
                 std::array<std::uint8_t, AnonymizerKey::kSize> k{};
                 std::copy(v.begin(), v.end(), k.begin());
                 return AnonymizerKey(k);
             }),
             py::arg("raw"))
        .def_static("random", &AnonymizerKey::random)
        .def_static("from_file", &load_key_file, py::arg("path"))
        .def("__repr__", [](const AnonymizerKey&) { return "AnonymizerKey(<redacted>)"; });

    m.def("anonymize", py::overload_cast<std::uint32_t, const AnonymizerKey&>(&anonymize), py::arg("ip"),
          py::arg("key"));

    py::class_<TrafficMatrix>(m, "TrafficMatrix")
        .def(py::init<>())
        .def("add", &TrafficMatrix::add, py::arg("anon_src"), py::arg("anon_dst"), py::arg("count") = 1)
        .def(
            "ingest_summary",
            [](TrafficMatrix& tm, const SummaryPacket& s, const AnonymizerKey& key) {
                tm.ingest_summary(s, KeyedAnonymizer(key));
            },
            py::arg("summary"), py::arg("key"))
        .def("merge", py::overload_cast<const TrafficMatrix&>(&TrafficMatrix::merge))
        .def("at", &TrafficMatrix::at)
        .def_property_readonly("total", &TrafficMatrix::total)
        .def("__len__", &TrafficMatrix::size)
        .def("entries",
             [](const TrafficMatrix& tm) {
                 std::vector<std::tuple<std::uint32_t, std::uint32_t, std::uint64_t>> out;
                 for (const auto& [cell, n] : tm.sorted_entries()) out.emplace_back(cell.first, cell.second, n);
                 return out;
             })
        .def("count_histogram", &TrafficMatrix::count_histogram)
        .def("export",
             [](const TrafficMatrix& tm) {
                 std::ostringstream out;
                 export_matrix(tm, out);
                 return out.str();
             })
        .def_static(
            "import_",
            [](const std::string& text) {
                std::istringstream in(text);
                return import_matrix(in);
            },
            py::arg("text"))
        .def("__eq__", [](const TrafficMatrix& a, const TrafficMatrix& b) { return a == b; });

    // capture
    py::class_<CaptureRecord>(m, "CaptureRecord")
        .def(py::init([](const py::bytes& data, std::optional<std::uint32_t> orig_len, std::uint32_t ts_sec,
                         std::uint32_t ts_frac) {
                 CaptureRecord r;
                 r.data = to_bytes(data);
                 r.orig_len = orig_len.value_or(static_cast<std::uint32_t>(r.data.size()));
                 r.ts_sec = ts_sec;
                 r.ts_frac = ts_frac;
                 return r;
             }),
             py::arg("data"), py::arg("orig_len") = py::none(), py::arg("ts_sec") = 0, py::arg("ts_frac") = 0)
        .def_property_readonly("data", [](const CaptureRecord& r) { return from_bytes(r.data); })
        .def_readonly("orig_len", &CaptureRecord::orig_len)
        .def_readonly("ts_sec", &CaptureRecord::ts_sec)
        .def_readonly("ts_frac", &CaptureRecord::ts_frac)
        .def("__eq__", [](const CaptureRecord& a, const CaptureRecord& b) { return a == b; });

    py::class_<CaptureFile>(m, "CaptureFile")
        .def(py::init<>())
        .def_readwrite("records", &CaptureFile::records)
        .def_readwrite("snaplen", &CaptureFile::snaplen)
        .def_property(
            "swapped", [](const CaptureFile& c) { return c.byte_order == ByteOrder::swapped; },
            [](CaptureFile& c, bool s) { c.byte_order = s ? ByteOrder::swapped : ByteOrder::native; })
        .def_property(
            "nanosecond", [](const CaptureFile& c) { return c.precision == TimestampPrecision::nano; },
            [](CaptureFile& c, bool n) { c.precision = n ? TimestampPrecision::nano : TimestampPrecision::micro; })
        .def("__len__", [](const CaptureFile& c) { return c.records.size(); })
        .def("__eq__", [](const CaptureFile& a, const CaptureFile& b) { return a == b; });

    m.def("read_capture", py::overload_cast<const std::filesystem::path&>(&read_capture), py::arg("path"));
    m.def("write_capture", py::overload_cast<const CaptureFile&, const std::filesystem::path&>(&write_capture),
          py::arg("capture"), py::arg("path"));
    m.def(
        "pad_packet", [](const CaptureRecord& r) { return from_bytes(pad_packet(r).data); }, py::arg("record"));
    m.def("synthesize_uniform", &synthesize_uniform, py::arg("count"), py::arg("packet_size"),
          py::arg("flows"));

    // rates and pipeline
    m.def(
        "compute_rates",
        [](std::uint64_t packets, std::uint64_t bytes, double duration_s) {
            return rates_tuple(compute_rates(packets, bytes, duration_s));
        },
        py::arg("packets"), py::arg("bytes"), py::arg("duration_s"), "Returns (mbps, pps).");

    py::class_<RateRow>(m, "RateRow")
        .def_readonly("packet_size", &RateRow::packet_size)
        .def_readonly("mbps", &RateRow::mbps)
        .def_readonly("pps", &RateRow::pps);

    py::class_<RateReport>(m, "RateReport")
        .def_readonly("rows", &RateReport::rows)
        .def_readonly("duration_s", &RateReport::duration_s)
        .def_property_readonly("mode", [](const RateReport& r) { return std::string(to_string(r.mode)); })
        .def("consistent", &RateReport::consistent, py::arg("rel_tol") = 1e-3)
        .def("table", &format_rate_table)
        .def("tsv", [](const RateReport& r) {
            std::ostringstream out;
            write_report_tsv(r, out);
            return out.str();
        });

    py::class_<PipelineResult>(m, "PipelineResult")
        .def_readonly("stats", &PipelineResult::stats)
        .def_readonly("bytes_parsed", &PipelineResult::bytes_parsed)
        .def_readonly("pairs_aggregated", &PipelineResult::pairs_aggregated)
        .def_readonly("summaries_emitted", &PipelineResult::summaries_emitted)
        .def_readonly("matrix", &PipelineResult::matrix)
        .def_readonly("report", &PipelineResult::report);

    auto make_config = [](const AnonymizerKey& key, unsigned n_p, const std::string& mode, unsigned workers,
                          std::optional<double> pps, std::uint32_t loops) {
        PipelineConfig cfg;
        cfg.anonymizer = anonymizer_for(key);
        cfg.aggregator.n_p = n_p;
        cfg.replay.mode = parse_replay_mode(mode);
        if (cfg.replay.mode == ReplayMode::datagram_socket) cfg.replay.port = 0;
        cfg.replay.target_pps = pps;
        cfg.replay.loop_count = loops;
        cfg.parser_workers = workers;
        return cfg;
    };

    m.def(
        "run_pipeline",
        [make_config](const CaptureFile& cap, const AnonymizerKey& key, unsigned n_p, const std::string& mode,
                      unsigned workers, std::optional<double> pps, std::uint32_t loops) {
            const auto cfg = make_config(key, n_p, mode, workers, pps, loops);
            py::gil_scoped_release release;
            return run_pipeline(cfg, cap);
        },
        py::arg("capture"), py::arg("key"), py::arg("n_p") = 150, py::arg("mode") = "in-process",
        py::arg("workers") = 1, py::arg("pps") = py::none(), py::arg("loops") = 1);

    m.def(
        "bench_ladder",
        [make_config](std::vector<std::size_t> sizes, std::uint64_t count, std::optional<AnonymizerKey> key,
                      unsigned n_p, const std::string& mode) {
            const auto cfg = make_config(key.value_or(AnonymizerKey::random()), n_p, mode, 1, std::nullopt, 1);
            py::gil_scoped_release release;
            return bench_ladder(std::move(sizes), count, cfg);
        },
        py::arg("sizes") = kDefaultLadder, py::arg("count") = 1'000'000, py::arg("key") = py::none(),
        py::arg("n_p") = 150, py::arg("mode") = "in-process");
}
