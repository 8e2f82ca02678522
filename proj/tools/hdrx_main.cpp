// hdrx: header extraction pipeline driver.
//
//   hdrx parse <capture>                 parse statistics only
//   hdrx run <capture> ...               generator -> parser -> aggregator -> collector
//   hdrx bench --sizes 64,128,...        fixed-size throughput ladder
//   hdrx export <summaries.pcap> ...     rebuild a matrix from captured summary frames
//   hdrx simulate-drop --pairs N --np K  slot-model displacement
//   hdrx synth --count N --size S -o f   write a synthetic TCP/IPv4 capture
//
// The anonymization key is read from --key-file or $HDRX_KEY_FILE; it is
// never accepted on the command line itself.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "hdrx/aggregator.hpp"
#include "hdrx/anonymizer.hpp"
#include "hdrx/capture.hpp"
#include "hdrx/parser.hpp"
#include "hdrx/pipeline.hpp"
#include "hdrx/rates.hpp"
#include "hdrx/traffic_matrix.hpp"

namespace {

struct CommonOptions {
    unsigned n_p = 150;
    std::string key_file;
    std::string mode = "in-process";
    double pps = 0.0;
    unsigned workers = 1;
    std::string summary_ethertype = "0x88b5";
    std::string address = hdrx::kDefaultReplayAddress;
    std::uint16_t port = hdrx::kDefaultReplayPort;
    bool no_pad = false;
};

std::uint16_t parse_ethertype(const std::string& text) {
    std::size_t used = 0;
    unsigned long v = std::stoul(text, &used, 0);
    if (used != text.size() || v > 0xFFFF) throw CLI::ValidationError("--summary-ethertype", text);
    return static_cast<std::uint16_t>(v);
}

void add_pipeline_flags(CLI::App* cmd, CommonOptions& o, bool key_optional) {
    cmd->add_option("--np", o.n_p, "Flow pairs per summary packet")
        ->check(CLI::Range(1u, hdrx::kMaxPairsPerSummary))
        ->capture_default_str();
    cmd->add_option("--key-file", o.key_file,
                    key_optional ? "Anonymization key file (default: random per run)"
                                 : "Anonymization key file (16 raw bytes or 32 hex digits)")
        ->envname(hdrx::kKeyFileEnvVar)
        ->check(CLI::ExistingFile);
    cmd->add_option("--mode", o.mode, "Replay channel")
        ->check(CLI::IsMember({"in-process", "socket"}))
        ->capture_default_str();
    cmd->add_option("--pps", o.pps, "Target packet rate (default: unpaced)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--workers", o.workers, "Parser worker threads")
        ->check(CLI::Range(1u, 64u))
        ->capture_default_str();
    cmd->add_option("--summary-ethertype", o.summary_ethertype, "Ethertype of summary frames")
        ->capture_default_str();
    cmd->add_option("--address", o.address, "Loopback address for socket mode")->capture_default_str();
    cmd->add_option("--port", o.port, "UDP port for socket mode (0: ephemeral)")->capture_default_str();
}

hdrx::PipelineConfig make_config(const CommonOptions& o, bool key_optional) {
    hdrx::PipelineConfig cfg;
    cfg.aggregator.n_p = o.n_p;
    cfg.aggregator.summary_ethertype = parse_ethertype(o.summary_ethertype);
    cfg.replay.mode = hdrx::parse_replay_mode(o.mode);
    if (o.pps > 0.0) cfg.replay.target_pps = o.pps;
    cfg.replay.pad = !o.no_pad;
    cfg.replay.address = o.address;
    cfg.replay.port = o.port;
    cfg.parser_workers = o.workers;

    std::optional<hdrx::AnonymizerKey> key;
    if (!o.key_file.empty()) key = hdrx::load_key_file(o.key_file);
    if (!key) {
        if (!key_optional) {
            throw std::runtime_error(std::string("no anonymization key: pass --key-file or set ") +
                                     hdrx::kKeyFileEnvVar);
        }
        key = hdrx::AnonymizerKey::random();
    }
    cfg.anonymizer = std::make_shared<hdrx::KeyedAnonymizer>(*key);
    return cfg;
}

void print_stats(const hdrx::ParseStats& s) {
    std::printf("packets\t%llu\nipv4\t%llu\ntcp\t%llu\nudp\t%llu\nother_l4\t%llu\nnon_ip\t%llu\nerrored\t%llu\n",
                static_cast<unsigned long long>(s.total), static_cast<unsigned long long>(s.ipv4),
                static_cast<unsigned long long>(s.tcp), static_cast<unsigned long long>(s.udp),
                static_cast<unsigned long long>(s.other_l4), static_cast<unsigned long long>(s.non_ip),
                static_cast<unsigned long long>(s.errored));
}

int cmd_parse(const std::string& path, bool no_pad) {
    const auto cap = hdrx::read_capture(path);
    hdrx::ParseStats stats;
    for (const auto& rec : cap.records) {
        if (no_pad) {
            stats.record(hdrx::parse(hdrx::ByteView(rec.data)));
        } else {
            stats.record(hdrx::parse(hdrx::pad_packet(rec)));
        }
    }
    print_stats(stats);
    return 0;
}

int cmd_run(const std::string& path, const CommonOptions& o, unsigned loops,
            const std::string& out_matrix, const std::string& out_report,
            const std::string& out_summaries) {
    auto cfg = make_config(o, false);
    cfg.replay.loop_count = loops;
    cfg.matrix_out = out_matrix;
    cfg.report_out = out_report;
    cfg.summaries_out = out_summaries;
    const auto cap = hdrx::read_capture(path);
    const auto r = hdrx::run_pipeline(cfg, cap);
    print_stats(r.stats);
    std::printf("summaries\t%llu\nmatrix_entries\t%zu\nmatrix_total\t%llu\n",
                static_cast<unsigned long long>(r.summaries_emitted), r.matrix.size(),
                static_cast<unsigned long long>(r.matrix.total()));
    if (r.replay.send_errors > 0) {
        std::printf("send_errors\t%llu\n", static_cast<unsigned long long>(r.replay.send_errors));
    }
    std::printf("\n%s", hdrx::format_rate_table(r.report).c_str());
    return 0;
}

int cmd_bench(const std::vector<std::size_t>& sizes, std::uint64_t count, const CommonOptions& o,
              const std::string& out_report) {
    auto cfg = make_config(o, true);
    cfg.report_out = out_report;
    const auto report = hdrx::bench_ladder(sizes, count, cfg);
    std::printf("# accounting: %s\n# mode: %s, %llu packets per size, %.3f s measured\n",
                hdrx::kReportAccounting, hdrx::to_string(report.mode),
                static_cast<unsigned long long>(count), report.duration_s);
    std::printf("%s", hdrx::format_rate_table(report).c_str());
    return report.consistent() ? 0 : 2;
}

int cmd_export(const std::string& path, const CommonOptions& o, const std::string& out_matrix) {
    auto cfg = make_config(o, false);
    const auto cap = hdrx::read_capture(path);
    hdrx::TrafficMatrix m;
    std::uint64_t skipped = 0;
    for (const auto& rec : cap.records) {
        try {
            m.ingest_summary(hdrx::decode_summary(rec.data, cfg.aggregator.summary_ethertype),
                             *cfg.anonymizer);
        } catch (const hdrx::DecodeError& e) {
            if (e.code() != hdrx::DecodeErrc::wrong_protocol) throw;
            ++skipped;
        }
    }
    if (skipped > 0) {
        std::fprintf(stderr, "skipped %llu non-summary frames\n", static_cast<unsigned long long>(skipped));
    }
    if (out_matrix.empty() || out_matrix == "-") {
        hdrx::export_matrix(m, std::cout);
    } else {
        hdrx::write_file_atomically(out_matrix, [&](std::ostream& out) { hdrx::export_matrix(m, out); });
        std::fprintf(stderr, "%zu rows, total %llu\n", m.size(), static_cast<unsigned long long>(m.total()));
    }
    return 0;
}

int cmd_simulate_drop(std::uint64_t pairs, unsigned n_p) {
    const auto r = hdrx::simulate_slot_model(pairs, n_p);
    std::printf("pairs\t%llu\nn_p\t%u\nforwarded\t%llu\ndisplaced\t%llu\ndisplaced_fraction\t%.9f\n"
                "theoretical_drop_rate\t%.9f\n",
                static_cast<unsigned long long>(pairs), n_p, static_cast<unsigned long long>(r.forwarded),
                static_cast<unsigned long long>(r.displaced), r.displaced_fraction(),
                hdrx::theoretical_drop_rate(n_p));
    return 0;
}

int cmd_synth(std::size_t count, std::size_t size, std::size_t flows, std::uint32_t snaplen,
              const std::string& out) {
    auto cap = hdrx::synthesize_uniform(count, size, flows);
    if (snaplen > 0) {
        cap.snaplen = snaplen;
        for (auto& rec : cap.records) {
            if (rec.data.size() > snaplen) rec.data.resize(snaplen);
        }
    }
    hdrx::write_capture(cap, out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Header extraction, flow-pair aggregation and anonymized traffic matrices"};
    app.set_config("--config", "", "TOML/INI file supplying any of the flags below");
    app.require_subcommand(1);

    CommonOptions opts;
    std::string capture_path;
    bool no_pad = false;

    auto* parse_cmd = app.add_subcommand("parse", "Parse a capture and print statistics");
    parse_cmd->add_option("capture", capture_path, "pcap file")->required()->check(CLI::ExistingFile);
    parse_cmd->add_flag("--no-pad", no_pad, "Do not zero-pad snap-length records to wire length");

    auto* run_cmd = app.add_subcommand("run", "Run the full pipeline over a capture");
    unsigned loops = 1;
    std::string out_matrix, out_report, out_summaries;
    run_cmd->add_option("capture", capture_path, "pcap file")->required()->check(CLI::ExistingFile);
    add_pipeline_flags(run_cmd, opts, false);
    run_cmd->add_option("--loops", loops, "Replay the trace this many times")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    run_cmd->add_flag("--no-pad", opts.no_pad, "Do not zero-pad snap-length records");
    run_cmd->add_option("--out-matrix", out_matrix, "Matrix TSV output path");
    run_cmd->add_option("--out-report", out_report, "Rate report TSV output path");
    run_cmd->add_option("--out-summaries", out_summaries, "Write emitted summary frames as a pcap");

    auto* bench_cmd = app.add_subcommand("bench", "Throughput ladder over fixed packet sizes");
    std::vector<std::size_t> sizes = hdrx::kDefaultLadder;
    std::uint64_t count = 1'000'000;
    bench_cmd->add_option("--sizes", sizes, "Packet sizes in bytes")
        ->delimiter(',')
        ->check(CLI::Range(std::size_t{54}, std::size_t{9000}))
        ->capture_default_str();
    bench_cmd->add_option("--count", count, "Packets per size")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    add_pipeline_flags(bench_cmd, opts, true);
    bench_cmd->add_option("--out-report", out_report, "Rate report TSV output path");

    auto* export_cmd = app.add_subcommand("export", "Build a matrix from a capture of summary frames");
    export_cmd->add_option("summaries", capture_path, "pcap of summary frames")
        ->required()
        ->check(CLI::ExistingFile);
    export_cmd->add_option("--key-file", opts.key_file, "Anonymization key file")
        ->envname(hdrx::kKeyFileEnvVar)
        ->check(CLI::ExistingFile);
    export_cmd->add_option("--summary-ethertype", opts.summary_ethertype, "Ethertype of summary frames")
        ->capture_default_str();
    export_cmd->add_option("--out-matrix", out_matrix, "Matrix TSV output path (default: stdout)");

    auto* drop_cmd = app.add_subcommand("simulate-drop", "Slot-model displacement for a pair count");
    std::uint64_t pairs = 1'500'000;
    drop_cmd->add_option("--pairs", pairs, "Number of forwarded flow pairs")->capture_default_str();
    drop_cmd->add_option("--np", opts.n_p, "Flow pairs per summary packet")
        ->check(CLI::Range(1u, hdrx::kMaxPairsPerSummary))
        ->capture_default_str();

    auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic fixed-size TCP/IPv4 capture");
    std::size_t synth_size = 64, flows = 1024;
    std::uint32_t snaplen = 0;
    std::string synth_out;
    std::size_t synth_count = 1000;
    synth_cmd->add_option("--count", synth_count, "Number of packets")->capture_default_str();
    synth_cmd->add_option("--size", synth_size, "Frame size in bytes")
        ->check(CLI::Range(std::size_t{54}, std::size_t{9000}))
        ->capture_default_str();
    synth_cmd->add_option("--flows", flows, "Distinct (src, dst) pairs")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    synth_cmd->add_option("--snaplen", snaplen, "Truncate stored bytes (0: keep whole frames)");
    synth_cmd->add_option("-o,--output", synth_out, "Output pcap")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*parse_cmd) return cmd_parse(capture_path, no_pad);
        if (*run_cmd) return cmd_run(capture_path, opts, loops, out_matrix, out_report, out_summaries);
        if (*bench_cmd) return cmd_bench(sizes, count, opts, out_report);
        if (*export_cmd) return cmd_export(capture_path, opts, out_matrix);
        if (*drop_cmd) return cmd_simulate_drop(pairs, opts.n_p);
        if (*synth_cmd) return cmd_synth(synth_count, synth_size, flows, snaplen, synth_out);
    } catch (const hdrx::PipelineError& e) {
        std::fprintf(stderr, "hdrx: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "hdrx: %s\n", e.what());
        return 1;
    }
    return 1;
}
