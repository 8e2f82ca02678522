// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "frames.hpp"
#include "hdrx/aggregator.hpp"
#include "hdrx/anonymizer.hpp"
#include "hdrx/capture.hpp"
#include "hdrx/parser.hpp"
#include "hdrx/pipeline.hpp"
#include "reference_decoder.hpp"
#include "temp_dir.hpp"

namespace {

using namespace hdrx;

struct Check {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& why) {
        if (!cond && ok) {
            ok = false;
            detail = why;
        }
    }
};

AnonymizerKey fixed_key() {
    std::array<std::uint8_t, 16> k{};
    for (std::size_t i = 0; i < k.size(); ++i) k[i] = static_cast<std::uint8_t>(0x30 + 7 * i);
    return AnonymizerKey(k);
}

Check bench_ladder_report() {
    Check v;
    hdrx::testing::TempDir dir;
    PipelineConfig cfg;
    cfg.anonymizer = std::make_shared<KeyedAnonymizer>(fixed_key());
    cfg.report_out = dir / "ladder.tsv";

    const auto start = std::chrono::steady_clock::now();
    bench_ladder(kDefaultLadder, 1'000'000, cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    v.require(secs < 300.0, "ladder took " + std::to_string(secs) + " s");

    std::ifstream in(cfg.report_out);
    v.require(static_cast<bool>(in), "report not written");
    RateReport report;
    try {
        report = read_report_tsv(in);
    } catch (const std::exception& e) {
        v.require(false, std::string("report unreadable: ") + e.what());
        return v;
    }
    v.require(report.rows.size() == 6, "expected 6 rows, got " + std::to_string(report.rows.size()));
    for (std::size_t i = 0; i < report.rows.size() && i < 6; ++i) {
        const auto& row = report.rows[i];
        v.require(row.packet_size == static_cast<double>(kDefaultLadder[i]), "row sizes out of order");
        v.require(row.pps > 0.0 && row.mbps > 0.0, "non-positive rate");
        const double expected = row.pps * row.packet_size * 8.0 / 1e6;
        v.require(std::abs(row.mbps - expected) <= 1e-3 * expected, "mbps identity off by more than 0.1%");
    }
    if (v.ok) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "6 rows in %.1f s", secs);
        v.detail = buf;
    }
    return v;
}

Check parser_oracle() {
    Check v;
    std::mt19937_64 rng(0x5eed);
    std::map<hdrx::testing::RefClass, int> classes;
    int truncated = 0, with_options = 0;
    const int n = 20'000;
    for (int i = 0; i < n; ++i) {
        const auto f = hdrx::testing::fuzz_frame(rng);
        const auto ref = hdrx::testing::reference_decode(f.bytes);
        const auto got = hdrx::testing::flatten(parse(ByteView(f.bytes)));
        v.require(got == ref, "disagreement on frame " + std::to_string(i));
        ++classes[ref.cls];
        truncated += f.truncated;
        with_options += !ref.ip_options.empty() || !ref.tcp_options.empty();
    }
    v.require(classes.size() == 3, "fuzzer missed a classification");
    v.require(truncated > 1000 && with_options > 1000, "fuzzer coverage too thin");
    if (v.ok) {
        v.detail = std::to_string(n) + " frames, 100% agreement (extract " +
                   std::to_string(classes[hdrx::testing::RefClass::extract]) + ", accept " +
                   std::to_string(classes[hdrx::testing::RefClass::accept]) + ", error " +
                   std::to_string(classes[hdrx::testing::RefClass::error]) + ")";
    }
    return v;
}

Check summary_format() {
    Check v;
    AggregatorConfig cfg;
    cfg.n_p = 150;
    Aggregator agg(cfg);
    std::optional<SummaryPacket> full;
    for (std::uint32_t i = 0; i < 150 && !full; ++i) full = agg.push({i, ~i});
    v.require(full.has_value(), "no summary after 150 pairs");
    if (full) v.require(encode_summary(*full).size() == 1215, "full summary is not 1215 bytes");

    std::mt19937_64 rng(1215);
    for (int i = 0; i < 1000; ++i) {
        SummaryPacket s;
        for (auto& b : s.eth.dst_mac) b = static_cast<std::uint8_t>(rng());
        for (auto& b : s.eth.src_mac) b = static_cast<std::uint8_t>(rng());
        s.eth.ethertype = kDefaultSummaryEthertype;
        s.pairs.resize(rng() % 256);
        for (auto& p : s.pairs) p = {static_cast<std::uint32_t>(rng()), static_cast<std::uint32_t>(rng())};
        v.require(decode_summary(encode_summary(s)) == s, "round trip mismatch at " + std::to_string(i));
    }
    if (v.ok) v.detail = "1215 bytes; 1000 round trips exact";
    return v;
}

Check drop_rate() {
    Check v;
    const auto r = simulate_slot_model(1'500'000, 150);
    v.require(r.displaced * 151 == r.offered(), "displaced/offered is not 1/151");
    v.require(r.displaced_fraction() == 1.0 / 151.0, "displaced fraction != 1/151");
    for (unsigned n_p : {1u, 2u, 10u, 150u, 255u}) {
        for (std::uint64_t mult : {1ull, 7ull, 1000ull}) {
            const auto s = simulate_slot_model(n_p * mult, n_p);
            v.require(s.displaced * (n_p + 1) == s.offered() && s.displaced_fraction() == theoretical_drop_rate(n_p),
                      "fraction != 1/(n_p+1) at n_p=" + std::to_string(n_p));
        }
    }
    if (v.ok) v.detail = std::to_string(r.displaced) + "/" + std::to_string(r.offered()) + " == 1/151";
    return v;
}

Check conservation() {
    Check v;
    const CaptureFile cap = synthesize_uniform(150'000, 64, 4096);
    PipelineConfig cfg;
    const auto key = fixed_key();
    cfg.anonymizer = std::make_shared<KeyedAnonymizer>(key);
    cfg.aggregator.n_p = 150;
    const auto r = run_pipeline(cfg, cap);
    v.require(r.summaries_emitted == 1000, "summaries = " + std::to_string(r.summaries_emitted));
    v.require(r.matrix.total() == 150'000, "matrix total = " + std::to_string(r.matrix.total()));

    std::ostringstream got;
    export_matrix(r.matrix, got);

    // Single pass over the trace with the reference decoder.
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t> naive;
    for (const auto& rec : cap.records) {
        const auto ref = hdrx::testing::reference_decode(rec.data);
        if (ref.cls != hdrx::testing::RefClass::extract) continue;
        ++naive[{anonymize(static_cast<std::uint32_t>(ref.fields.at("ip.src")), key),
                 anonymize(static_cast<std::uint32_t>(ref.fields.at("ip.dst")), key)}];
    }
    std::ostringstream want;
    for (const auto& [cell, n] : naive) want << cell.first << '\t' << cell.second << '\t' << n << '\n';
    v.require(got.str() == want.str(), "export differs from naive counter");
    if (v.ok) v.detail = "1000 summaries, total 150000, export byte-identical";
    return v;
}

Check anonymization() {
    Check v;
    const KeyedAnonymizer anon(fixed_key());
    std::mt19937 rng(10'000);
    std::set<std::uint32_t> inputs;
    while (inputs.size() < 10'000) inputs.insert(rng());
    std::set<std::uint32_t> outputs;
    for (auto ip : inputs) {
        const auto a = anon.anonymize(ip);
        v.require(a == anon.anonymize(ip) && a == anonymize(ip, fixed_key()), "non-deterministic output");
        outputs.insert(a);
    }
    const auto collisions = inputs.size() - outputs.size();
    v.require(collisions <= 5, std::to_string(collisions) + " collisions");
    if (v.ok) v.detail = "deterministic; " + std::to_string(collisions) + " collisions over 10000";
    return v;
}

Check capture_round_trip() {
    Check v;
    std::mt19937_64 rng(7);
    CaptureFile cap;
    cap.snaplen = 128;
    while (cap.records.size() < 1000) {
        const auto f = hdrx::testing::fuzz_frame(rng);
        if (f.truncated || f.bytes.empty()) continue;
        const auto outcome = parse(ByteView(f.bytes));
        // Only records whose headers fit within the snap length qualify.
        if (outcome.headers.header_bytes_consumed > cap.snaplen) continue;
        CaptureRecord rec;
        rec.ts_sec = static_cast<std::uint32_t>(1'700'000'000 + cap.records.size());
        rec.ts_frac = static_cast<std::uint32_t>(rng() % 1'000'000);
        rec.orig_len = static_cast<std::uint32_t>(f.bytes.size());
        rec.data.assign(f.bytes.begin(),
                        f.bytes.begin() + std::min<std::size_t>(f.bytes.size(), cap.snaplen));
        cap.records.push_back(std::move(rec));
    }

    for (auto order : {ByteOrder::native, ByteOrder::swapped}) {
        cap.byte_order = order;
        std::stringstream io;
        write_capture(cap, io);
        v.require(read_capture(io) == cap, order == ByteOrder::native ? "native order round trip differs"
                                                                       : "swapped order round trip differs");
    }

    for (const auto& rec : cap.records) {
        v.require(parse(pad_packet(rec)) == parse(ByteView(rec.data)), "pad-then-parse differs");
    }
    if (v.ok) v.detail = "both byte orders identical; 1000 padded parses agree";
    return v;
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Check()>>> criteria = {
        {"bench ladder report", bench_ladder_report},
        {"parser oracle equivalence", parser_oracle},
        {"summary format", summary_format},
        {"drop-rate model", drop_rate},
        {"end-to-end conservation", conservation},
        {"anonymization properties", anonymization},
        {"capture round-trip", capture_round_trip},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Check v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v.ok = false;
            v.detail = std::string("exception: ") + e.what();
        }
        failed += !v.ok;
        std::printf("%s criterion %zu (%s): %s\n", v.ok ? "PASS" : "FAIL", i + 1, criteria[i].first,
                    v.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
