#include "hdrx/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <mutex>
#include <thread>

#include "hdrx/bounded_queue.hpp"

namespace hdrx {

void PipelineConfig::validate() const {
    aggregator.validate();
    replay.validate();
    if (!anonymizer) throw std::invalid_argument("pipeline: no anonymizer configured");
    if (parser_workers < 1) throw std::invalid_argument("pipeline: parser_workers must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("pipeline: batch_size must be >= 1");
}

void write_file_atomically(const std::filesystem::path& path,
                           const std::function<void(std::ostream&)>& content) {
    auto tmp = path;
    tmp += ".partial";
    try {
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw std::runtime_error("cannot create " + tmp.string());
            content(out);
            out.close();
            if (!out) throw std::runtime_error("write failed: " + tmp.string());
        }
        std::filesystem::rename(tmp, path);
    } catch (...) {
        std::error_code ec;
        std::filesystem::remove(tmp, ec);
        throw;
    }
}

namespace {

using Clock = std::chrono::steady_clock;

struct PacketBatch {
    std::vector<const RawPacket*> refs;  // in-process: points into the prepared trace
    std::vector<RawPacket> owned;        // socket: received frames
};

struct PairBatch {
    std::vector<FlowPair> pairs;
    ParseStats stats;
    std::uint64_t bytes = 0;
};

// First exception wins; every queue is closed so all stages unwind.
class FailureLatch {
public:
    template <typename... Queues>
    void fail(std::exception_ptr e, Queues&... queues) {
        {
            std::lock_guard lk(mu_);
            if (!error_) error_ = e;
        }
        (queues.close(), ...);
    }
    void rethrow_if_failed() const {
        if (error_) std::rethrow_exception(error_);
    }

private:
    std::mutex mu_;
    std::exception_ptr error_;
};

std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return a / b + (a % b != 0); }

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& cfg, const CaptureFile& input) {
    cfg.validate();

    // Trace preparation is excluded from the measurement.
    const std::vector<RawPacket> packets = prepare_packets(input, cfg.replay.pad);

    BoundedQueue<PacketBatch> packet_q(cfg.queue_depth);
    BoundedQueue<PairBatch> pair_q(cfg.queue_depth);
    BoundedQueue<std::vector<Bytes>> summary_q(cfg.queue_depth);
    FailureLatch latch;
    auto fail = [&](std::exception_ptr e) { latch.fail(e, packet_q, pair_q, summary_q); };

    PipelineResult result;
    std::atomic<bool> clock_started{false};
    Clock::time_point started_at{};
    std::once_flag start_once;
    auto mark_start = [&] {
        std::call_once(start_once, [&] {
            started_at = Clock::now();
            clock_started.store(true, std::memory_order_release);
        });
    };

    // Generator side.
    std::atomic<bool> sender_done{false};
    std::unique_ptr<DatagramReceiver> receiver;
    ReplayConfig replay_cfg = cfg.replay;
    if (cfg.replay.mode == ReplayMode::datagram_socket) {
        receiver = std::make_unique<DatagramReceiver>(cfg.replay.address, cfg.replay.port);
        replay_cfg.port = receiver->port();
    }

    std::vector<std::thread> threads;
    threads.emplace_back([&] {
        try {
            if (replay_cfg.mode == ReplayMode::in_process) {
                PacketBatch batch;
                batch.refs.reserve(cfg.batch_size);
                result.replay = replay(std::span<const RawPacket>(packets), replay_cfg,
                                       [&](const RawPacket& pkt) {
                                           batch.refs.push_back(&pkt);
                                           if (batch.refs.size() == cfg.batch_size) {
                                               packet_q.push(std::move(batch));
                                               batch = PacketBatch{};
                                               batch.refs.reserve(cfg.batch_size);
                                           }
                                       });
                if (!batch.refs.empty()) packet_q.push(std::move(batch));
                packet_q.close();
            } else {
                result.replay = replay(std::span<const RawPacket>(packets), replay_cfg, {});
                sender_done.store(true, std::memory_order_release);
                send_end_of_stream(replay_cfg.address, replay_cfg.port);
            }
        } catch (...) {
            sender_done.store(true, std::memory_order_release);
            fail(std::current_exception());
        }
    });

    if (receiver) {
        threads.emplace_back([&] {
            try {
                PacketBatch batch;
                receiver->receive(
                    [&](RawPacket&& pkt) {
                        batch.owned.push_back(std::move(pkt));
                        if (batch.owned.size() == cfg.batch_size) {
                            packet_q.push(std::move(batch));
                            batch = PacketBatch{};
                        }
                    },
                    sender_done);
                if (!batch.owned.empty()) packet_q.push(std::move(batch));
                packet_q.close();
            } catch (...) {
                fail(std::current_exception());
            }
        });
    }

    // Parser workers.
    std::atomic<unsigned> workers_left{cfg.parser_workers};
    for (unsigned w = 0; w < cfg.parser_workers; ++w) {
        threads.emplace_back([&] {
            try {
                while (auto batch = packet_q.pop()) {
                    mark_start();
                    PairBatch out;
                    out.pairs.reserve(batch->refs.size() + batch->owned.size());
                    auto handle = [&](const RawPacket& pkt) {
                        ParseOutcome outcome = parse(pkt);
                        out.stats.record(outcome);
                        out.bytes += pkt.data.size();
                        if (outcome.pair) out.pairs.push_back(*outcome.pair);
                    };
                    for (const RawPacket* p : batch->refs) handle(*p);
                    for (const RawPacket& p : batch->owned) handle(p);
                    pair_q.push(std::move(out));
                }
            } catch (...) {
                fail(std::current_exception());
            }
            if (workers_left.fetch_sub(1) == 1) pair_q.close();
        });
    }

    // Aggregator: single owner of the pending buffer.
    threads.emplace_back([&] {
        try {
            Aggregator agg(cfg.aggregator);
            std::vector<Bytes> encoded;
            auto emit = [&](const SummaryPacket& s) {
                encoded.push_back(encode_summary(s));
                if (encoded.size() == 16) {
                    summary_q.push(std::move(encoded));
                    encoded.clear();
                }
            };
            while (auto batch = pair_q.pop()) {
                result.stats += batch->stats;
                result.bytes_parsed += batch->bytes;
                for (const FlowPair& p : batch->pairs) {
                    ++result.pairs_aggregated;
                    if (auto s = agg.push(p)) emit(*s);
                }
            }
            if (auto s = agg.flush()) emit(*s);
            if (!encoded.empty()) summary_q.push(std::move(encoded));
            result.summaries_emitted = agg.emitted();
        } catch (...) {
            fail(std::current_exception());
        }
        summary_q.close();
    });

    // Collector: host side, consumes summaries off the wire format.
    std::vector<Bytes> kept_summaries;
    const bool keep_summaries = !cfg.summaries_out.empty();
    Clock::time_point finished_at{};
    threads.emplace_back([&] {
        try {
            while (auto batch = summary_q.pop()) {
                for (const Bytes& frame : *batch) {
                    const SummaryPacket s = decode_summary(frame, cfg.aggregator.summary_ethertype);
                    result.matrix.ingest_summary(s, *cfg.anonymizer);
                }
                if (keep_summaries) {
                    for (auto& frame : *batch) kept_summaries.push_back(std::move(frame));
                }
            }
            finished_at = Clock::now();
        } catch (...) {
            fail(std::current_exception());
        }
    });

    for (auto& t : threads) t.join();
    latch.rethrow_if_failed();

    // Conservation: every extracted pair reaches the matrix exactly once.
    const auto& st = result.stats;
    if (!st.consistent() || result.pairs_aggregated != st.ipv4 || result.matrix.total() != st.ipv4 ||
        result.summaries_emitted != ceil_div(st.ipv4, cfg.aggregator.n_p)) {
        throw PipelineError("pipeline conservation violated: ipv4=" + std::to_string(st.ipv4) +
                            " pairs=" + std::to_string(result.pairs_aggregated) +
                            " matrix_total=" + std::to_string(result.matrix.total()) +
                            " summaries=" + std::to_string(result.summaries_emitted));
    }

    result.report.mode = cfg.replay.mode;
    if (clock_started.load(std::memory_order_acquire)) {
        const double secs = std::chrono::duration<double>(finished_at - started_at).count();
        result.report.duration_s = secs;
        if (st.total > 0 && secs > 0.0) {
            const Rates r = compute_rates(st.total, result.bytes_parsed, secs);
            result.report.rows.push_back(
                RateRow{static_cast<double>(result.bytes_parsed) / static_cast<double>(st.total),
                        r.mbps, r.pps});
        }
    }

    std::vector<std::filesystem::path> written;
    try {
        if (!cfg.matrix_out.empty()) {
            write_file_atomically(cfg.matrix_out,
                                  [&](std::ostream& out) { export_matrix(result.matrix, out); });
            written.push_back(cfg.matrix_out);
        }
        if (!cfg.report_out.empty()) {
            write_file_atomically(cfg.report_out,
                                  [&](std::ostream& out) { write_report_tsv(result.report, out); });
            written.push_back(cfg.report_out);
        }
        if (keep_summaries) {
            CaptureFile cap;
            cap.records.reserve(kept_summaries.size());
            for (auto& frame : kept_summaries) {
                CaptureRecord rec;
                rec.orig_len = static_cast<std::uint32_t>(frame.size());
                rec.data = std::move(frame);
                cap.records.push_back(std::move(rec));
            }
            write_file_atomically(cfg.summaries_out,
                                  [&](std::ostream& out) { write_capture(cap, out); });
            written.push_back(cfg.summaries_out);
        }
    } catch (...) {
        std::error_code ec;
        for (const auto& p : written) std::filesystem::remove(p, ec);
        throw;
    }
    return result;
}

namespace {

// Largest divisor of `count` not above `cap`, so a short synthesized trace
// looped count/chunk times yields exactly `count` packets.
std::uint64_t loop_chunk(std::uint64_t count, std::uint64_t cap) {
    for (std::uint64_t d = std::min(count, cap); d > 1; --d) {
        if (count % d == 0) return d;
    }
    return 1;
}

}  // namespace

RateReport bench_ladder(std::vector<std::size_t> sizes, std::uint64_t count_per_size,
                        const PipelineConfig& cfg, std::size_t flows) {
    if (sizes.empty()) throw std::invalid_argument("bench_ladder: no packet sizes");
    if (count_per_size == 0) throw std::invalid_argument("bench_ladder: count must be >= 1");
    for (auto s : sizes) {
        if (s < kMinSynthPacketSize) {
            throw std::invalid_argument("bench_ladder: packet size " + std::to_string(s) + " < 54");
        }
    }
    std::sort(sizes.begin(), sizes.end());

    RateReport report;
    report.mode = cfg.replay.mode;
    for (auto size : sizes) {
        const std::uint64_t chunk = loop_chunk(count_per_size, 16384);
        const CaptureFile trace = synthesize_uniform(chunk, size, flows);

        PipelineConfig run_cfg = cfg;
        run_cfg.replay.loop_count = static_cast<std::uint32_t>(count_per_size / chunk);
        run_cfg.matrix_out.clear();
        run_cfg.report_out.clear();
        run_cfg.summaries_out.clear();

        PipelineResult r = run_pipeline(run_cfg, trace);
        if (r.report.rows.size() != 1) {
            throw PipelineError("bench_ladder: no measurement for size " + std::to_string(size));
        }
        report.rows.push_back(r.report.rows.front());
        report.duration_s += r.report.duration_s;
    }

    if (!cfg.report_out.empty()) {
        write_file_atomically(cfg.report_out, [&](std::ostream& out) { write_report_tsv(report, out); });
    }
    return report;
}

}  // namespace hdrx
