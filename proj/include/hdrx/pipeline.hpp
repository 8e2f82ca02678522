#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <stdexcept>
#include <vector>

#include "hdrx/aggregator.hpp"
#include "hdrx/anonymizer.hpp"
#include "hdrx/capture.hpp"
#include "hdrx/parser.hpp"
#include "hdrx/rates.hpp"
#include "hdrx/replay.hpp"
#include "hdrx/traffic_matrix.hpp"

namespace hdrx {

class PipelineError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PipelineConfig {
    AggregatorConfig aggregator;
    std::shared_ptr<const Anonymizer> anonymizer;
    ReplayConfig replay;
    std::filesystem::path matrix_out;     // empty: not written
    std::filesystem::path report_out;     // empty: not written
    std::filesystem::path summaries_out;  // empty: not written; otherwise a capture of summary frames
    unsigned parser_workers = 1;
    std::size_t batch_size = 256;
    std::size_t queue_depth = 64;

    void validate() const;
};

struct PipelineResult {
    ParseStats stats;
    std::uint64_t bytes_parsed = 0;
    std::uint64_t pairs_aggregated = 0;
    std::uint64_t summaries_emitted = 0;
    TrafficMatrix matrix;
    RateReport report;
    ReplayStats replay;
};

/// generator -> parser worker(s) -> aggregator -> collector, connected by
/// bounded queues. The clock runs from the first packet entering a parser
/// worker until the collector has drained. Throws PipelineError if the
/// pair count is not conserved end to end; any output files are written
/// only after that check and removed again if a later write fails.
PipelineResult run_pipeline(const PipelineConfig& cfg, const CaptureFile& input);

inline const std::vector<std::size_t> kDefaultLadder = {64, 128, 256, 512, 1024, 1518};

/// One row per size (ascending), each measured over `count_per_size`
/// synthesized packets pushed through run_pipeline. Writes cfg.report_out
/// if set; matrix and summary outputs are not written.
RateReport bench_ladder(std::vector<std::size_t> sizes, std::uint64_t count_per_size,
                        const PipelineConfig& cfg, std::size_t flows = 1024);

/// Writes `content` through a temporary sibling file renamed into place.
void write_file_atomically(const std::filesystem::path& path,
                           const std::function<void(std::ostream&)>& content);

}  // namespace hdrx
