#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hdrx/replay.hpp"

namespace hdrx {

struct Rates {
    double mbps = 0.0;
    double pps = 0.0;
};

/// pps = packets / duration, mbps = bytes * 8 / duration / 1e6. Byte counts
/// are frame bytes only (no preamble, SFD or inter-frame gap). Throws
/// std::invalid_argument for a non-positive duration.
Rates compute_rates(std::uint64_t packets, std::uint64_t bytes, double duration_s);

struct RateRow {
    double packet_size = 0.0;  // bytes; mean frame size for mixed traffic
    double mbps = 0.0;
    double pps = 0.0;

    bool operator==(const RateRow&) const = default;
};

struct RateReport {
    std::vector<RateRow> rows;
    double duration_s = 0.0;
    ReplayMode mode = ReplayMode::in_process;

    /// Every row satisfies mbps == pps * size * 8 / 1e6 within `rel_tol`.
    bool consistent(double rel_tol = 1e-3) const;
};

inline constexpr const char* kReportAccounting =
    "frame bytes only; no preamble/SFD/inter-frame gap";

/// TSV: '#'-prefixed metadata lines, then the header row
/// "size_bytes\tmbps\tpps", then one row per packet size.
void write_report_tsv(const RateReport& report, std::ostream& out);
RateReport read_report_tsv(std::istream& in);

/// Human-readable table in the layout
/// "Packet Size (Byte) | Data Rate (Mbps) | Packet Rate (pps)" with
/// thousands separators.
std::string format_rate_table(const RateReport& report);
std::string format_thousands(double value);

}  // namespace hdrx
