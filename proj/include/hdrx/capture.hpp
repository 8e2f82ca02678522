#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "hdrx/packet.hpp"
#include "hdrx/parser.hpp"

namespace hdrx {

inline constexpr std::uint32_t kPcapMagicMicros = 0xa1b2c3d4;
inline constexpr std::uint32_t kPcapMagicNanos = 0xa1b23c4d;
inline constexpr std::uint32_t kLinkTypeEthernet = 1;
inline constexpr std::size_t kPcapGlobalHeaderLen = 24;
inline constexpr std::size_t kPcapRecordHeaderLen = 16;

enum class ByteOrder { native, swapped };
enum class TimestampPrecision { micro, nano };

struct CaptureRecord {
    std::uint32_t ts_sec = 0;
    std::uint32_t ts_frac = 0;  // micro- or nanoseconds, per file precision
    std::uint32_t orig_len = 0;
    Bytes data;  // incl_len == data.size()

    bool operator==(const CaptureRecord&) const = default;
};

struct CaptureFile {
    ByteOrder byte_order = ByteOrder::native;
    TimestampPrecision precision = TimestampPrecision::micro;
    std::uint16_t version_major = 2;
    std::uint16_t version_minor = 4;
    std::int32_t thiszone = 0;
    std::uint32_t sigfigs = 0;
    std::uint32_t snaplen = 65535;
    std::uint32_t link_type = kLinkTypeEthernet;
    std::vector<CaptureRecord> records;

    std::uint64_t timestamp_ns(const CaptureRecord& r) const noexcept {
        std::uint64_t frac = precision == TimestampPrecision::nano ? r.ts_frac
                                                                   : std::uint64_t{r.ts_frac} * 1000;
        return std::uint64_t{r.ts_sec} * 1'000'000'000ull + frac;
    }

    bool operator==(const CaptureFile&) const = default;
};

class CaptureError : public std::runtime_error {
public:
    enum class Kind { bad_magic, truncated_record, bad_record, io };

    CaptureError(Kind kind, std::uint64_t offset, std::size_t record_index, const std::string& what)
        : std::runtime_error(what), kind_(kind), offset_(offset), record_index_(record_index) {}

    Kind kind() const noexcept { return kind_; }
    /// Byte offset in the stream where the problem was detected.
    std::uint64_t offset() const noexcept { return offset_; }
    std::size_t record_index() const noexcept { return record_index_; }

private:
    Kind kind_;
    std::uint64_t offset_;
    std::size_t record_index_;
};

/// Classic libpcap format, either byte order, micro- or nanosecond magic.
CaptureFile read_capture(std::istream& source);
CaptureFile read_capture(const std::filesystem::path& path);

void write_capture(const CaptureFile& cap, std::ostream& sink);
void write_capture(const CaptureFile& cap, const std::filesystem::path& path);

/// Restores wire length by appending orig_len - incl_len zero bytes.
RawPacket pad_packet(const CaptureRecord& rec, std::uint64_t timestamp_ns = 0);

/// Converts every record, padding when `pad` is set. Done once up front so
/// replay loops reuse the same buffers.
std::vector<RawPacket> prepare_packets(const CaptureFile& cap, bool pad);

inline constexpr std::size_t kMinSynthPacketSize = 54;  // 14 + 20 + 20
inline constexpr std::size_t kMaxSynthPacketSize = 9000;

/// `count` TCP/IPv4 frames of exactly `packet_size` bytes whose (src, dst)
/// pairs cycle round-robin through `flows` distinct pairs. Throws
/// std::invalid_argument for sizes outside [54, 9000] or flows == 0.
CaptureFile synthesize_uniform(std::size_t count, std::size_t packet_size, std::size_t flows);

/// The (src, dst) pair synthesize_uniform assigns to flow `index`.
FlowPair synth_flow_pair(std::size_t index);

}  // namespace hdrx
