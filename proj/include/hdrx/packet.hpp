#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <optional>
#include <vector>

namespace hdrx {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;
using MacAddress = std::array<std::uint8_t, 6>;

inline constexpr std::uint16_t kEthertypeIpv4 = 0x0800;
inline constexpr std::uint16_t kEthertypeArp = 0x0806;
inline constexpr std::uint16_t kEthertypeVlan = 0x8100;
inline constexpr std::uint8_t kProtoTcp = 6;
inline constexpr std::uint8_t kProtoUdp = 17;

inline constexpr std::size_t kEthernetHeaderLen = 14;
inline constexpr std::size_t kIpv4MinHeaderLen = 20;
inline constexpr std::size_t kTcpMinHeaderLen = 20;
inline constexpr std::size_t kUdpHeaderLen = 8;

enum class DecodeErrc { truncated, malformed, wrong_protocol };

const char* to_string(DecodeErrc errc) noexcept;

class DecodeError : public std::runtime_error {
public:
    DecodeError(DecodeErrc code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    DecodeErrc code() const noexcept { return code_; }

private:
    DecodeErrc code_;
};

// A captured frame. `data` may be shorter than the wire length when the
// capture was snap-length limited.
struct RawPacket {
    Bytes data;
    std::uint64_t timestamp_ns = 0;
    std::uint32_t orig_len = 0;

    RawPacket() = default;
    explicit RawPacket(Bytes bytes, std::uint64_t ts_ns = 0);
    RawPacket(Bytes bytes, std::uint64_t ts_ns, std::uint32_t wire_len);

    ByteView bytes() const noexcept { return data; }
};

struct EthernetHeader {
    MacAddress dst_mac{};
    MacAddress src_mac{};
    std::uint16_t ethertype = 0;

    bool operator==(const EthernetHeader&) const = default;
};

struct Ipv4Header {
    std::uint8_t version = 4;
    std::uint8_t hdr_len = 5;  // IHL, 32-bit words
    std::uint8_t dscp_ecn = 0;
    std::uint16_t total_length = 0;
    std::uint16_t identification = 0;
    std::uint16_t flags_fragment = 0;
    std::uint8_t ttl = 0;
    std::uint8_t protocol = 0;
    std::uint16_t checksum = 0;
    std::uint32_t src_ip = 0;
    std::uint32_t dst_ip = 0;
    Bytes options;  // (hdr_len - 5) * 4 bytes

    std::size_t header_len() const noexcept { return std::size_t{hdr_len} * 4; }
    bool operator==(const Ipv4Header&) const = default;
};

struct TcpHeader {
    std::uint16_t src_port = 0;
    std::uint16_t dst_port = 0;
    std::uint32_t seq = 0;
    std::uint32_t ack = 0;
    std::uint8_t data_offset = 5;  // 32-bit words
    std::uint16_t flags = 0;       // low 12 bits: reserved(3) NS CWR ECE URG ACK PSH RST SYN FIN
    std::uint16_t window = 0;
    std::uint16_t checksum = 0;
    std::uint16_t urgent = 0;
    Bytes options;  // (data_offset - 5) * 4 bytes

    std::size_t header_len() const noexcept { return std::size_t{data_offset} * 4; }
    bool operator==(const TcpHeader&) const = default;
};

struct UdpHeader {
    std::uint16_t src_port = 0;
    std::uint16_t dst_port = 0;
    std::uint16_t length = 0;
    std::uint16_t checksum = 0;

    bool operator==(const UdpHeader&) const = default;
};

struct OtherL4 {
    bool operator==(const OtherL4&) const = default;
};

using L4Header = std::variant<OtherL4, TcpHeader, UdpHeader>;

struct ParsedHeaders {
    EthernetHeader eth;
    std::optional<Ipv4Header> ip;
    L4Header l4;
    std::size_t header_bytes_consumed = 0;

    const TcpHeader* tcp() const noexcept { return std::get_if<TcpHeader>(&l4); }
    const UdpHeader* udp() const noexcept { return std::get_if<UdpHeader>(&l4); }

    bool operator==(const ParsedHeaders&) const = default;
};

template <typename Header>
struct Decoded {
    Header header;
    std::size_t remaining = 0;
};

// Header codecs. Each reads big-endian fields from the front of `data` and
// throws DecodeError on short or malformed input. None reads past the
// header length it reports.
Decoded<EthernetHeader> decode_ethernet(ByteView data);
Decoded<Ipv4Header> decode_ipv4(ByteView data);
Decoded<TcpHeader> decode_tcp(ByteView data);
Decoded<UdpHeader> decode_udp(ByteView data);

void encode_ethernet(const EthernetHeader& h, Bytes& out);
void encode_ipv4(const Ipv4Header& h, Bytes& out);
void encode_tcp(const TcpHeader& h, Bytes& out);
void encode_udp(const UdpHeader& h, Bytes& out);

/// Serializes the header stack back to wire bytes. Throws
/// std::invalid_argument if the headers violate their length invariants
/// (option sizes not matching hdr_len / data_offset, l4 inconsistent with
/// ip.protocol).
Bytes encode_headers(const ParsedHeaders& h);

/// RFC 1071 ones-complement sum over an IPv4 header with its checksum field.
std::uint16_t ipv4_header_checksum(ByteView header);

namespace wire {

inline std::uint16_t load_be16(const std::uint8_t* p) noexcept {
    return static_cast<std::uint16_t>((p[0] << 8) | p[1]);
}

inline std::uint32_t load_be32(const std::uint8_t* p) noexcept {
    return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) |
           (std::uint32_t{p[2]} << 8) | std::uint32_t{p[3]};
}

inline void append_be16(Bytes& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

inline void append_be32(Bytes& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

}  // namespace wire

std::string format_ipv4(std::uint32_t addr);

}  // namespace hdrx
