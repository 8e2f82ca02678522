#include "hdrx/packet.hpp"

#include <algorithm>
#include <cstdio>

namespace hdrx {

using wire::append_be16;
using wire::append_be32;
using wire::load_be16;
using wire::load_be32;

const char* to_string(DecodeErrc errc) noexcept {
    switch (errc) {
        case DecodeErrc::truncated: return "truncated";
        case DecodeErrc::malformed: return "malformed";
        case DecodeErrc::wrong_protocol: return "wrong protocol";
    }
    return "unknown";
}

RawPacket::RawPacket(Bytes bytes, std::uint64_t ts_ns)
    : data(std::move(bytes)), timestamp_ns(ts_ns),
      orig_len(static_cast<std::uint32_t>(data.size())) {}

RawPacket::RawPacket(Bytes bytes, std::uint64_t ts_ns, std::uint32_t wire_len)
    : data(std::move(bytes)), timestamp_ns(ts_ns), orig_len(wire_len) {
    if (orig_len < data.size()) {
        throw std::invalid_argument("RawPacket: orig_len smaller than captured length");
    }
}

namespace {

[[noreturn]] void fail(DecodeErrc code, const char* layer, std::size_t need, std::size_t have) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%s: %s (need %zu bytes, have %zu)", layer,
                  to_string(code), need, have);
    throw DecodeError(code, buf);
}

}  // namespace

Decoded<EthernetHeader> decode_ethernet(ByteView data) {
    if (data.size() < kEthernetHeaderLen) {
        fail(DecodeErrc::truncated, "ethernet", kEthernetHeaderLen, data.size());
    }
    Decoded<EthernetHeader> out;
    std::copy_n(data.data(), 6, out.header.dst_mac.begin());
    std::copy_n(data.data() + 6, 6, out.header.src_mac.begin());
    out.header.ethertype = load_be16(data.data() + 12);
    out.remaining = data.size() - kEthernetHeaderLen;
    return out;
}

Decoded<Ipv4Header> decode_ipv4(ByteView data) {
    if (data.size() < kIpv4MinHeaderLen) {
        fail(DecodeErrc::truncated, "ipv4", kIpv4MinHeaderLen, data.size());
    }
    const std::uint8_t* p = data.data();
    Decoded<Ipv4Header> out;
    Ipv4Header& h = out.header;
    h.version = p[0] >> 4;
    h.hdr_len = p[0] & 0x0F;
    if (h.version != 4) {
        throw DecodeError(DecodeErrc::malformed,
                          "ipv4: malformed (version " + std::to_string(h.version) + ")");
    }
    if (h.hdr_len < 5) {
        throw DecodeError(DecodeErrc::malformed,
                          "ipv4: malformed (IHL " + std::to_string(h.hdr_len) + " < 5)");
    }
    const std::size_t len = h.header_len();
    if (data.size() < len) {
        fail(DecodeErrc::truncated, "ipv4", len, data.size());
    }
    h.dscp_ecn = p[1];
    h.total_length = load_be16(p + 2);
    h.identification = load_be16(p + 4);
    h.flags_fragment = load_be16(p + 6);
    h.ttl = p[8];
    h.protocol = p[9];
    h.checksum = load_be16(p + 10);
    h.src_ip = load_be32(p + 12);
    h.dst_ip = load_be32(p + 16);
    h.options.assign(p + kIpv4MinHeaderLen, p + len);
    out.remaining = data.size() - len;
    return out;
}

Decoded<TcpHeader> decode_tcp(ByteView data) {
    if (data.size() < kTcpMinHeaderLen) {
        fail(DecodeErrc::truncated, "tcp", kTcpMinHeaderLen, data.size());
    }
    const std::uint8_t* p = data.data();
    Decoded<TcpHeader> out;
    TcpHeader& h = out.header;
    h.data_offset = p[12] >> 4;
    if (h.data_offset < 5) {
        throw DecodeError(DecodeErrc::malformed, "tcp: malformed (data offset " +
                                                     std::to_string(h.data_offset) + " < 5)");
    }
    const std::size_t len = h.header_len();
    if (data.size() < len) {
        fail(DecodeErrc::truncated, "tcp", len, data.size());
    }
    h.src_port = load_be16(p);
    h.dst_port = load_be16(p + 2);
    h.seq = load_be32(p + 4);
    h.ack = load_be32(p + 8);
    h.flags = static_cast<std::uint16_t>(((p[12] & 0x0F) << 8) | p[13]);
    h.window = load_be16(p + 14);
    h.checksum = load_be16(p + 16);
    h.urgent = load_be16(p + 18);
    h.options.assign(p + kTcpMinHeaderLen, p + len);
    out.remaining = data.size() - len;
    return out;
}

Decoded<UdpHeader> decode_udp(ByteView data) {
    if (data.size() < kUdpHeaderLen) {
        fail(DecodeErrc::truncated, "udp", kUdpHeaderLen, data.size());
    }
    const std::uint8_t* p = data.data();
    Decoded<UdpHeader> out;
    out.header.src_port = load_be16(p);
    out.header.dst_port = load_be16(p + 2);
    out.header.length = load_be16(p + 4);
    out.header.checksum = load_be16(p + 6);
    out.remaining = data.size() - kUdpHeaderLen;
    return out;
}

void encode_ethernet(const EthernetHeader& h, Bytes& out) {
    out.insert(out.end(), h.dst_mac.begin(), h.dst_mac.end());
    out.insert(out.end(), h.src_mac.begin(), h.src_mac.end());
    append_be16(out, h.ethertype);
}

void encode_ipv4(const Ipv4Header& h, Bytes& out) {
    if (h.version > 0x0F || h.hdr_len < 5 || h.hdr_len > 15 ||
        h.options.size() != (std::size_t{h.hdr_len} - 5) * 4) {
        throw std::invalid_argument("encode_ipv4: IHL and options length disagree");
    }
    out.push_back(static_cast<std::uint8_t>((h.version << 4) | h.hdr_len));
    out.push_back(h.dscp_ecn);
    append_be16(out, h.total_length);
    append_be16(out, h.identification);
    append_be16(out, h.flags_fragment);
    out.push_back(h.ttl);
    out.push_back(h.protocol);
    append_be16(out, h.checksum);
    append_be32(out, h.src_ip);
    append_be32(out, h.dst_ip);
    out.insert(out.end(), h.options.begin(), h.options.end());
}

void encode_tcp(const TcpHeader& h, Bytes& out) {
    if (h.data_offset < 5 || h.data_offset > 15 || h.flags > 0x0FFF ||
        h.options.size() != (std::size_t{h.data_offset} - 5) * 4) {
        throw std::invalid_argument("encode_tcp: data offset and options length disagree");
    }
    append_be16(out, h.src_port);
    append_be16(out, h.dst_port);
    append_be32(out, h.seq);
    append_be32(out, h.ack);
    out.push_back(static_cast<std::uint8_t>((h.data_offset << 4) | (h.flags >> 8)));
    out.push_back(static_cast<std::uint8_t>(h.flags));
    append_be16(out, h.window);
    append_be16(out, h.checksum);
    append_be16(out, h.urgent);
    out.insert(out.end(), h.options.begin(), h.options.end());
}

void encode_udp(const UdpHeader& h, Bytes& out) {
    append_be16(out, h.src_port);
    append_be16(out, h.dst_port);
    append_be16(out, h.length);
    append_be16(out, h.checksum);
}

Bytes encode_headers(const ParsedHeaders& h) {
    Bytes out;
    out.reserve(h.header_bytes_consumed);
    encode_ethernet(h.eth, out);
    if (h.ip) {
        if (h.eth.ethertype != kEthertypeIpv4) {
            throw std::invalid_argument("encode_headers: IPv4 header under non-IPv4 ethertype");
        }
        encode_ipv4(*h.ip, out);
        if (const auto* tcp = h.tcp()) {
            if (h.ip->protocol != kProtoTcp) {
                throw std::invalid_argument("encode_headers: TCP header but protocol != 6");
            }
            encode_tcp(*tcp, out);
        } else if (const auto* udp = h.udp()) {
            if (h.ip->protocol != kProtoUdp) {
                throw std::invalid_argument("encode_headers: UDP header but protocol != 17");
            }
            encode_udp(*udp, out);
        }
    } else if (!std::holds_alternative<OtherL4>(h.l4)) {
        throw std::invalid_argument("encode_headers: L4 header without IPv4");
    }
    return out;
}

std::uint16_t ipv4_header_checksum(ByteView header) {
    std::uint32_t sum = 0;
    for (std::size_t i = 0; i + 1 < header.size(); i += 2) {
        if (i == 10) continue;  // checksum field itself
        sum += load_be16(header.data() + i);
    }
    while (sum >> 16) sum = (sum & 0xFFFF) + (sum >> 16);
    return static_cast<std::uint16_t>(~sum);
}

std::string format_ipv4(std::uint32_t addr) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%u.%u.%u.%u", addr >> 24, (addr >> 16) & 0xFF,
                  (addr >> 8) & 0xFF, addr & 0xFF);
    return buf;
}

}  // namespace hdrx
