#include "hdrx/capture.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

namespace hdrx {

namespace {

std::uint32_t bswap32(std::uint32_t v) noexcept {
    return ((v & 0xFF) << 24) | ((v & 0xFF00) << 8) | ((v >> 8) & 0xFF00) | (v >> 24);
}

std::uint16_t bswap16(std::uint16_t v) noexcept {
    return static_cast<std::uint16_t>((v << 8) | (v >> 8));
}

class FieldCodec {
public:
    explicit FieldCodec(ByteOrder order) : swap_(order == ByteOrder::swapped) {}

    std::uint32_t u32(const std::uint8_t* p) const noexcept {
        std::uint32_t v;
        std::memcpy(&v, p, 4);
        return swap_ ? bswap32(v) : v;
    }
    std::uint16_t u16(const std::uint8_t* p) const noexcept {
        std::uint16_t v;
        std::memcpy(&v, p, 2);
        return swap_ ? bswap16(v) : v;
    }
    void put32(std::uint8_t* p, std::uint32_t v) const noexcept {
        if (swap_) v = bswap32(v);
        std::memcpy(p, &v, 4);
    }
    void put16(std::uint8_t* p, std::uint16_t v) const noexcept {
        if (swap_) v = bswap16(v);
        std::memcpy(p, &v, 2);
    }

private:
    bool swap_;
};

}  // namespace

CaptureFile read_capture(std::istream& source) {
    CaptureFile cap;
    std::array<std::uint8_t, kPcapGlobalHeaderLen> gh{};
    source.read(reinterpret_cast<char*>(gh.data()), gh.size());
    if (source.gcount() < 4) {
        throw CaptureError(CaptureError::Kind::bad_magic, 0, 0, "capture: missing magic number");
    }
    std::uint32_t magic;
    std::memcpy(&magic, gh.data(), 4);
    if (magic == kPcapMagicMicros || magic == kPcapMagicNanos) {
        cap.byte_order = ByteOrder::native;
    } else if (bswap32(magic) == kPcapMagicMicros || bswap32(magic) == kPcapMagicNanos) {
        cap.byte_order = ByteOrder::swapped;
        magic = bswap32(magic);
    } else {
        char buf[64];
        std::snprintf(buf, sizeof buf, "capture: bad magic 0x%08x", magic);
        throw CaptureError(CaptureError::Kind::bad_magic, 0, 0, buf);
    }
    if (static_cast<std::size_t>(source.gcount()) < gh.size()) {
        throw CaptureError(CaptureError::Kind::truncated_record,
                           static_cast<std::uint64_t>(source.gcount()), 0,
                           "capture: truncated global header");
    }
    cap.precision = magic == kPcapMagicNanos ? TimestampPrecision::nano : TimestampPrecision::micro;

    const FieldCodec f(cap.byte_order);
    cap.version_major = f.u16(gh.data() + 4);
    cap.version_minor = f.u16(gh.data() + 6);
    cap.thiszone = static_cast<std::int32_t>(f.u32(gh.data() + 8));
    cap.sigfigs = f.u32(gh.data() + 12);
    cap.snaplen = f.u32(gh.data() + 16);
    cap.link_type = f.u32(gh.data() + 20);

    std::uint64_t offset = kPcapGlobalHeaderLen;
    std::array<std::uint8_t, kPcapRecordHeaderLen> rh{};
    for (std::size_t index = 0;; ++index) {
        source.read(reinterpret_cast<char*>(rh.data()), rh.size());
        auto got = static_cast<std::size_t>(source.gcount());
        if (got == 0) break;
        if (got < rh.size()) {
            throw CaptureError(CaptureError::Kind::truncated_record, offset, index,
                               "capture: truncated header of record " + std::to_string(index) +
                                   " at offset " + std::to_string(offset));
        }
        CaptureRecord rec;
        rec.ts_sec = f.u32(rh.data());
        rec.ts_frac = f.u32(rh.data() + 4);
        const std::uint32_t incl_len = f.u32(rh.data() + 8);
        rec.orig_len = f.u32(rh.data() + 12);
        if (incl_len > rec.orig_len || incl_len > std::max<std::uint32_t>(cap.snaplen, 65535)) {
            throw CaptureError(CaptureError::Kind::bad_record, offset, index,
                               "capture: record " + std::to_string(index) + " has incl_len " +
                                   std::to_string(incl_len) + " exceeding orig_len/snaplen");
        }
        rec.data.resize(incl_len);
        source.read(reinterpret_cast<char*>(rec.data.data()), incl_len);
        if (static_cast<std::uint32_t>(source.gcount()) < incl_len) {
            throw CaptureError(CaptureError::Kind::truncated_record, offset, index,
                               "capture: truncated data of record " + std::to_string(index) +
                                   " at offset " + std::to_string(offset));
        }
        offset += kPcapRecordHeaderLen + incl_len;
        cap.records.push_back(std::move(rec));
    }
    return cap;
}

CaptureFile read_capture(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw CaptureError(CaptureError::Kind::io, 0, 0, "cannot open capture " + path.string());
    }
    return read_capture(in);
}

void write_capture(const CaptureFile& cap, std::ostream& sink) {
    const FieldCodec f(cap.byte_order);
    std::array<std::uint8_t, kPcapGlobalHeaderLen> gh{};
    f.put32(gh.data(), cap.precision == TimestampPrecision::nano ? kPcapMagicNanos : kPcapMagicMicros);
    f.put16(gh.data() + 4, cap.version_major);
    f.put16(gh.data() + 6, cap.version_minor);
    f.put32(gh.data() + 8, static_cast<std::uint32_t>(cap.thiszone));
    f.put32(gh.data() + 12, cap.sigfigs);
    f.put32(gh.data() + 16, cap.snaplen);
    f.put32(gh.data() + 20, cap.link_type);
    sink.write(reinterpret_cast<const char*>(gh.data()), gh.size());

    std::array<std::uint8_t, kPcapRecordHeaderLen> rh{};
    for (const auto& rec : cap.records) {
        if (rec.data.size() > rec.orig_len) {
            throw std::invalid_argument("write_capture: record longer than its orig_len");
        }
        f.put32(rh.data(), rec.ts_sec);
        f.put32(rh.data() + 4, rec.ts_frac);
        f.put32(rh.data() + 8, static_cast<std::uint32_t>(rec.data.size()));
        f.put32(rh.data() + 12, rec.orig_len);
        sink.write(reinterpret_cast<const char*>(rh.data()), rh.size());
        sink.write(reinterpret_cast<const char*>(rec.data.data()),
                   static_cast<std::streamsize>(rec.data.size()));
    }
    sink.flush();
    if (!sink) throw CaptureError(CaptureError::Kind::io, 0, 0, "write_capture: write failed");
}

void write_capture(const CaptureFile& cap, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw CaptureError(CaptureError::Kind::io, 0, 0, "cannot create capture " + path.string());
    }
    write_capture(cap, out);
}

RawPacket pad_packet(const CaptureRecord& rec, std::uint64_t timestamp_ns) {
    if (rec.data.size() > rec.orig_len) {
        throw std::invalid_argument("pad_packet: captured length exceeds orig_len");
    }
    Bytes data;
    data.reserve(rec.orig_len);
    data.assign(rec.data.begin(), rec.data.end());
    data.resize(rec.orig_len, 0);
    return RawPacket(std::move(data), timestamp_ns, rec.orig_len);
}

std::vector<RawPacket> prepare_packets(const CaptureFile& cap, bool pad) {
    std::vector<RawPacket> packets;
    packets.reserve(cap.records.size());
    for (const auto& rec : cap.records) {
        const std::uint64_t ts = cap.timestamp_ns(rec);
        if (pad) {
            packets.push_back(pad_packet(rec, ts));
        } else {
            packets.emplace_back(rec.data, ts, rec.orig_len);
        }
    }
    return packets;
}

FlowPair synth_flow_pair(std::size_t index) {
    // 10.0.0.0/8 sources, 198.18.0.0/15 (benchmarking range) destinations.
    const auto i = static_cast<std::uint32_t>(index);
    return FlowPair{0x0A000000u | (i & 0x00FFFFFFu),
                    0xC6120000u | ((i * 40503u) & 0x0001FFFFu)};
}

CaptureFile synthesize_uniform(std::size_t count, std::size_t packet_size, std::size_t flows) {
    if (packet_size < kMinSynthPacketSize || packet_size > kMaxSynthPacketSize) {
        throw std::invalid_argument("synthesize_uniform: packet size " + std::to_string(packet_size) +
                                    " outside [54, 9000]");
    }
    if (flows == 0) throw std::invalid_argument("synthesize_uniform: flows must be >= 1");

    CaptureFile cap;
    cap.snaplen = static_cast<std::uint32_t>(std::max<std::size_t>(65535, packet_size));
    cap.records.reserve(count);

    ParsedHeaders h;
    h.eth.dst_mac = {0x02, 0x00, 0x00, 0x00, 0x00, 0x02};
    h.eth.src_mac = {0x02, 0x00, 0x00, 0x00, 0x00, 0x01};
    h.eth.ethertype = kEthertypeIpv4;
    Ipv4Header ip;
    ip.total_length = static_cast<std::uint16_t>(packet_size - kEthernetHeaderLen);
    ip.ttl = 64;
    ip.protocol = kProtoTcp;
    ip.flags_fragment = 0x4000;  // DF
    TcpHeader tcp;
    tcp.dst_port = 80;
    tcp.flags = 0x010;  // ACK
    tcp.window = 65535;

    for (std::size_t n = 0; n < count; ++n) {
        const FlowPair pair = synth_flow_pair(n % flows);
        ip.identification = static_cast<std::uint16_t>(n);
        ip.src_ip = pair.src_ip;
        ip.dst_ip = pair.dst_ip;
        tcp.src_port = static_cast<std::uint16_t>(1024 + (n % flows) % 60000);
        tcp.seq = static_cast<std::uint32_t>(n * 1460);
        h.ip = ip;
        h.l4 = tcp;
        h.header_bytes_consumed = kMinSynthPacketSize;

        CaptureRecord rec;
        rec.data = encode_headers(h);
        const std::uint16_t csum = ipv4_header_checksum(
            ByteView(rec.data).subspan(kEthernetHeaderLen, kIpv4MinHeaderLen));
        rec.data[kEthernetHeaderLen + 10] = static_cast<std::uint8_t>(csum >> 8);
        rec.data[kEthernetHeaderLen + 11] = static_cast<std::uint8_t>(csum);
        rec.data.resize(packet_size, 0);
        rec.orig_len = static_cast<std::uint32_t>(packet_size);
        rec.ts_sec = static_cast<std::uint32_t>(n / 1'000'000);
        rec.ts_frac = static_cast<std::uint32_t>(n % 1'000'000);
        cap.records.push_back(std::move(rec));
    }
    return cap;
}

}  // namespace hdrx
