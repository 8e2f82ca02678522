#pragma once

// Byte-level frame construction and fuzzing for tests. Frames are laid out by
// hand here rather than through encode_headers so they can serve as inputs to
// oracle comparisons.

#include <cstdint>
#include <random>
#include <vector>

namespace hdrx::testing {

struct FrameSpec {
    std::uint8_t dst_mac[6] = {0x00, 0x1b, 0x21, 0x3a, 0x4b, 0x5c};
    std::uint8_t src_mac[6] = {0x00, 0x1b, 0x21, 0x6d, 0x7e, 0x8f};
    std::uint16_t ethertype = 0x0800;
    std::uint8_t version = 4;
    std::uint8_t ihl = 5;
    std::uint8_t tos = 0;
    std::uint16_t ip_id = 0x1234;
    std::uint16_t frag = 0x4000;
    std::uint8_t ttl = 64;
    std::uint8_t protocol = 6;
    std::uint16_t ip_csum = 0xbeef;
    std::uint32_t src_ip = 0xC0A80001;  // 192.168.0.1
    std::uint32_t dst_ip = 0x0A000002;  // 10.0.0.2
    std::vector<std::uint8_t> ip_options;  // sized to (ihl - 5) * 4 if ihl >= 5
    std::uint16_t sport = 443;
    std::uint16_t dport = 51234;
    std::uint32_t seq = 0x01020304;
    std::uint32_t ack = 0x05060708;
    std::uint8_t doff = 5;
    std::uint16_t tcp_flags = 0x018;  // PSH|ACK
    std::uint16_t window = 29200;
    std::uint16_t l4_csum = 0xcafe;
    std::uint16_t urgent = 0;
    std::vector<std::uint8_t> tcp_options;
    std::uint16_t udp_len = 0;  // 0: computed
    std::size_t total_size = 0;  // 0: headers only; otherwise zero payload up to this size
};

inline void put8(std::vector<std::uint8_t>& f, unsigned v) { f.push_back(static_cast<std::uint8_t>(v)); }
inline void put16(std::vector<std::uint8_t>& f, unsigned v) {
    put8(f, (v >> 8) & 0xFF);
    put8(f, v & 0xFF);
}
inline void put32(std::vector<std::uint8_t>& f, std::uint32_t v) {
    put16(f, v >> 16);
    put16(f, v & 0xFFFF);
}

inline std::vector<std::uint8_t> build_frame(const FrameSpec& s) {
    std::vector<std::uint8_t> f;
    for (auto b : s.dst_mac) put8(f, b);
    for (auto b : s.src_mac) put8(f, b);
    put16(f, s.ethertype);
    if (s.ethertype == 0x0800) {
        const std::size_t ip_start = f.size();
        put8(f, (s.version << 4) | (s.ihl & 0x0F));
        put8(f, s.tos);
        put16(f, 0);  // total length, patched below
        put16(f, s.ip_id);
        put16(f, s.frag);
        put8(f, s.ttl);
        put8(f, s.protocol);
        put16(f, s.ip_csum);
        put32(f, s.src_ip);
        put32(f, s.dst_ip);
        for (auto b : s.ip_options) put8(f, b);
        if (s.protocol == 6) {
            put16(f, s.sport);
            put16(f, s.dport);
            put32(f, s.seq);
            put32(f, s.ack);
            put8(f, (s.doff << 4) | ((s.tcp_flags >> 8) & 0x0F));
            put8(f, s.tcp_flags & 0xFF);
            put16(f, s.window);
            put16(f, s.l4_csum);
            put16(f, s.urgent);
            for (auto b : s.tcp_options) put8(f, b);
        } else if (s.protocol == 17) {
            put16(f, s.sport);
            put16(f, s.dport);
            const std::size_t udp_len =
                s.udp_len ? s.udp_len : (s.total_size > f.size() + 4 ? s.total_size - (f.size() - 4) : 8);
            put16(f, static_cast<unsigned>(udp_len));
            put16(f, s.l4_csum);
        }
        if (s.total_size > f.size()) f.resize(s.total_size, 0);
        const std::size_t ip_total = f.size() - ip_start;
        f[ip_start + 2] = static_cast<std::uint8_t>(ip_total >> 8);
        f[ip_start + 3] = static_cast<std::uint8_t>(ip_total);
    } else if (s.total_size > f.size()) {
        f.resize(s.total_size, 0);
    }
    return f;
}

inline std::vector<std::uint8_t> random_bytes(std::mt19937_64& rng, std::size_t n) {
    std::vector<std::uint8_t> v(n);
    for (auto& b : v) b = static_cast<std::uint8_t>(rng());
    return v;
}

enum class FuzzKind {
    tcp, tcp_options, udp, other_l4, non_ip, bad_version, short_ihl, short_doff, random_bytes
};

struct FuzzedFrame {
    std::vector<std::uint8_t> bytes;
    FuzzKind kind;
    bool truncated;  // cut at a random length after construction
};

// Mix of valid frames (with and without IPv4/TCP options), malformed headers,
// non-IPv4 ethertypes, pure noise, and random truncations of all of them.
inline FuzzedFrame fuzz_frame(std::mt19937_64& rng) {
    auto pick = [&](std::uint64_t n) { return rng() % n; };
    FrameSpec s;
    for (auto& b : s.dst_mac) b = static_cast<std::uint8_t>(rng());
    for (auto& b : s.src_mac) b = static_cast<std::uint8_t>(rng());
    s.src_ip = static_cast<std::uint32_t>(rng());
    s.dst_ip = static_cast<std::uint32_t>(rng());
    s.ip_id = static_cast<std::uint16_t>(rng());
    s.tos = static_cast<std::uint8_t>(rng());
    s.ttl = static_cast<std::uint8_t>(rng());
    s.ip_csum = static_cast<std::uint16_t>(rng());
    s.frag = static_cast<std::uint16_t>(rng());
    s.sport = static_cast<std::uint16_t>(rng());
    s.dport = static_cast<std::uint16_t>(rng());
    s.seq = static_cast<std::uint32_t>(rng());
    s.ack = static_cast<std::uint32_t>(rng());
    s.tcp_flags = static_cast<std::uint16_t>(rng() & 0x0FFF);
    s.window = static_cast<std::uint16_t>(rng());
    s.l4_csum = static_cast<std::uint16_t>(rng());
    s.urgent = static_cast<std::uint16_t>(rng());
    s.ihl = static_cast<std::uint8_t>(5 + pick(11));
    s.ip_options = random_bytes(rng, (s.ihl - 5) * 4u);
    s.doff = 5;

    const auto kind = static_cast<FuzzKind>(pick(9));
    switch (kind) {
        case FuzzKind::tcp:
            s.ihl = 5;
            s.ip_options.clear();
            break;
        case FuzzKind::tcp_options:
            s.doff = static_cast<std::uint8_t>(5 + pick(11));
            s.tcp_options = random_bytes(rng, (s.doff - 5) * 4u);
            break;
        case FuzzKind::udp:
            s.protocol = 17;
            break;
        case FuzzKind::other_l4: {
            static constexpr std::uint8_t protos[] = {1, 2, 47, 50, 89, 132, 255, 0};
            s.protocol = protos[pick(std::size(protos))];
            break;
        }
        case FuzzKind::non_ip: {
            static constexpr std::uint16_t types[] = {0x0806, 0x86DD, 0x8100, 0x88CC, 0x88B5, 0x0801};
            s.ethertype = pick(4) == 0 ? static_cast<std::uint16_t>(rng()) : types[pick(std::size(types))];
            if (s.ethertype == 0x0800) s.ethertype = 0x0806;
            break;
        }
        case FuzzKind::bad_version:
            do {
                s.version = static_cast<std::uint8_t>(pick(16));
            } while (s.version == 4);
            break;
        case FuzzKind::short_ihl:
            s.ihl = static_cast<std::uint8_t>(pick(5));
            s.ip_options.clear();
            break;
        case FuzzKind::short_doff:
            s.doff = static_cast<std::uint8_t>(pick(5));
            break;
        case FuzzKind::random_bytes: {
            FuzzedFrame f{random_bytes(rng, pick(120)), kind, false};
            return f;
        }
    }
    s.total_size = pick(3) == 0 ? 0 : 60 + pick(1500);
    FuzzedFrame f{build_frame(s), kind, false};
    if (pick(3) == 0 && !f.bytes.empty()) {
        f.bytes.resize(pick(f.bytes.size()));
        f.truncated = true;
    }
    return f;
}

}  // namespace hdrx::testing
