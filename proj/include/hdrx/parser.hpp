#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hdrx/packet.hpp"

namespace hdrx {

struct FlowPair {
    std::uint32_t src_ip = 0;
    std::uint32_t dst_ip = 0;

    bool operator==(const FlowPair&) const = default;
    auto operator<=>(const FlowPair&) const = default;
};

enum class Verdict { extracted_pair, accepted_no_pair };

// The last state the parse graph reached. Mirrors the P4 parser states.
enum class ParseState { start, parse_eth, parse_ipv4, parse_tcp, parse_udp, accept };

struct ParseOutcome {
    ParsedHeaders headers;
    Verdict verdict = Verdict::accepted_no_pair;
    std::optional<FlowPair> pair;  // set iff verdict == extracted_pair
    std::optional<DecodeErrc> error;
    ParseState failed_state = ParseState::accept;  // meaningful only when error is set

    bool extracted() const noexcept { return verdict == Verdict::extracted_pair; }
    bool operator==(const ParseOutcome&) const = default;
};

struct ParseStats {
    std::uint64_t total = 0;
    std::uint64_t ipv4 = 0;
    std::uint64_t tcp = 0;
    std::uint64_t udp = 0;
    std::uint64_t other_l4 = 0;
    std::uint64_t non_ip = 0;
    std::uint64_t errored = 0;

    void record(const ParseOutcome& outcome) noexcept;
    ParseStats& operator+=(const ParseStats& rhs) noexcept;
    bool consistent() const noexcept {
        return tcp + udp + other_l4 == ipv4 && ipv4 + non_ip + errored == total;
    }
    bool operator==(const ParseStats&) const = default;
};

/// Runs the fixed parse graph
///
///   start -> parse_eth -> { 0x0800: parse_ipv4 -> { 6: parse_tcp | 17: parse_udp | accept }
///                         | default: accept }
///
/// IPv4 options and TCP options are extracted with the variable widths
/// (IHL - 5) * 4 and (dataOffset - 5) * 4 bytes. Addresses are taken in
/// parse_ipv4, so IPv4 packets with an unknown L4 protocol still yield a
/// pair. Decode errors never escape: they are recorded in the outcome and
/// the verdict becomes accepted_no_pair. Never reads beyond
/// headers.header_bytes_consumed on an accepted packet.
ParseOutcome parse(ByteView frame);
inline ParseOutcome parse(const RawPacket& pkt) { return parse(pkt.bytes()); }

struct ParseStreamResult {
    std::vector<ParseOutcome> outcomes;
    ParseStats stats;
};

ParseStreamResult parse_stream(std::span<const RawPacket> packets);

}  // namespace hdrx
