#include "hdrx/parser.hpp"

namespace hdrx {

ParseOutcome parse(ByteView frame) {
    ParseOutcome out;
    ParsedHeaders& h = out.headers;
    ParseState state = ParseState::start;
    std::size_t offset = 0;

    try {
        state = ParseState::parse_eth;
        auto eth = decode_ethernet(frame);
        h.eth = eth.header;
        offset = kEthernetHeaderLen;
        if (h.eth.ethertype != kEthertypeIpv4) {
            h.header_bytes_consumed = offset;
            return out;
        }

        state = ParseState::parse_ipv4;
        auto ip = decode_ipv4(frame.subspan(offset));
        offset += ip.header.header_len();
        h.ip = std::move(ip.header);

        switch (h.ip->protocol) {
            case kProtoTcp: {
                state = ParseState::parse_tcp;
                auto tcp = decode_tcp(frame.subspan(offset));
                offset += tcp.header.header_len();
                h.l4 = std::move(tcp.header);
                break;
            }
            case kProtoUdp: {
                state = ParseState::parse_udp;
                auto udp = decode_udp(frame.subspan(offset));
                offset += kUdpHeaderLen;
                h.l4 = udp.header;
                break;
            }
            default:
                break;
        }
    } catch (const DecodeError& e) {
        out.error = e.code();
        out.failed_state = state;
        h.header_bytes_consumed = offset;
        return out;
    }

    h.header_bytes_consumed = offset;
    out.verdict = Verdict::extracted_pair;
    out.pair = FlowPair{h.ip->src_ip, h.ip->dst_ip};
    return out;
}

void ParseStats::record(const ParseOutcome& outcome) noexcept {
    ++total;
    if (outcome.error) {
        ++errored;
    } else if (!outcome.headers.ip) {
        ++non_ip;
    } else {
        ++ipv4;
        if (outcome.headers.tcp()) {
            ++tcp;
        } else if (outcome.headers.udp()) {
            ++udp;
        } else {
            ++other_l4;
        }
    }
}

ParseStats& ParseStats::operator+=(const ParseStats& rhs) noexcept {
    total += rhs.total;
    ipv4 += rhs.ipv4;
    tcp += rhs.tcp;
    udp += rhs.udp;
    other_l4 += rhs.other_l4;
    non_ip += rhs.non_ip;
    errored += rhs.errored;
    return *this;
}

ParseStreamResult parse_stream(std::span<const RawPacket> packets) {
    ParseStreamResult result;
    result.outcomes.reserve(packets.size());
    for (const auto& pkt : packets) {
        result.outcomes.push_back(parse(pkt));
        result.stats.record(result.outcomes.back());
    }
    return result;
}

}  // namespace hdrx
