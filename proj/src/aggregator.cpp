#include "hdrx/aggregator.hpp"

#include <string>

namespace hdrx {

void AggregatorConfig::validate() const {
    if (n_p < 1 || n_p > kMaxPairsPerSummary) {
        throw std::invalid_argument("n_p must be in [1, 255], got " + std::to_string(n_p));
    }
}

void encode_summary_into(const SummaryPacket& s, Bytes& out) {
    if (s.pairs.size() > kMaxPairsPerSummary) {
        throw std::invalid_argument("summary holds more than 255 pairs");
    }
    out.reserve(out.size() + s.wire_size());
    encode_ethernet(s.eth, out);
    out.push_back(s.count());
    for (const auto& p : s.pairs) {
        wire::append_be32(out, p.src_ip);
        wire::append_be32(out, p.dst_ip);
    }
}

Bytes encode_summary(const SummaryPacket& s) {
    Bytes out;
    encode_summary_into(s, out);
    return out;
}

SummaryPacket decode_summary(ByteView data, std::uint16_t expected_ethertype) {
    if (data.size() < kSummaryHeaderLen) {
        throw DecodeError(DecodeErrc::truncated, "summary: shorter than 15-byte header");
    }
    SummaryPacket s;
    s.eth = decode_ethernet(data).header;
    if (s.eth.ethertype != expected_ethertype) {
        throw DecodeError(DecodeErrc::wrong_protocol,
                          "summary: unexpected ethertype " + std::to_string(s.eth.ethertype));
    }
    const std::size_t count = data[kEthernetHeaderLen];
    if (data.size() < kSummaryHeaderLen + kFlowPairWireLen * count) {
        throw DecodeError(DecodeErrc::truncated,
                          "summary: payload shorter than " + std::to_string(count) + " pairs");
    }
    s.pairs.resize(count);
    const std::uint8_t* p = data.data() + kSummaryHeaderLen;
    for (auto& pair : s.pairs) {
        pair.src_ip = wire::load_be32(p);
        pair.dst_ip = wire::load_be32(p + 4);
        p += kFlowPairWireLen;
    }
    return s;
}

Aggregator::Aggregator(AggregatorConfig cfg) : cfg_(cfg) {
    cfg_.validate();
    pending_.reserve(cfg_.n_p);
}

SummaryPacket Aggregator::take_pending() {
    SummaryPacket s;
    s.eth.dst_mac = cfg_.summary_dst_mac;
    s.eth.src_mac = cfg_.summary_src_mac;
    s.eth.ethertype = cfg_.summary_ethertype;
    s.pairs.swap(pending_);
    pending_.reserve(cfg_.n_p);
    ++emitted_;
    return s;
}

std::optional<SummaryPacket> Aggregator::push(FlowPair pair) {
    pending_.push_back(pair);
    if (pending_.size() < cfg_.n_p) return std::nullopt;
    return take_pending();
}

std::optional<SummaryPacket> Aggregator::flush() {
    if (pending_.empty()) return std::nullopt;
    return take_pending();
}

double theoretical_drop_rate(unsigned n_p) {
    if (n_p == 0) throw std::invalid_argument("theoretical_drop_rate: n_p must be >= 1");
    return 1.0 / (static_cast<double>(n_p) + 1.0);
}

SlotModelResult simulate_slot_model(std::uint64_t n_pairs, unsigned n_p) {
    if (n_p == 0) throw std::invalid_argument("simulate_slot_model: n_p must be >= 1");
    // Walk the link slot by slot: each recorded pair fills the buffer, a full
    // buffer consumes the next slot.
    SlotModelResult r;
    std::uint64_t buffered = 0;
    while (r.forwarded < n_pairs) {
        ++r.forwarded;
        if (++buffered == n_p) {
            buffered = 0;
            ++r.displaced;
        }
    }
    return r;
}

}  // namespace hdrx
