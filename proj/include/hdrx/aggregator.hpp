#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hdrx/packet.hpp"
#include "hdrx/parser.hpp"

namespace hdrx {

inline constexpr std::uint16_t kDefaultSummaryEthertype = 0x88B5;
inline constexpr unsigned kMaxPairsPerSummary = 255;
inline constexpr std::size_t kSummaryHeaderLen = kEthernetHeaderLen + 1;
inline constexpr std::size_t kFlowPairWireLen = 8;

struct AggregatorConfig {
    unsigned n_p = 150;
    std::uint16_t summary_ethertype = kDefaultSummaryEthertype;
    MacAddress summary_dst_mac{};
    MacAddress summary_src_mac{};

    /// Throws std::invalid_argument unless 1 <= n_p <= 255.
    void validate() const;
};

// Custom-protocol packet carrying packed (src, dst) pairs.
//
//   0..5   dst MAC
//   6..11  src MAC
//   12..13 ethertype (big-endian)
//   14     pair count
//   15..   count * { src_ip (4, BE), dst_ip (4, BE) }
struct SummaryPacket {
    EthernetHeader eth;
    std::vector<FlowPair> pairs;

    std::uint8_t count() const noexcept { return static_cast<std::uint8_t>(pairs.size()); }
    std::size_t wire_size() const noexcept {
        return kSummaryHeaderLen + kFlowPairWireLen * pairs.size();
    }
    bool operator==(const SummaryPacket&) const = default;
};

Bytes encode_summary(const SummaryPacket& s);
void encode_summary_into(const SummaryPacket& s, Bytes& out);

/// Throws DecodeError: truncated if fewer than 15 + 8 * count bytes,
/// wrong_protocol if the ethertype is not `expected_ethertype`. Trailing
/// bytes past the last pair are ignored.
SummaryPacket decode_summary(ByteView data,
                             std::uint16_t expected_ethertype = kDefaultSummaryEthertype);

class Aggregator {
public:
    explicit Aggregator(AggregatorConfig cfg);

    /// Returns a full summary exactly when the pending buffer reaches n_p.
    std::optional<SummaryPacket> push(FlowPair pair);

    /// Emits whatever is pending as a short summary.
    std::optional<SummaryPacket> flush();

    std::size_t pending() const noexcept { return pending_.size(); }
    std::uint64_t emitted() const noexcept { return emitted_; }
    const AggregatorConfig& config() const noexcept { return cfg_; }

private:
    SummaryPacket take_pending();

    AggregatorConfig cfg_;
    std::vector<FlowPair> pending_;
    std::uint64_t emitted_ = 0;
};

/// 1 / (n_p + 1). Throws std::invalid_argument for n_p == 0.
double theoretical_drop_rate(unsigned n_p);

// Saturated egress link: every emitted summary takes the slot of one real
// packet. `forwarded` packets had their pair recorded; `displaced` were lost
// to summary slots.
struct SlotModelResult {
    std::uint64_t forwarded = 0;
    std::uint64_t displaced = 0;

    std::uint64_t offered() const noexcept { return forwarded + displaced; }
    double displaced_fraction() const noexcept {
        return offered() == 0 ? 0.0
                              : static_cast<double>(displaced) / static_cast<double>(offered());
    }
    bool operator==(const SlotModelResult&) const = default;
};

SlotModelResult simulate_slot_model(std::uint64_t n_pairs, unsigned n_p);

}  // namespace hdrx
