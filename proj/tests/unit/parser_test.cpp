#include <gtest/gtest.h>

#include <random>

#include "frames.hpp"
#include "hdrx/capture.hpp"
#include "hdrx/parser.hpp"
#include "reference_decoder.hpp"

namespace hdrx {
namespace {

using testing::build_frame;
using testing::flatten;
using testing::FrameSpec;
using testing::reference_decode;

TEST(Parse, TcpFrameYieldsPairAndTcpHeader) {
    FrameSpec s;
    s.src_ip = 0x01020304;
    s.dst_ip = 0x05060708;
    s.total_size = 512;
    const Bytes frame = build_frame(s);
    ASSERT_EQ(frame.size(), 512u);

    const auto outcome = parse(frame);
    ASSERT_TRUE(outcome.extracted());
    EXPECT_FALSE(outcome.error);
    EXPECT_EQ(outcome.pair, (FlowPair{0x01020304, 0x05060708}));
    ASSERT_NE(outcome.headers.tcp(), nullptr);
    EXPECT_EQ(outcome.headers.tcp()->src_port, 443);
    EXPECT_EQ(outcome.headers.tcp()->dst_port, 51234);
    EXPECT_EQ(outcome.headers.ip->total_length, 512 - 14);

    const auto ref = reference_decode(frame);
    EXPECT_EQ(flatten(outcome), ref);
}

TEST(Parse, ArpIsAcceptedWithoutPair) {
    FrameSpec s;
    s.ethertype = kEthertypeArp;
    s.total_size = 60;
    const auto outcome = parse(build_frame(s));
    EXPECT_EQ(outcome.verdict, Verdict::accepted_no_pair);
    EXPECT_FALSE(outcome.error);
    EXPECT_FALSE(outcome.headers.ip);
    EXPECT_EQ(outcome.headers.header_bytes_consumed, 14u);
}

TEST(Parse, VlanTaggedFrameFallsThroughToAccept) {
    FrameSpec s;
    s.ethertype = kEthertypeVlan;
    s.total_size = 64;
    const auto outcome = parse(build_frame(s));
    EXPECT_EQ(outcome.verdict, Verdict::accepted_no_pair);
    EXPECT_FALSE(outcome.headers.ip);
}

TEST(Parse, GreStillExtractsAddresses) {
    FrameSpec s;
    s.protocol = 47;
    s.total_size = 100;
    const auto outcome = parse(build_frame(s));
    ASSERT_TRUE(outcome.extracted());
    EXPECT_TRUE(std::holds_alternative<OtherL4>(outcome.headers.l4));
    EXPECT_EQ(outcome.pair->src_ip, s.src_ip);
    EXPECT_EQ(outcome.headers.header_bytes_consumed, 34u);
}

TEST(Parse, VariableLengthOptionsAreConsumed) {
    FrameSpec s;
    s.ihl = 8;
    s.ip_options.assign(12, 0x01);
    s.doff = 10;
    s.tcp_options.assign(20, 0x02);
    const auto outcome = parse(build_frame(s));
    ASSERT_TRUE(outcome.extracted());
    EXPECT_EQ(outcome.headers.ip->options.size(), 12u);
    EXPECT_EQ(outcome.headers.tcp()->options.size(), 20u);
    EXPECT_EQ(outcome.headers.header_bytes_consumed, 14u + 32u + 40u);
}

TEST(Parse, TruncatedTcpIsErroredWithoutPair) {
    FrameSpec s;
    Bytes frame = build_frame(s);
    frame.resize(14 + 20 + 10);
    const auto outcome = parse(frame);
    EXPECT_EQ(outcome.error, DecodeErrc::truncated);
    EXPECT_EQ(outcome.failed_state, ParseState::parse_tcp);
    EXPECT_EQ(outcome.verdict, Verdict::accepted_no_pair);
    EXPECT_FALSE(outcome.pair);
    EXPECT_TRUE(outcome.headers.ip);  // addresses were decoded, but the packet is dropped
}

TEST(Parse, ShortIhlIsMalformed) {
    FrameSpec s;
    s.ihl = 4;
    const auto outcome = parse(build_frame(s));
    EXPECT_EQ(outcome.error, DecodeErrc::malformed);
    EXPECT_EQ(outcome.failed_state, ParseState::parse_ipv4);
    EXPECT_FALSE(outcome.extracted());
}

TEST(Parse, EmptyAndTinyInputsAreTruncated) {
    EXPECT_EQ(parse(Bytes{}).error, DecodeErrc::truncated);
    EXPECT_EQ(parse(Bytes(13, 0)).error, DecodeErrc::truncated);
}

TEST(Parse, AgreesWithReferenceDecoderOnFuzzedFrames) {
    std::mt19937_64 rng(20240611);
    int extracted = 0, accepted = 0, errored = 0;
    for (int i = 0; i < 12000; ++i) {
        const auto f = testing::fuzz_frame(rng);
        const auto outcome = parse(f.bytes);
        const auto ref = reference_decode(f.bytes);
        ASSERT_EQ(flatten(outcome), ref) << "frame " << i;
        if (outcome.extracted()) {
            ASSERT_EQ(outcome.pair->src_ip, ref.fields.at("ip.src"));
            ASSERT_EQ(outcome.pair->dst_ip, ref.fields.at("ip.dst"));
            ++extracted;
        } else if (outcome.error) {
            ++errored;
        } else {
            ++accepted;
        }
    }
    // The fuzzer must actually exercise every classification.
    EXPECT_GT(extracted, 1000);
    EXPECT_GT(accepted, 500);
    EXPECT_GT(errored, 1000);
}

TEST(Parse, IsDeterministic) {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 500; ++i) {
        const auto f = testing::fuzz_frame(rng);
        EXPECT_EQ(parse(f.bytes), parse(f.bytes));
    }
}

TEST(Parse, AppendingPayloadNeverChangesAcceptedOutcome) {
    std::mt19937_64 rng(99);
    int checked = 0;
    for (int i = 0; i < 4000; ++i) {
        const auto f = testing::fuzz_frame(rng);
        const auto base = parse(f.bytes);
        if (base.error) continue;
        Bytes extended = f.bytes;
        const auto tail = testing::random_bytes(rng, 1 + rng() % 200);
        extended.insert(extended.end(), tail.begin(), tail.end());
        ASSERT_EQ(parse(extended), base) << "frame " << i;

        // Cutting back to exactly the consumed prefix is also enough.
        Bytes prefix(f.bytes.begin(), f.bytes.begin() + base.headers.header_bytes_consumed);
        ASSERT_EQ(parse(prefix), base) << "frame " << i;
        ++checked;
    }
    EXPECT_GT(checked, 1000);
}

TEST(ParseStream, EmptyStreamHasZeroCounters) {
    const auto r = parse_stream({});
    EXPECT_EQ(r.stats, ParseStats{});
    EXPECT_TRUE(r.outcomes.empty());
}

TEST(ParseStream, CountsSynthesizedMix) {
    std::vector<RawPacket> pkts;
    FrameSpec tcp;
    tcp.total_size = 80;
    FrameSpec udp;
    udp.protocol = 17;
    udp.total_size = 80;
    FrameSpec arp;
    arp.ethertype = kEthertypeArp;
    arp.total_size = 60;
    for (int i = 0; i < 100; ++i) pkts.emplace_back(build_frame(tcp));
    for (int i = 0; i < 50; ++i) pkts.emplace_back(build_frame(udp));
    for (int i = 0; i < 10; ++i) pkts.emplace_back(build_frame(arp));

    const auto r = parse_stream(pkts);
    EXPECT_EQ(r.stats.total, 160u);
    EXPECT_EQ(r.stats.ipv4, 150u);
    EXPECT_EQ(r.stats.tcp, 100u);
    EXPECT_EQ(r.stats.udp, 50u);
    EXPECT_EQ(r.stats.non_ip, 10u);
    EXPECT_EQ(r.stats.errored, 0u);
    EXPECT_TRUE(r.stats.consistent());
    ASSERT_EQ(r.outcomes.size(), 160u);
    EXPECT_TRUE(r.outcomes[0].headers.tcp());
    EXPECT_TRUE(r.outcomes[100].headers.udp());
    EXPECT_FALSE(r.outcomes[159].headers.ip);
}

TEST(ParseStream, Ipv4CountMatchesSinglePassRescan) {
    // Header-only trace (snaplen 54), padded, plus a fuzzed tail.
    std::vector<RawPacket> pkts;
    auto cap = synthesize_uniform(3000, 256, 17);
    for (auto& rec : cap.records) rec.data.resize(54);
    for (const auto& rec : cap.records) pkts.push_back(pad_packet(rec));
    std::mt19937_64 rng(5);
    for (int i = 0; i < 3000; ++i) pkts.emplace_back(testing::fuzz_frame(rng).bytes);

    std::uint64_t naive_ipv4 = 0, naive_errored = 0;
    for (const auto& p : pkts) {
        const auto ref = reference_decode(p.data);
        naive_ipv4 += ref.cls == testing::RefClass::extract;
        naive_errored += ref.cls == testing::RefClass::error;
    }
    const auto r = parse_stream(pkts);
    EXPECT_EQ(r.stats.ipv4, naive_ipv4);
    EXPECT_EQ(r.stats.errored, naive_errored);
    EXPECT_GE(r.stats.ipv4, 3000u);
}

TEST(ParseStats, PartitionHoldsAndShardsMerge) {
    std::mt19937_64 rng(77);
    std::vector<RawPacket> pkts;
    for (int i = 0; i < 3000; ++i) pkts.emplace_back(testing::fuzz_frame(rng).bytes);
    const auto whole = parse_stream(pkts).stats;
    EXPECT_TRUE(whole.consistent());
    EXPECT_EQ(whole.tcp + whole.udp + whole.other_l4, whole.ipv4);
    EXPECT_EQ(whole.ipv4 + whole.non_ip + whole.errored, whole.total);

    std::span<const RawPacket> all(pkts);
    auto a = parse_stream(all.first(1234)).stats;
    a += parse_stream(all.subspan(1234)).stats;
    EXPECT_EQ(a, whole);
}

}  // namespace
}  // namespace hdrx
