#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>

#include "hdrx/capture.hpp"

namespace hdrx {

enum class ReplayMode { in_process, datagram_socket };

const char* to_string(ReplayMode mode) noexcept;
ReplayMode parse_replay_mode(const std::string& text);

inline constexpr const char* kDefaultReplayAddress = "127.0.0.1";
inline constexpr std::uint16_t kDefaultReplayPort = 9184;

struct ReplayConfig {
    ReplayMode mode = ReplayMode::in_process;
    std::optional<double> target_pps;  // unset: as fast as possible
    std::uint32_t loop_count = 1;
    bool pad = true;
    std::string address = kDefaultReplayAddress;
    std::uint16_t port = kDefaultReplayPort;

    void validate() const;
};

struct ReplayStats {
    std::uint64_t packets_sent = 0;
    std::uint64_t bytes_sent = 0;
    std::uint64_t send_errors = 0;
    std::chrono::nanoseconds elapsed{0};
    double achieved_pps = 0.0;
};

// Token bucket pacing. Tokens accrue at `rate` per second up to `burst`.
class TokenBucket {
public:
    using Clock = std::chrono::steady_clock;

    explicit TokenBucket(double rate, double burst = 0.0);

    /// Blocks until one token is available, then consumes it.
    void acquire();
    bool try_acquire(Clock::time_point now);

    double rate() const noexcept { return rate_; }

private:
    void refill(Clock::time_point now);

    double rate_;
    double burst_;
    double tokens_;
    Clock::time_point last_;
};

using PacketSink = std::function<void(const RawPacket&)>;

/// In-process mode hands every packet to `sink`; datagram mode sends each
/// frame as one UDP datagram to cfg.address:cfg.port and ignores `sink`.
/// Packets go out in order, loop_count times.
ReplayStats replay(std::span<const RawPacket> packets, const ReplayConfig& cfg,
                   const PacketSink& sink);

/// Pads (if cfg.pad) and replays a capture.
ReplayStats replay(const CaptureFile& cap, const ReplayConfig& cfg, const PacketSink& sink);

// Loopback UDP endpoint that receives frames sent by datagram-mode replay.
class DatagramReceiver {
public:
    /// Binds address:port. Port 0 picks an ephemeral port.
    DatagramReceiver(const std::string& address, std::uint16_t port);
    ~DatagramReceiver();

    DatagramReceiver(const DatagramReceiver&) = delete;
    DatagramReceiver& operator=(const DatagramReceiver&) = delete;

    std::uint16_t port() const noexcept { return port_; }

    /// Receives until an end-of-stream marker (an empty datagram) arrives, or
    /// until `sender_done` is set and nothing arrived for `idle_timeout`.
    /// Returns the number of frames delivered.
    std::uint64_t receive(const std::function<void(RawPacket&&)>& deliver,
                          const std::atomic<bool>& sender_done,
                          std::chrono::milliseconds idle_timeout = std::chrono::milliseconds(300));

private:
    int fd_ = -1;
    std::uint16_t port_ = 0;
};

/// Sends `copies` empty datagrams marking end of stream.
void send_end_of_stream(const std::string& address, std::uint16_t port, int copies = 3);

}  // namespace hdrx
