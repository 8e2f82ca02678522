#include "hdrx/replay.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <system_error>
#include <thread>

namespace hdrx {

const char* to_string(ReplayMode mode) noexcept {
    return mode == ReplayMode::in_process ? "in-process" : "socket";
}

ReplayMode parse_replay_mode(const std::string& text) {
    if (text == "in-process" || text == "in_process") return ReplayMode::in_process;
    if (text == "socket" || text == "datagram_socket") return ReplayMode::datagram_socket;
    throw std::invalid_argument("unknown replay mode '" + text + "' (expected in-process|socket)");
}

void ReplayConfig::validate() const {
    if (loop_count < 1) throw std::invalid_argument("loop_count must be >= 1");
    if (target_pps && !(*target_pps > 0.0 && std::isfinite(*target_pps))) {
        throw std::invalid_argument("target pps must be positive");
    }
}

TokenBucket::TokenBucket(double rate, double burst)
    : rate_(rate),
      burst_(burst > 0.0 ? burst : std::max(1.0, rate / 1000.0)),
      tokens_(1.0),
      last_(Clock::now()) {
    if (!(rate > 0.0)) throw std::invalid_argument("token bucket rate must be positive");
}

void TokenBucket::refill(Clock::time_point now) {
    const double dt = std::chrono::duration<double>(now - last_).count();
    if (dt > 0.0) {
        tokens_ = std::min(burst_, tokens_ + dt * rate_);
        last_ = now;
    }
}

bool TokenBucket::try_acquire(Clock::time_point now) {
    refill(now);
    if (tokens_ < 1.0) return false;
    tokens_ -= 1.0;
    return true;
}

void TokenBucket::acquire() {
    for (;;) {
        const auto now = Clock::now();
        if (try_acquire(now)) return;
        const double wait_s = (1.0 - tokens_) / rate_;
        if (wait_s > 200e-6) {
            std::this_thread::sleep_for(std::chrono::duration<double>(wait_s - 100e-6));
        } else {
            std::this_thread::yield();
        }
    }
}

namespace {

sockaddr_in make_address(const std::string& address, std::uint16_t port) {
    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_port = htons(port);
    if (::inet_pton(AF_INET, address.c_str(), &sa.sin_addr) != 1) {
        throw std::invalid_argument("invalid IPv4 address '" + address + "'");
    }
    return sa;
}

class UdpSocket {
public:
    UdpSocket() : fd_(::socket(AF_INET, SOCK_DGRAM, 0)) {
        if (fd_ < 0) throw std::system_error(errno, std::generic_category(), "socket");
    }
    ~UdpSocket() {
        if (fd_ >= 0) ::close(fd_);
    }
    UdpSocket(const UdpSocket&) = delete;
    UdpSocket& operator=(const UdpSocket&) = delete;

    int fd() const noexcept { return fd_; }

private:
    int fd_;
};

}  // namespace

ReplayStats replay(std::span<const RawPacket> packets, const ReplayConfig& cfg,
                   const PacketSink& sink) {
    cfg.validate();
    ReplayStats stats;
    std::optional<TokenBucket> bucket;
    if (cfg.target_pps) bucket.emplace(*cfg.target_pps);

    std::optional<UdpSocket> sock;
    sockaddr_in dest{};
    if (cfg.mode == ReplayMode::datagram_socket) {
        dest = make_address(cfg.address, cfg.port);
        sock.emplace();
        int sndbuf = 4 << 20;
        ::setsockopt(sock->fd(), SOL_SOCKET, SO_SNDBUF, &sndbuf, sizeof sndbuf);
    } else if (!sink) {
        throw std::invalid_argument("in-process replay requires a sink");
    }

    const auto start = std::chrono::steady_clock::now();
    for (std::uint32_t loop = 0; loop < cfg.loop_count; ++loop) {
        for (const auto& pkt : packets) {
            if (bucket) bucket->acquire();
            if (sock) {
                auto rc = ::sendto(sock->fd(), pkt.data.data(), pkt.data.size(), 0,
                                   reinterpret_cast<const sockaddr*>(&dest), sizeof dest);
                if (rc < 0) {
                    ++stats.send_errors;
                    continue;
                }
            } else {
                sink(pkt);
            }
            ++stats.packets_sent;
            stats.bytes_sent += pkt.data.size();
        }
    }
    stats.elapsed = std::chrono::steady_clock::now() - start;
    const double secs = std::chrono::duration<double>(stats.elapsed).count();
    stats.achieved_pps = secs > 0.0 ? static_cast<double>(stats.packets_sent) / secs : 0.0;
    return stats;
}

ReplayStats replay(const CaptureFile& cap, const ReplayConfig& cfg, const PacketSink& sink) {
    const auto packets = prepare_packets(cap, cfg.pad);
    return replay(std::span<const RawPacket>(packets), cfg, sink);
}

DatagramReceiver::DatagramReceiver(const std::string& address, std::uint16_t port) {
    const sockaddr_in sa = make_address(address, port);
    fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
    if (fd_ < 0) throw std::system_error(errno, std::generic_category(), "socket");
    int rcvbuf = 16 << 20;
    ::setsockopt(fd_, SOL_SOCKET, SO_RCVBUF, &rcvbuf, sizeof rcvbuf);
    timeval tv{0, 50'000};
    ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
    if (::bind(fd_, reinterpret_cast<const sockaddr*>(&sa), sizeof sa) < 0) {
        const int err = errno;
        ::close(fd_);
        throw std::system_error(err, std::generic_category(),
                                "bind " + address + ":" + std::to_string(port));
    }
    sockaddr_in bound{};
    socklen_t len = sizeof bound;
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&bound), &len);
    port_ = ntohs(bound.sin_port);
}

DatagramReceiver::~DatagramReceiver() {
    if (fd_ >= 0) ::close(fd_);
}

std::uint64_t DatagramReceiver::receive(const std::function<void(RawPacket&&)>& deliver,
                                        const std::atomic<bool>& sender_done,
                                        std::chrono::milliseconds idle_timeout) {
    std::uint64_t delivered = 0;
    Bytes buf(65536);
    auto last_activity = std::chrono::steady_clock::now();
    for (;;) {
        const ssize_t n = ::recv(fd_, buf.data(), buf.size(), 0);
        const auto now = std::chrono::steady_clock::now();
        if (n > 0) {
            last_activity = now;
            const auto ts = static_cast<std::uint64_t>(
                std::chrono::duration_cast<std::chrono::nanoseconds>(
                    std::chrono::system_clock::now().time_since_epoch())
                    .count());
            deliver(RawPacket(Bytes(buf.begin(), buf.begin() + n), ts));
            ++delivered;
            continue;
        }
        if (n == 0) break;  // end-of-stream marker
        if (errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR) {
            throw std::system_error(errno, std::generic_category(), "recv");
        }
        if (sender_done.load(std::memory_order_acquire) && now - last_activity >= idle_timeout) {
            break;
        }
    }
    return delivered;
}

void send_end_of_stream(const std::string& address, std::uint16_t port, int copies) {
    const sockaddr_in dest = make_address(address, port);
    UdpSocket sock;
    for (int i = 0; i < copies; ++i) {
        ::sendto(sock.fd(), nullptr, 0, 0, reinterpret_cast<const sockaddr*>(&dest), sizeof dest);
    }
}

}  // namespace hdrx
