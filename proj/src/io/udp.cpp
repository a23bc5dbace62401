#include "bf/io/udp.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <random>

#include "bf/errors.hpp"

namespace bf::io {

namespace {

[[noreturn]] void sys_fail(const std::string& what) {
    throw Error(what + ": " + std::strerror(errno));
}

} // namespace

UdpSender::UdpSender(const std::string& host, std::uint16_t port) {
    fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
    if (fd_ < 0)
        sys_fail("socket");
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        ::close(fd_);
        throw ConfigError("not an IPv4 address: " + host);
    }
    if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) {
        ::close(fd_);
        sys_fail("connect");
    }
}

UdpSender::~UdpSender() {
    if (fd_ >= 0)
        ::close(fd_);
}

void UdpSender::send(std::span<const std::byte> datagram) {
    for (;;) {
        const auto n = ::send(fd_, datagram.data(), datagram.size(), 0);
        if (n >= 0)
            return;
        // Nobody listening (ICMP refused): the datagram is simply lost.
        if (errno == ECONNREFUSED)
            return;
        if (errno == ENOBUFS || errno == EAGAIN || errno == EINTR) {
            std::this_thread::sleep_for(std::chrono::microseconds(200));
            continue;
        }
        sys_fail("send");
    }
}

SendStats send_stream(ChunkSource& source, UdpSender& sender, const SendOptions& options) {
    SendStats stats;
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto start = std::chrono::steady_clock::now();
    std::uint64_t attempted = 0;
    auto pace = [&] {
        if (options.max_packets_per_second <= 0)
            return;
        const auto due = start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                     std::chrono::duration<double>(attempted /
                                                                   options.max_packets_per_second));
        std::this_thread::sleep_until(due);
    };
    while (auto chunk = source.next()) {
        for (const auto& pkt : packetize_chunk(*chunk, options.samples_per_packet)) {
            ++attempted;
            if (options.loss_probability > 0 && u(rng) < options.loss_probability) {
                ++stats.packets_dropped;
                stats.samples_dropped += (pkt.size() - kPacketHeaderBytes) / kRawSampleBytes;
                continue;
            }
            pace();
            sender.send(pkt);
            ++stats.packets_sent;
        }
    }
    for (int repeat = 0; repeat < 3; ++repeat)
        for (int s = 0; s < options.n_stations; ++s) {
            StationPacket eos;
            eos.station = static_cast<std::uint16_t>(s);
            eos.sample_offset = kEndOfStreamOffset;
            sender.send(encode_packet(eos));
        }
    return stats;
}

UdpChunkSource::UdpChunkSource(std::uint16_t port, const ObservationConfig& config,
                               ReceiveOptions options)
    : config_(config), options_(options) {
    config_.validate();
    fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
    if (fd_ < 0)
        sys_fail("socket");
    int size = options_.receive_buffer_bytes;
    // The forced variant ignores rmem_max but needs privileges; fall back quietly.
    if (::setsockopt(fd_, SOL_SOCKET, SO_RCVBUFFORCE, &size, sizeof size) < 0)
        ::setsockopt(fd_, SOL_SOCKET, SO_RCVBUF, &size, sizeof size);
    timeval tv{0, 20000};
    ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) {
        ::close(fd_);
        sys_fail("bind");
    }
    socklen_t len = sizeof addr;
    ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    thread_ = std::thread([this] { receive_loop(); });
}

UdpChunkSource::~UdpChunkSource() {
    stop_ = true;
    if (thread_.joinable())
        thread_.join();
    if (fd_ >= 0)
        ::close(fd_);
}

void UdpChunkSource::cancel() {
    stop_ = true;
    std::lock_guard lock(mutex_);
    done_ = true;
    cv_.notify_all();
}

std::optional<Chunk> UdpChunkSource::next() {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return done_ || !ready_.empty(); });
    if (ready_.empty())
        return std::nullopt;
    Chunk c = std::move(ready_.front());
    ready_.pop_front();
    return c;
}

void UdpChunkSource::receive_loop() {
    std::vector<std::byte> buf(65536);
    auto last = std::chrono::steady_clock::now();
    while (!stop_) {
        const auto n = ::recv(fd_, buf.data(), buf.size(), 0);
        if (n < 0) {
            if (std::chrono::steady_clock::now() - last > options_.idle_timeout)
                break;
            continue;
        }
        last = std::chrono::steady_clock::now();
        ++packets_received_;
        try {
            handle(decode_packet(std::span(buf).first(std::size_t(n))));
        } catch (const UnsupportedVersionError&) {
            ++packets_bad_version_;
        } catch (const Error&) {
            ++packets_malformed_;
        }
        if (static_cast<int>(ended_.size()) >= config_.n_stations)
            break;
    }
    finish();
}

void UdpChunkSource::handle(const StationPacket& p) {
    if (p.end_of_stream()) {
        ended_.insert(p.station);
        return;
    }
    const std::size_t L = std::size_t(config_.chunk_samples());
    if (p.station >= config_.n_stations || p.subband >= config_.n_subbands ||
        std::size_t(p.sample_offset) + p.payload.size() > L) {
        ++packets_malformed_;
        return;
    }
    const Key key{p.block, p.subband, p.station};
    if (released_.count(key) || std::int64_t(p.block) + options_.deadline_blocks <= max_block_) {
        ++packets_late_;
        return;
    }
    auto& part = partials_[key];
    if (part.samples.empty()) {
        part.samples.assign(L, DualPolSample{});
        part.filled.assign(L, 0);
    }
    for (std::size_t k = 0; k < p.payload.size(); ++k) {
        const std::size_t i = p.sample_offset + k;
        if (!part.filled[i]) {
            part.filled[i] = 1;
            ++part.n_filled;
        }
        part.samples[i] = p.payload[k];
    }
    if (part.n_filled == L) {
        release(key, part);
        partials_.erase(key);
    }
    if (std::int64_t(p.block) > max_block_) {
        max_block_ = p.block;
        flush_older_than(max_block_ - options_.deadline_blocks + 1);
    }
}

void UdpChunkSource::release(const Key& key, Partial& part) {
    samples_substituted_ += part.samples.size() - part.n_filled;
    Chunk c;
    c.block = std::get<0>(key);
    c.subband = std::get<1>(key);
    c.station = std::get<2>(key);
    c.sample_rate = config_.subband_width;
    c.start_time = c.block * config_.block_duration();
    c.samples = std::move(part.samples);
    released_.insert(key);
    // Forget released keys far behind the deadline.
    while (!released_.empty() &&
           std::int64_t(std::get<0>(*released_.begin())) + 2 * options_.deadline_blocks + 2 <
               max_block_)
        released_.erase(released_.begin());
    std::lock_guard lock(mutex_);
    ready_.push_back(std::move(c));
    cv_.notify_one();
}

void UdpChunkSource::flush_older_than(std::int64_t block) {
    for (auto it = partials_.begin(); it != partials_.end();) {
        if (std::int64_t(std::get<0>(it->first)) < block) {
            release(it->first, it->second);
            it = partials_.erase(it);
        } else {
            ++it;
        }
    }
}

void UdpChunkSource::finish() {
    flush_older_than(INT64_MAX);
    std::lock_guard lock(mutex_);
    done_ = true;
    cv_.notify_all();
}

} // namespace bf::io
