#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "bf/config.hpp"
#include "bf/io/packet.hpp"
#include "bf/pipeline.hpp"

namespace bf::io {

class UdpSender {
  public:
    UdpSender(const std::string& host, std::uint16_t port);
    ~UdpSender();
    UdpSender(const UdpSender&) = delete;
    UdpSender& operator=(const UdpSender&) = delete;

    void send(std::span<const std::byte> datagram);

  private:
    int fd_ = -1;
};

struct SendOptions {
    int samples_per_packet = kDefaultSamplesPerPacket;
    double loss_probability = 0.0;  // packets deliberately not sent
    std::uint64_t seed = 1;
    double max_packets_per_second = 0.0;  // 0 = unpaced
    int n_stations = 0;                   // end-of-stream markers to send
};

struct SendStats {
    std::uint64_t packets_sent = 0;
    std::uint64_t packets_dropped = 0;
    std::uint64_t samples_dropped = 0;
};

// Packetizes every chunk from `source` and sends it, then end-of-stream
// markers for stations 0..n_stations-1.
SendStats send_stream(ChunkSource& source, UdpSender& sender, const SendOptions& options);

struct ReceiveOptions {
    int deadline_blocks = 2;  // partial chunks are zero-filled this many blocks later
    std::chrono::milliseconds idle_timeout{2000};
    int receive_buffer_bytes = 32 << 20;
};

// Listens on 127.0.0.1:port (0 = any free port) and reassembles station
// packets into chunks.  A chunk with lost packets is released zero-filled
// once a packet deadline_blocks later arrives, or when the stream ends
// (every station sent end-of-stream, or nothing arrived for idle_timeout).
class UdpChunkSource : public ChunkSource {
  public:
    UdpChunkSource(std::uint16_t port, const ObservationConfig& config, ReceiveOptions options = {});
    ~UdpChunkSource() override;

    std::uint16_t port() const { return port_; }

    std::optional<Chunk> next() override;
    void cancel() override;
    std::uint64_t samples_substituted() const override { return samples_substituted_; }
    std::uint64_t packets_bad_version() const override { return packets_bad_version_; }
    std::uint64_t packets_received() const { return packets_received_; }
    std::uint64_t packets_malformed() const { return packets_malformed_; }
    std::uint64_t packets_late() const { return packets_late_; }

  private:
    using Key = std::tuple<std::uint32_t, std::uint32_t, std::uint32_t>;  // block, subband, station
    struct Partial {
        std::vector<DualPolSample> samples;
        std::vector<std::uint8_t> filled;
        std::size_t n_filled = 0;
    };

    void receive_loop();
    void handle(const StationPacket& packet);
    void release(const Key& key, Partial& partial);
    void flush_older_than(std::int64_t block);
    void finish();

    ObservationConfig config_;
    ReceiveOptions options_;
    int fd_ = -1;
    std::uint16_t port_ = 0;
    std::thread thread_;
    std::atomic<bool> stop_{false};

    std::map<Key, Partial> partials_;  // receive thread only
    std::set<Key> released_;
    std::set<std::uint32_t> ended_;
    std::int64_t max_block_ = -1;

    std::mutex mutex_;
    std::condition_variable cv_;
    std::deque<Chunk> ready_;
    bool done_ = false;

    std::atomic<std::uint64_t> samples_substituted_{0};
    std::atomic<std::uint64_t> packets_bad_version_{0};
    std::atomic<std::uint64_t> packets_received_{0};
    std::atomic<std::uint64_t> packets_malformed_{0};
    std::atomic<std::uint64_t> packets_late_{0};
};

} // namespace bf::io
