#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bf/errors.hpp"
#include "bf/types.hpp"

namespace bf::io {

// Station UDP packet, all fields little-endian:
//
//   offset  size  field
//        0     4  magic "BFSP"
//        4     1  version (1)
//        5     2  station
//        7     2  subband
//        9     4  block
//       13     4  sample_offset   first sample of the payload within the chunk
//       17     2  n_samples
//       19   8*n  payload, RawSample (x_re, x_im, y_re, y_im as int16)
//
// A packet with n_samples = 0 and sample_offset = 0xFFFFFFFF marks the end
// of a station's stream.
constexpr std::array<std::byte, 4> kPacketMagic{std::byte{'B'}, std::byte{'F'}, std::byte{'S'},
                                                std::byte{'P'}};
constexpr std::uint8_t kPacketVersion = 1;
constexpr std::size_t kPacketHeaderBytes = 19;
constexpr std::uint32_t kEndOfStreamOffset = 0xFFFFFFFFu;
constexpr int kDefaultSamplesPerPacket = 1024;

struct StationPacket {
    std::uint8_t version = kPacketVersion;
    std::uint16_t station = 0;
    std::uint16_t subband = 0;
    std::uint32_t block = 0;
    std::uint32_t sample_offset = 0;
    std::vector<DualPolSample> payload;  // integral values

    bool end_of_stream() const { return sample_offset == kEndOfStreamOffset && payload.empty(); }
};

class UnsupportedVersionError : public MalformedInputError {
  public:
    using MalformedInputError::MalformedInputError;
};

// RangeError when the payload is too long or holds non-int16 values.
std::vector<std::byte> encode_packet(const StationPacket& packet);

// MalformedInputError for bad magic or a length that disagrees with
// n_samples; UnsupportedVersionError for any version but 1.
StationPacket decode_packet(std::span<const std::byte> bytes);

// A chunk cut into packets of at most samples_per_packet samples.
std::vector<std::vector<std::byte>> packetize_chunk(const Chunk& chunk,
                                                    int samples_per_packet = kDefaultSamplesPerPacket);

} // namespace bf::io
