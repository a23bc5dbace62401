#include "bf/io/packet.hpp"

#include <algorithm>
#include <string>

#include "bf/endian.hpp"
#include "bf/samples.hpp"

namespace bf::io {

std::vector<std::byte> encode_packet(const StationPacket& p) {
    if (p.payload.size() > 0xFFFF)
        throw RangeError("packet payload longer than 65535 samples");
    std::vector<std::byte> out(kPacketHeaderBytes);
    std::copy(kPacketMagic.begin(), kPacketMagic.end(), out.begin());
    out[4] = std::byte{p.version};
    le::store<std::uint16_t>(&out[5], p.station);
    le::store<std::uint16_t>(&out[7], p.subband);
    le::store<std::uint32_t>(&out[9], p.block);
    le::store<std::uint32_t>(&out[13], p.sample_offset);
    le::store<std::uint16_t>(&out[17], static_cast<std::uint16_t>(p.payload.size()));
    encode_samples_into(p.payload, out);
    return out;
}

StationPacket decode_packet(std::span<const std::byte> bytes) {
    if (bytes.size() < kPacketHeaderBytes)
        throw MalformedInputError("packet shorter than its header");
    if (!std::equal(kPacketMagic.begin(), kPacketMagic.end(), bytes.begin()))
        throw MalformedInputError("packet magic mismatch");
    StationPacket p;
    p.version = std::to_integer<std::uint8_t>(bytes[4]);
    if (p.version != kPacketVersion)
        throw UnsupportedVersionError("packet version " + std::to_string(p.version));
    p.station = le::load<std::uint16_t>(&bytes[5]);
    p.subband = le::load<std::uint16_t>(&bytes[7]);
    p.block = le::load<std::uint32_t>(&bytes[9]);
    p.sample_offset = le::load<std::uint32_t>(&bytes[13]);
    const std::size_t n = le::load<std::uint16_t>(&bytes[17]);
    if (bytes.size() != kPacketHeaderBytes + n * kRawSampleBytes)
        throw MalformedInputError("packet length " + std::to_string(bytes.size()) +
                                  " does not match " + std::to_string(n) + " samples");
    p.payload = decode_samples(bytes.subspan(kPacketHeaderBytes));
    return p;
}

std::vector<std::vector<std::byte>> packetize_chunk(const Chunk& chunk, int samples_per_packet) {
    if (samples_per_packet < 1 || samples_per_packet > 0xFFFF)
        throw RangeError("samples per packet must be in 1..65535");
    if (chunk.station > 0xFFFF || chunk.subband > 0xFFFF)
        throw RangeError("station or subband does not fit the packet header");
    std::vector<std::vector<std::byte>> out;
    for (std::size_t off = 0; off < chunk.samples.size(); off += samples_per_packet) {
        const std::size_t n = std::min<std::size_t>(samples_per_packet, chunk.samples.size() - off);
        StationPacket p;
        p.station = static_cast<std::uint16_t>(chunk.station);
        p.subband = static_cast<std::uint16_t>(chunk.subband);
        p.block = chunk.block;
        p.sample_offset = static_cast<std::uint32_t>(off);
        p.payload.assign(chunk.samples.begin() + off, chunk.samples.begin() + off + n);
        out.push_back(encode_packet(p));
    }
    return out;
}

} // namespace bf::io
