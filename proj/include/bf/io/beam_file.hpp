#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "bf/pipeline.hpp"
#include "bf/types.hpp"

namespace bf::io {

// Beam file: 96-byte little-endian header, then f32 little-endian samples
// in [time][channel][component] order, one block after another.
//
//   offset  size  field
//        0     4  magic "TABF"
//        4     2  version (1)
//        6     2  mode (0 voltages, 1 Stokes IQUV, 2 Stokes I)
//        8     4  beam
//       12     4  channels_per_subband
//       16     4  first_subband
//       20     4  n_subbands
//       24     4  first_component
//       28     4  n_components
//       32     4  integration
//       36     4  flags (bit 0 incoherent, bit 1 dedispersed)
//       40     8  sample_rate (f64, output samples/s per channel)
//       48    24  direction x, y, z (f64)
//       72     8  base_frequency (f64, Hz, centre of the first channel)
//       80     8  channel_width (f64, Hz)
//       88     4  subband_stride
//       92     4  reserved (0)
constexpr std::size_t kBeamHeaderBytes = 96;
constexpr std::uint32_t kBeamFlagIncoherent = 1;
constexpr std::uint32_t kBeamFlagDedispersed = 2;

struct BeamFileHeader {
    std::uint16_t version = 1;
    OutputMode mode = OutputMode::StokesI;
    std::uint32_t beam = 0;
    std::uint32_t channels_per_subband = 0;
    std::uint32_t first_subband = 0;
    std::uint32_t n_subbands = 0;
    std::uint32_t first_component = 0;
    std::uint32_t n_components = 0;
    std::uint32_t integration = 1;
    std::uint32_t flags = 0;
    double sample_rate = 0.0;
    Vec3 direction{0.0, 0.0, 0.0};
    double base_frequency = 0.0;
    double channel_width = 0.0;
    std::uint32_t subband_stride = 1;

    std::uint32_t n_channels() const { return channels_per_subband * n_subbands; }
    // Centre frequency of file channel k (subband-major).
    double channel_frequency(std::uint32_t k) const;
    friend bool operator==(const BeamFileHeader&, const BeamFileHeader&) = default;
};

std::array<std::byte, kBeamHeaderBytes> encode_beam_header(const BeamFileHeader& header);
// MalformedInputError for bad magic, version or mode.
BeamFileHeader decode_beam_header(std::span<const std::byte> bytes);
BeamFileHeader beam_header_for(const PartInfo& part);

// beam_<b>[i]_c<first>-<last>_s<first>-<last>.tabf
std::string beam_file_name(const PartInfo& part);

// Writes the header on construction and appends each block, flushing after
// each so bytes_delivered() counts only what the file system accepted.  A
// failed write (disk full) is remembered and later blocks are skipped.
class BeamFileSink : public BeamSink {
  public:
    BeamFileSink(const std::string& path, const PartInfo& part);
    void write(const OutputBlock& block) override;
    void finish() override;

    std::uint64_t bytes_delivered() const override { return bytes_; }
    bool failed() const override { return failed_; }
    const std::string& path() const { return path_; }

  private:
    std::string path_;
    std::ofstream out_;
    std::size_t floats_per_block_;
    std::uint64_t bytes_ = 0;
    bool failed_ = false;
};

struct BeamFile {
    BeamFileHeader header;
    std::vector<float> data;

    std::size_t n_times() const;
    float at(std::size_t time, std::size_t channel, std::size_t component) const {
        return data[(time * header.n_channels() + channel) * header.n_components + component];
    }
};

// MalformedInputError when truncated or the payload is not whole samples.
BeamFile read_beam_file(const std::string& path);

} // namespace bf::io
