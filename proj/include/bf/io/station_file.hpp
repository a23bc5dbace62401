#pragma once

#include <cstdint>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "bf/config.hpp"
#include "bf/pipeline.hpp"

namespace bf::io {

// station_<s>.raw: a 32-byte little-endian header followed by chunks in
// [block][subband] order, each chunk_samples RawSamples.
//
//   offset  size  field
//        0     4  magic "BFST"
//        4     2  version (1)
//        6     2  station
//        8     4  n_subbands
//       12     4  samples_per_chunk
//       16     4  n_blocks
//       20     8  sample_rate (f64)
//       28     4  reserved
constexpr std::size_t kStationHeaderBytes = 32;

struct StationFileHeader {
    std::uint16_t station = 0;
    std::uint32_t n_subbands = 0;
    std::uint32_t samples_per_chunk = 0;
    std::uint32_t n_blocks = 0;
    double sample_rate = kSubbandRate;
};

std::string station_file_name(int station);

// Writes header + chunks; chunks must be exactly n_blocks x n_subbands of
// this station in [block][subband] order (ShapeError otherwise).
void write_station_file(const std::string& path, const StationFileHeader& header,
                        const std::vector<Chunk>& chunks);

StationFileHeader read_station_header(const std::string& path);

// Reads station_<s>.raw for every station of `config` from `directory`,
// interleaving them block by block.  MalformedInputError when a file is
// missing, truncated or disagrees with the configuration.
class StationFileSource : public ChunkSource {
  public:
    StationFileSource(const std::string& directory, const ObservationConfig& config);
    std::optional<Chunk> next() override;
    int n_blocks() const { return n_blocks_; }

  private:
    ObservationConfig config_;
    std::vector<std::unique_ptr<std::ifstream>> files_;
    std::vector<std::string> paths_;
    int n_blocks_ = 0;
    std::int64_t pos_ = 0;
};

} // namespace bf::io
