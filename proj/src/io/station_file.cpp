#include "bf/io/station_file.hpp"

#include <algorithm>
#include <filesystem>

#include "bf/endian.hpp"
#include "bf/errors.hpp"
#include "bf/samples.hpp"

namespace bf::io {

namespace {

constexpr char kMagic[4] = {'B', 'F', 'S', 'T'};

std::vector<std::byte> encode_header(const StationFileHeader& h) {
    std::vector<std::byte> out(kStationHeaderBytes);
    for (int i = 0; i < 4; ++i)
        out[i] = static_cast<std::byte>(kMagic[i]);
    le::store<std::uint16_t>(&out[4], 1);
    le::store<std::uint16_t>(&out[6], h.station);
    le::store<std::uint32_t>(&out[8], h.n_subbands);
    le::store<std::uint32_t>(&out[12], h.samples_per_chunk);
    le::store<std::uint32_t>(&out[16], h.n_blocks);
    le::store<double>(&out[20], h.sample_rate);
    return out;
}

StationFileHeader decode_header(const std::vector<std::byte>& b, const std::string& path) {
    for (int i = 0; i < 4; ++i)
        if (b[i] != static_cast<std::byte>(kMagic[i]))
            throw MalformedInputError(path + ": not a station file");
    if (le::load<std::uint16_t>(&b[4]) != 1)
        throw MalformedInputError(path + ": unsupported station file version");
    StationFileHeader h;
    h.station = le::load<std::uint16_t>(&b[6]);
    h.n_subbands = le::load<std::uint32_t>(&b[8]);
    h.samples_per_chunk = le::load<std::uint32_t>(&b[12]);
    h.n_blocks = le::load<std::uint32_t>(&b[16]);
    h.sample_rate = le::load<double>(&b[20]);
    return h;
}

StationFileHeader read_header(std::istream& in, const std::string& path) {
    std::vector<std::byte> b(kStationHeaderBytes);
    if (!in.read(reinterpret_cast<char*>(b.data()), std::streamsize(b.size())))
        throw MalformedInputError(path + ": truncated header");
    return decode_header(b, path);
}

} // namespace

std::string station_file_name(int station) { return "station_" + std::to_string(station) + ".raw"; }

void write_station_file(const std::string& path, const StationFileHeader& header,
                        const std::vector<Chunk>& chunks) {
    if (chunks.size() != std::size_t(header.n_blocks) * header.n_subbands)
        throw ShapeError("station file needs n_blocks x n_subbands chunks");
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(path + ": cannot create");
    const auto h = encode_header(header);
    out.write(reinterpret_cast<const char*>(h.data()), std::streamsize(h.size()));
    std::vector<std::byte> buf;
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        const Chunk& c = chunks[i];
        if (c.station != header.station || c.block != i / header.n_subbands ||
            c.subband != i % header.n_subbands || c.samples.size() != header.samples_per_chunk)
            throw ShapeError("station file chunks out of order or mis-sized");
        buf.clear();
        encode_samples_into(c.samples, buf);
        out.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
    }
    if (!out.flush())
        throw Error(path + ": write failed");
}

StationFileHeader read_station_header(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw MalformedInputError(path + ": cannot open");
    return read_header(in, path);
}

StationFileSource::StationFileSource(const std::string& directory, const ObservationConfig& config)
    : config_(config) {
    config_.validate();
    n_blocks_ = INT32_MAX;
    for (int s = 0; s < config_.n_stations; ++s) {
        const std::string path = (std::filesystem::path(directory) / station_file_name(s)).string();
        auto in = std::make_unique<std::ifstream>(path, std::ios::binary);
        if (!*in)
            throw MalformedInputError(path + ": cannot open");
        const auto h = read_header(*in, path);
        if (h.station != s || h.n_subbands != std::uint32_t(config_.n_subbands) ||
            h.samples_per_chunk != std::uint32_t(config_.chunk_samples()))
            throw MalformedInputError(path + ": header does not match the configuration");
        const auto expected = kStationHeaderBytes + std::uintmax_t(h.n_blocks) * h.n_subbands *
                                                        h.samples_per_chunk * kRawSampleBytes;
        if (std::filesystem::file_size(path) < expected)
            throw MalformedInputError(path + ": truncated (header promises " +
                                      std::to_string(h.n_blocks) + " blocks)");
        n_blocks_ = std::min<int>(n_blocks_, static_cast<int>(h.n_blocks));
        files_.push_back(std::move(in));
        paths_.push_back(path);
    }
    if (files_.empty())
        n_blocks_ = 0;
}

std::optional<Chunk> StationFileSource::next() {
    const std::int64_t per_block = std::int64_t(config_.n_subbands) * config_.n_stations;
    if (pos_ >= per_block * n_blocks_)
        return std::nullopt;
    Chunk c;
    c.block = static_cast<std::uint32_t>(pos_ / per_block);
    c.subband = static_cast<std::uint32_t>(pos_ % per_block / config_.n_stations);
    c.station = static_cast<std::uint32_t>(pos_ % config_.n_stations);
    c.sample_rate = config_.subband_width;
    c.start_time = c.block * config_.block_duration();
    ++pos_;
    std::vector<std::byte> raw(std::size_t(config_.chunk_samples()) * kRawSampleBytes);
    if (!files_[c.station]->read(reinterpret_cast<char*>(raw.data()), std::streamsize(raw.size())))
        throw MalformedInputError(paths_[c.station] + ": truncated");
    c.samples = decode_samples(raw);
    return c;
}

} // namespace bf::io
