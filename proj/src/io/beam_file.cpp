#include "bf/io/beam_file.hpp"

#include <sstream>

#include "bf/endian.hpp"
#include "bf/errors.hpp"

namespace bf::io {

namespace {

constexpr char kMagic[4] = {'T', 'A', 'B', 'F'};

std::uint16_t mode_code(OutputMode m) {
    switch (m) {
    case OutputMode::ComplexVoltages: return 0;
    case OutputMode::StokesIQUV: return 1;
    case OutputMode::StokesI: return 2;
    }
    return 0xFFFF;
}

} // namespace

double BeamFileHeader::channel_frequency(std::uint32_t k) const {
    const std::uint32_t sb = k / channels_per_subband;
    const std::uint32_t c = k % channels_per_subband;
    const double subband_width = channels_per_subband * channel_width;
    return base_frequency + double(sb) * subband_stride * subband_width + c * channel_width;
}

std::array<std::byte, kBeamHeaderBytes> encode_beam_header(const BeamFileHeader& h) {
    std::array<std::byte, kBeamHeaderBytes> b{};
    for (int i = 0; i < 4; ++i)
        b[i] = static_cast<std::byte>(kMagic[i]);
    le::store<std::uint16_t>(&b[4], h.version);
    le::store<std::uint16_t>(&b[6], mode_code(h.mode));
    le::store<std::uint32_t>(&b[8], h.beam);
    le::store<std::uint32_t>(&b[12], h.channels_per_subband);
    le::store<std::uint32_t>(&b[16], h.first_subband);
    le::store<std::uint32_t>(&b[20], h.n_subbands);
    le::store<std::uint32_t>(&b[24], h.first_component);
    le::store<std::uint32_t>(&b[28], h.n_components);
    le::store<std::uint32_t>(&b[32], h.integration);
    le::store<std::uint32_t>(&b[36], h.flags);
    le::store<double>(&b[40], h.sample_rate);
    le::store<double>(&b[48], h.direction[0]);
    le::store<double>(&b[56], h.direction[1]);
    le::store<double>(&b[64], h.direction[2]);
    le::store<double>(&b[72], h.base_frequency);
    le::store<double>(&b[80], h.channel_width);
    le::store<std::uint32_t>(&b[88], h.subband_stride);
    le::store<std::uint32_t>(&b[92], 0);
    return b;
}

BeamFileHeader decode_beam_header(std::span<const std::byte> b) {
    if (b.size() < kBeamHeaderBytes)
        throw MalformedInputError("beam file shorter than its header");
    for (int i = 0; i < 4; ++i)
        if (b[i] != static_cast<std::byte>(kMagic[i]))
            throw MalformedInputError("not a beam file");
    BeamFileHeader h;
    h.version = le::load<std::uint16_t>(&b[4]);
    if (h.version != 1)
        throw MalformedInputError("unsupported beam file version " + std::to_string(h.version));
    switch (le::load<std::uint16_t>(&b[6])) {
    case 0: h.mode = OutputMode::ComplexVoltages; break;
    case 1: h.mode = OutputMode::StokesIQUV; break;
    case 2: h.mode = OutputMode::StokesI; break;
    default: throw MalformedInputError("unknown beam file mode");
    }
    h.beam = le::load<std::uint32_t>(&b[8]);
    h.channels_per_subband = le::load<std::uint32_t>(&b[12]);
    h.first_subband = le::load<std::uint32_t>(&b[16]);
    h.n_subbands = le::load<std::uint32_t>(&b[20]);
    h.first_component = le::load<std::uint32_t>(&b[24]);
    h.n_components = le::load<std::uint32_t>(&b[28]);
    h.integration = le::load<std::uint32_t>(&b[32]);
    h.flags = le::load<std::uint32_t>(&b[36]);
    h.sample_rate = le::load<double>(&b[40]);
    h.direction = {le::load<double>(&b[48]), le::load<double>(&b[56]), le::load<double>(&b[64])};
    h.base_frequency = le::load<double>(&b[72]);
    h.channel_width = le::load<double>(&b[80]);
    h.subband_stride = le::load<std::uint32_t>(&b[88]);
    return h;
}

BeamFileHeader beam_header_for(const PartInfo& part) {
    BeamFileHeader h;
    h.mode = part.layout.mode;
    h.beam = static_cast<std::uint32_t>(part.layout.beam);
    h.channels_per_subband = static_cast<std::uint32_t>(part.channels_per_subband);
    h.first_subband = static_cast<std::uint32_t>(part.layout.first_subband);
    h.n_subbands = static_cast<std::uint32_t>(part.layout.n_subbands);
    h.first_component = static_cast<std::uint32_t>(part.layout.first_component);
    h.n_components = static_cast<std::uint32_t>(part.layout.n_components);
    h.integration = static_cast<std::uint32_t>(part.integration);
    h.flags = (part.layout.incoherent ? kBeamFlagIncoherent : 0) |
              (part.dedispersed ? kBeamFlagDedispersed : 0);
    h.sample_rate = part.sample_rate;
    h.direction = part.direction;
    h.base_frequency = part.base_frequency;
    h.channel_width = part.channel_width;
    h.subband_stride = static_cast<std::uint32_t>(part.subband_stride);
    return h;
}

std::string beam_file_name(const PartInfo& part) {
    const auto& p = part.layout;
    std::ostringstream os;
    os << "beam_" << p.beam << (p.incoherent ? "i" : "") << "_c" << p.first_component << "-"
       << p.first_component + p.n_components - 1 << "_s" << p.first_subband << "-"
       << p.first_subband + p.n_subbands - 1 << ".tabf";
    return os.str();
}

BeamFileSink::BeamFileSink(const std::string& path, const PartInfo& part)
    : path_(path), out_(path, std::ios::binary), floats_per_block_(part.floats_per_block()) {
    if (!out_)
        throw Error(path + ": cannot create");
    const auto h = encode_beam_header(beam_header_for(part));
    out_.write(reinterpret_cast<const char*>(h.data()), std::streamsize(h.size()));
    if (!out_.flush())
        failed_ = true;
    else
        bytes_ += h.size();
}

void BeamFileSink::write(const OutputBlock& block) {
    if (failed_)
        return;
    if (block.data.size() != floats_per_block_)
        throw ShapeError(path_ + ": block of unexpected size");
    std::vector<std::byte> buf(block.data.size() * 4);
    for (std::size_t i = 0; i < block.data.size(); ++i)
        le::store<float>(&buf[4 * i], block.data[i]);
    out_.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
    if (!out_.flush())
        failed_ = true;
    else
        bytes_ += buf.size();
}

void BeamFileSink::finish() {
    if (!failed_ && !out_.flush())
        failed_ = true;
    out_.close();
}

std::size_t BeamFile::n_times() const {
    const std::size_t per = std::size_t(header.n_channels()) * header.n_components;
    return per ? data.size() / per : 0;
}

BeamFile read_beam_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw MalformedInputError(path + ": cannot open");
    in.seekg(0, std::ios::end);
    std::vector<std::byte> bytes(static_cast<std::size_t>(in.tellg()));
    in.seekg(0);
    in.read(reinterpret_cast<char*>(bytes.data()), std::streamsize(bytes.size()));
    BeamFile f;
    f.header = decode_beam_header(bytes);
    const std::size_t payload = bytes.size() - kBeamHeaderBytes;
    const std::size_t per = std::size_t(f.header.n_channels()) * f.header.n_components * 4;
    if (payload % 4 != 0 || (per && payload % per != 0))
        throw MalformedInputError(path + ": payload is not a whole number of samples");
    f.data.resize(payload / 4);
    for (std::size_t i = 0; i < f.data.size(); ++i)
        f.data[i] = le::load<float>(&bytes[kBeamHeaderBytes + 4 * i]);
    return f;
}

} // namespace bf::io
