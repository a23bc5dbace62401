#include "bf/config.hpp"

#include <cmath>
#include <string>

#include "bf/channelizer.hpp"
#include "bf/errors.hpp"

namespace bf {

std::string_view to_string(OutputMode mode) {
    switch (mode) {
    case OutputMode::ComplexVoltages: return "voltages";
    case OutputMode::StokesIQUV: return "iquv";
    case OutputMode::StokesI: return "i";
    }
    return "?";
}

OutputMode parse_output_mode(std::string_view text) {
    if (text == "voltages" || text == "complex_voltages" || text == "ComplexVoltages")
        return OutputMode::ComplexVoltages;
    if (text == "iquv" || text == "stokes_iquv" || text == "StokesIQUV")
        return OutputMode::StokesIQUV;
    if (text == "i" || text == "stokes_i" || text == "StokesI")
        return OutputMode::StokesI;
    throw ConfigError("unknown mode '" + std::string(text) + "' (voltages, iquv, i)");
}

int default_samples_per_chunk(double sample_rate, int n_channels) {
    const double quantum = 16.0 * n_channels;
    const double blocks = std::max(1.0, std::round(sample_rate * kBlockDuration / quantum));
    return static_cast<int>(blocks * quantum);
}

int ObservationConfig::chunk_samples() const {
    return samples_per_chunk > 0 ? samples_per_chunk
                                 : default_samples_per_chunk(subband_width, n_channels);
}

double ObservationConfig::subband_base(int subband) const {
    return base_frequency + static_cast<double>(subband) * subband_stride * subband_width;
}

double ObservationConfig::channel_center(int subband, int channel) const {
    return channel_center_frequency(subband_base(subband), n_channels, channel, subband_width);
}

std::vector<double> ObservationConfig::channel_centers(int subband) const {
    std::vector<double> f(n_channels);
    for (int c = 0; c < n_channels; ++c)
        f[c] = channel_center(subband, c);
    return f;
}

namespace {

bool is_pow2(long v) { return v > 0 && (v & (v - 1)) == 0; }

[[noreturn]] void fail(const std::string& field, const std::string& why) {
    throw ConfigError("observation." + field + ": " + why);
}

} // namespace

void ObservationConfig::validate() const {
    if (n_stations < 1 || n_stations > kMaxStations)
        fail("n_stations", "must be in 1..64");
    if (n_subbands < 1 || n_subbands > kMaxSubbands)
        fail("n_subbands", "must be in 1..248");
    if (!(subband_width > 0))
        fail("subband_width", "must be positive");
    if (subband_stride < 1)
        fail("subband_stride", "must be >= 1");
    if (!(base_frequency > 0))
        fail("base_frequency", "must be positive");
    {
        const double k = base_frequency / subband_width;
        if (std::abs(k - std::round(k)) > 1e-9)
            fail("base_frequency", "must be an integer multiple of subband_width");
    }
    if (!is_pow2(n_channels))
        fail("n_channels", "must be a power of two");
    if (!is_pow2(integration_factor))
        fail("integration_factor", "must be a power of two (1, 2, 4, 8, 16, ...)");
    if (integration_factor != 1 && mode != OutputMode::StokesI)
        fail("integration_factor", "integration is only offered for Stokes I");
    const int len = chunk_samples();
    if (len <= 0 || len % (16 * n_channels) != 0)
        fail("samples_per_chunk", "must be a positive multiple of 16 x n_channels");
    if ((len / n_channels) % integration_factor != 0)
        fail("integration_factor", "must divide the channel samples per chunk");
    for (std::size_t b = 0; b < beam_directions.size(); ++b)
        if (!is_unit(beam_directions[b]))
            fail("beams", "direction " + std::to_string(b) + " is not a unit vector");
    if (!(dm >= 0))
        fail("dm", "must be >= 0");
    if (dedisperse && !is_pow2(dedispersion_fft_size))
        fail("dedispersion_fft_size", "must be a power of two");
    if (n_blocks < 0)
        fail("n_blocks", "must be >= 0");
}

OutputMode incoherent_mode(const ObservationConfig& cfg) {
    return cfg.mode == OutputMode::StokesI ? OutputMode::StokesI : OutputMode::StokesIQUV;
}

} // namespace bf
