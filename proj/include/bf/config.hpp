#pragma once

#include <cstdint>
#include <vector>

#include "bf/types.hpp"

namespace bf {

// Chunk length: rate x 0.25 s rounded to the nearest multiple of
// 16 x n_channels, so every Stokes I integration factor up to 16 divides the
// channelized block.
int default_samples_per_chunk(double sample_rate, int n_channels);

struct ObservationConfig {
    int n_stations = 1;
    int n_subbands = 248;
    double subband_width = kSubbandRate;        // Hz; also the subband sample rate
    double base_frequency = 768 * kSubbandRate; // Hz, centre of channel 0 of subband 0
    int subband_stride = 1;                     // subband i sits at base + i*stride*width
    int n_channels = 16;
    OutputMode mode = OutputMode::ComplexVoltages;
    int integration_factor = 1;
    std::vector<Vec3> beam_directions;
    bool dedisperse = false;
    double dm = 0.0;                            // pc cm^-3
    int dedispersion_fft_size = 4096;
    bool include_incoherent = false;
    int samples_per_chunk = 0;                  // 0 = default_samples_per_chunk()
    int n_blocks = 4;

    int n_beams() const { return static_cast<int>(beam_directions.size()); }
    // Number of output beam streams, counting the incoherent beam.
    int n_output_beams() const { return n_beams() + (include_incoherent ? 1 : 0); }
    int chunk_samples() const;
    int channel_samples() const { return chunk_samples() / n_channels; }
    double channel_width() const { return subband_width / n_channels; }
    double block_duration() const { return chunk_samples() / subband_width; }
    double subband_base(int subband) const;
    double channel_center(int subband, int channel) const;
    std::vector<double> channel_centers(int subband) const;

    // Throws ConfigError naming the offending field.
    void validate() const;
};

// Mode used for the incoherent beam: Stokes I when the coherent beams are
// Stokes I, otherwise full Stokes.
OutputMode incoherent_mode(const ObservationConfig& cfg);

} // namespace bf
