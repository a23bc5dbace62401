#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "bf/channelizer.hpp"
#include "bf/kernels.hpp"
#include "bf/stationgen.hpp"
#include "bf/types.hpp"

namespace bf {

struct DelaySplit {
    std::int64_t shift = 0;  // whole samples
    double residual = 0.0;   // seconds, |residual| <= 0.5 / sample_rate
};

// shift = round-half-even(delay * rate); residual = delay - shift / rate.
DelaySplit split_delay(double delay, double sample_rate);

// Delay compensation for one subband.  Station s is delayed by
// sample_shift[s] whole samples (applied to subband data before
// channelization) and its channel c is multiplied by weight(s, c, b) when
// forming beam b.  A weight exp(-2 pi i f tau) delays a signal by tau.
struct BeamWeightSet {
    int n_stations = 0;
    int n_channels = 0;
    int n_beams = 0;
    std::vector<std::int64_t> sample_shift;  // [station], all >= 0
    std::vector<cf64> weights;               // [station][channel][beam], |w| = 1
    std::vector<cf32> weights_f32;           // same, single precision for the kernels

    std::size_t index(int s, int c, int b) const {
        return (std::size_t(s) * n_channels + c) * n_beams + b;
    }
    cf64 weight(int s, int c, int b) const { return weights[index(s, c, b)]; }
    std::int64_t max_shift() const;
};

// Coarse shifts come from the geometric delay toward `reference` (defaults to
// the first beam direction), offset so the smallest shift is 0.  The phase
// weight of (s, c, b) compensates the rest of beam b's delay at station s:
//   exp(-2 pi i f_c (delay(s, b) - shift_ref(s) / rate)).
// With one beam that residual is exactly split_delay()'s.  Throws
// DomainError for a non-unit direction.
BeamWeightSet compute_weights(const StationLayout& layout, std::span<const Vec3> beam_directions,
                              std::span<const double> channel_frequencies,
                              double sample_rate = kSubbandRate,
                              std::optional<Vec3> reference = std::nullopt);

// One tied-array (or incoherent) beam for one subband x block, stored
// [channel][time][component]: 4 floats (X re, X im, Y re, Y im) for voltages,
// 4 (I, Q, U, V) for full Stokes, 1 for Stokes I.
struct BeamChunk {
    std::uint32_t beam = 0;
    std::uint32_t subband = 0;
    std::uint32_t block = 0;
    OutputMode representation = OutputMode::ComplexVoltages;
    int n_channels = 0;
    int n_times = 0;
    bool incoherent = false;
    bool substituted = false;  // built from zero-filled station data
    std::vector<float> data;

    int n_components() const { return components_per_sample(representation); }
    float at(int channel, int time, int component) const {
        return data[(std::size_t(channel) * n_times + time) * n_components() + component];
    }
};

struct BlockSizes {
    int stations = 6;
    int times = 128;
    int beams = 3;
};

// beam[b][c][t] = sum_s weight(s, c, b) * station[s][c][t], X and Y alike,
// summed in station order.  chunks[s] must hold station s; a missing or
// mismatched station throws StalenessError, a shape mismatch ShapeError.
std::vector<BeamChunk> form_beams_reference(std::span<const ChannelizedChunk> chunks,
                                            const BeamWeightSet& weights);

// Same sums, tiled FOR channel / station STEP bs / time STEP bt / beam STEP bb
// around a 6-station x 3-beam register kernel.  With Isa::Scalar the result
// equals form_beams_reference bit-for-bit for any block sizes.  Zero block
// sizes throw ConfigError.
std::vector<BeamChunk> form_beams_blocked(std::span<const ChannelizedChunk> chunks,
                                          const BeamWeightSet& weights,
                                          BlockSizes blocks = {},
                                          kernels::Isa isa = kernels::detect_isa());

// Raw form used by the pipeline: stations[s] points at station s's
// [channel][time] samples, out receives [beam][channel][time].
void form_beams_into(std::span<const DualPolSample* const> stations, int n_channels, int n_times,
                     const BeamWeightSet& weights, BlockSizes blocks, kernels::Isa isa,
                     std::span<DualPolSample> out);

// Unweighted sum of per-station Stokes parameters (mode StokesI or
// StokesIQUV); powers add, phases are ignored.
BeamChunk form_incoherent_beam(std::span<const ChannelizedChunk> chunks,
                               OutputMode mode = OutputMode::StokesI,
                               kernels::Isa isa = kernels::detect_isa());

// Voltages of one beam ([channel][time]) as a BeamChunk.
BeamChunk voltages_to_beam_chunk(std::span<const DualPolSample> voltages, int n_channels,
                                 int n_times);

} // namespace bf
