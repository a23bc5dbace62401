#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bf/fft.hpp"
#include "bf/types.hpp"

namespace bf {

// One subband chunk split into narrow channels, stored [channel][time].
struct ChannelizedChunk {
    std::uint32_t station = 0;
    std::uint32_t subband = 0;
    std::uint32_t block = 0;
    int n_channels = 0;
    int n_times = 0;
    double channel_width = 0.0;
    std::vector<DualPolSample> data;

    DualPolSample& at(int channel, int time) { return data[std::size_t(channel) * n_times + time]; }
    const DualPolSample& at(int channel, int time) const {
        return data[std::size_t(channel) * n_times + time];
    }
    std::span<DualPolSample> channel(int c) {
        return {data.data() + std::size_t(c) * n_times, std::size_t(n_times)};
    }
    std::span<const DualPolSample> channel(int c) const {
        return {data.data() + std::size_t(c) * n_times, std::size_t(n_times)};
    }
};

// Channel c is DFT bin c with no FFT shift: its centre sits at
// subband_base + c * width / n_channels, so channel 0 straddles the subband
// base and bins above n/2 are not folded to negative offsets.  Throws
// RangeError for channel outside [0, n_channels).
double channel_center_frequency(double subband_base, int n_channels, int channel,
                                double subband_width = kSubbandRate);

// Block FFT channelizer: each run of n_channels consecutive samples becomes
// one time sample per channel, equal to the unnormalized forward DFT of the
// run (X and Y independently).  Reusable and safe to share between threads.
class Channelizer {
  public:
    Channelizer(int n_channels, int n_samples);

    int n_channels() const { return n_channels_; }
    int n_samples() const { return n_samples_; }
    int n_times() const { return n_samples_ / n_channels_; }

    // Throws ShapeError when chunk length differs from n_samples.
    ChannelizedChunk channelize(const Chunk& chunk) const;

    // in: n_samples time samples; out: n_channels x n_times, [channel][time].
    void channelize(std::span<const DualPolSample> in, std::span<DualPolSample> out) const;

  private:
    int n_channels_;
    int n_samples_;
    FftPlan<float> plan_;
};

// Convenience wrapper building a one-off Channelizer.  Throws ShapeError when
// n_channels is not a power of two or does not divide the chunk length.
ChannelizedChunk channelize(const Chunk& chunk, int n_channels);

} // namespace bf
