#pragma once

#include <span>
#include <vector>

#include "bf/fft.hpp"
#include "bf/kernels.hpp"
#include "bf/types.hpp"

namespace bf {

// Per-subchannel phase factors that undo the dispersion inside one channel.
// factors[k] belongs to the FFT bin k of an n_fft-point transform, offset
// df = k * width / n_fft from the channel centre (bins at and above n_fft/2
// wrap to negative offsets).
struct ChirpTable {
    double dm = 0.0;
    double channel_center = 0.0;  // Hz
    double channel_width = 0.0;   // Hz
    int n_fft = 0;
    std::vector<cf64> factors;     // |factor| = 1, factors[0] = 1
    std::vector<cf32> factors_f32;

    double offset(int k) const;
};

// factor(df) = exp(-2 pi i K dm df^2 / (f0^2 (f0 + df))), K in s Hz^2, the
// inverse of the dispersion stationgen applies.  DomainError for dm < 0 or
// channel_center <= channel_width, ShapeError for n_fft that is not a power
// of two.
ChirpTable chirp_weights(double dm, double channel_center, double channel_width, int n_fft = 4096);

// Blockwise coherent dedispersion of one channel, reusable across threads.
class Dedisperser {
  public:
    explicit Dedisperser(int n_fft);
    int n_fft() const { return n_fft_; }

    // In place; data length must be a multiple of n_fft (ShapeError).
    void apply(std::span<cf32> data, const ChirpTable& chirp,
               kernels::Isa isa = kernels::detect_isa()) const;

    // Any length: the last partial block is zero-padded to n_fft and the
    // padding is dropped again afterwards.
    void apply_padded(std::span<cf32> data, const ChirpTable& chirp,
                      kernels::Isa isa = kernels::detect_isa()) const;

    // Both polarisations of a [time] series of samples, padded as above.
    void apply_padded(std::span<DualPolSample> data, const ChirpTable& chirp,
                      kernels::Isa isa = kernels::detect_isa()) const;

  private:
    void block(cf32* io, const ChirpTable& chirp, kernels::Isa isa) const;

    int n_fft_;
    FftPlan<float> forward_;
    FftPlan<float> inverse_;
};

std::vector<cf32> dedisperse_channel(std::span<const cf32> data, const ChirpTable& chirp);

} // namespace bf
