#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace bf {

using cf32 = std::complex<float>;
using cf64 = std::complex<double>;
using Vec3 = std::array<double, 3>;

constexpr double kSpeedOfLight = 299792458.0;   // m/s
constexpr double kSubbandRate = 195312.5;       // Hz, critically sampled subband
constexpr double kBlockDuration = 0.25;         // s
constexpr int kMaxSubbands = 248;
constexpr int kMaxStations = 64;

// One time sample of both polarisations.  Layout is {x.re, x.im, y.re, y.im};
// kernels rely on it.
struct DualPolSample {
    cf32 x;
    cf32 y;

    friend bool operator==(const DualPolSample&, const DualPolSample&) = default;
};
static_assert(sizeof(DualPolSample) == 16);

// Station wire format: four little-endian int16 per sample.
struct RawSample {
    std::int16_t x_re = 0;
    std::int16_t x_im = 0;
    std::int16_t y_re = 0;
    std::int16_t y_im = 0;
};
constexpr std::size_t kRawSampleBytes = 8;

enum class OutputMode { ComplexVoltages, StokesIQUV, StokesI };

std::string_view to_string(OutputMode mode);
OutputMode parse_output_mode(std::string_view text);

// Floats per (channel, time) of a beam in the given representation.
constexpr int components_per_sample(OutputMode mode) {
    return mode == OutputMode::StokesI ? 1 : 4;
}

// All samples of one (station, subband) pair for one block.
struct Chunk {
    std::uint32_t station = 0;
    std::uint32_t subband = 0;
    std::uint32_t block = 0;
    double start_time = 0.0;    // s since observation start
    double sample_rate = kSubbandRate;
    std::vector<DualPolSample> samples;
};

} // namespace bf

namespace bf {

inline double dot(const Vec3& a, const Vec3& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

inline Vec3 normalized(const Vec3& a) {
    const double n = norm(a);
    return {a[0] / n, a[1] / n, a[2] / n};
}

// |v| == 1 within tol.
inline bool is_unit(const Vec3& v, double tol = 1e-9) { return std::abs(norm(v) - 1.0) <= tol; }

} // namespace bf
