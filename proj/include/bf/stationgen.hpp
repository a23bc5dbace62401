#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "bf/config.hpp"
#include "bf/fft.hpp"
#include "bf/types.hpp"

namespace bf {

// Cold-plasma dispersion constant, s MHz^2 pc^-1 cm^3.  The generator and the
// dedispersion chirp both use it.
constexpr double kDispersionConstant = 4.148808e3;
// Same constant for frequencies in Hz: s Hz^2 pc^-1 cm^3.
constexpr double kDispersionConstantHz = kDispersionConstant * 1e12;

// Arrival delay relative to infinite frequency, seconds.  freq in MHz.
// Throws DomainError for freq <= 0 or dm < 0.
double dispersion_delay(double dm, double freq_mhz);

// (position . direction) / c, seconds: how much earlier a station at
// `position` sees a wavefront from `direction` than the origin does.
// Throws DomainError when direction is not a unit vector (1e-9).
double geometric_delay(const Vec3& position, const Vec3& direction);

struct StationLayout {
    std::vector<Vec3> positions; // metres, Earth-fixed

    int size() const { return static_cast<int>(positions.size()); }
    void validate() const;
};

struct PulsarScenario {
    double period = 1.88e-3;     // s
    double duty_cycle = 0.05;
    double amplitude = 1000.0;   // rms of the complex source signal while on, per polarisation
    double dm = 0.0;             // pc cm^-3
    Vec3 source_direction{0.0, 0.0, 1.0};
    double center_frequency = 0; // Hz; pulses at this frequency arrive at `epoch`. 0 = infinite.
    double epoch = 0.0;          // s
    double noise_sigma = 0.0;    // receiver noise std-dev per real component
    std::uint64_t seed = 1;

    void validate() const;
};

// Synthetic station data: a rectangular pulse train (width duty_cycle x
// period) gating complex Gaussian noise common to all stations, dispersed
// exactly in the frequency domain and delayed per station geometry, plus
// independent receiver noise, rounded to 16-bit integers.
//
// generate_chunk() is a pure function of (scenario, station, subband, block):
// the source noise is seeded per fixed-size segment of absolute sample index,
// so adjacent blocks join seamlessly.  Safe to call concurrently.
class StationGenerator {
  public:
    StationGenerator(PulsarScenario scenario, StationLayout layout, ObservationConfig config);
    ~StationGenerator();

    Chunk generate_chunk(int station, int subband, int block) const;

    // Total delay (seconds) applied to subband data of `station` relative to
    // the emitted signal, at the subband's base frequency.
    double subband_delay(int station, int subband) const;

    const ObservationConfig& config() const { return config_; }
    const PulsarScenario& scenario() const { return scenario_; }
    const StationLayout& layout() const { return layout_; }

  private:
    const FftPlan<double>& plan(std::size_t n, FftDirection dir) const;

    PulsarScenario scenario_;
    StationLayout layout_;
    ObservationConfig config_;
    mutable std::mutex plans_mutex_;
    mutable std::map<std::pair<std::size_t, int>, std::unique_ptr<FftPlan<double>>> plans_;
};

// All chunks of one station for `duration` seconds, ordered by block then
// subband.  duration must be a whole number of blocks (ConfigError otherwise).
std::vector<Chunk> generate_station_stream(const PulsarScenario& scenario,
                                           const StationLayout& layout, int station,
                                           const ObservationConfig& config, double duration);

} // namespace bf
