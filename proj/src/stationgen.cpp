#include "bf/stationgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "bf/errors.hpp"
#include "bf/samples.hpp"

namespace bf {

double dispersion_delay(double dm, double freq_mhz) {
    if (!(freq_mhz > 0))
        throw DomainError("dispersion delay needs a positive frequency");
    if (!(dm >= 0))
        throw DomainError("dispersion measure must be non-negative");
    return kDispersionConstant * dm / (freq_mhz * freq_mhz);
}

double geometric_delay(const Vec3& position, const Vec3& direction) {
    if (!is_unit(direction))
        throw DomainError("direction is not a unit vector");
    return dot(position, direction) / kSpeedOfLight;
}

void StationLayout::validate() const {
    if (positions.empty())
        throw ConfigError("station layout has no stations");
    for (const auto& p : positions)
        for (double v : p)
            if (!std::isfinite(v))
                throw ConfigError("station position is not finite");
}

void PulsarScenario::validate() const {
    if (!(period > 0))
        throw ConfigError("pulsar.period: must be positive");
    if (!(duty_cycle > 0 && duty_cycle < 1))
        throw ConfigError("pulsar.duty_cycle: must lie in (0, 1)");
    if (!(dm >= 0))
        throw ConfigError("pulsar.dm: must be >= 0");
    if (!(noise_sigma >= 0))
        throw ConfigError("pulsar.noise_sigma: must be >= 0");
    if (!is_unit(source_direction))
        throw ConfigError("pulsar.direction: must be a unit vector");
    if (center_frequency < 0)
        throw ConfigError("pulsar.center_frequency: must be >= 0");
}

namespace {

constexpr std::int64_t kNoiseSegment = 4096;
constexpr std::int64_t kEdgeMargin = 4096;

std::uint64_t mix(std::uint64_t x) {
    // splitmix64 finalizer; only used to derive independent engine seeds.
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = 0x243F6A8885A308D3ull;
    for (auto p : parts)
        h = mix(h ^ p);
    return h;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0)))
        --q;
    return q;
}

// Smallest n >= want whose prime factors are all <= 7.
std::size_t smooth_size(std::size_t want) {
    for (std::size_t n = want;; ++n) {
        std::size_t m = n;
        for (std::size_t p : {2, 3, 5, 7})
            while (m % p == 0)
                m /= p;
        if (m == 1)
            return n;
    }
}

// Unit-power complex Gaussian source noise for absolute samples
// [first, first + out.size()), one polarisation of one subband.
void source_noise(std::uint64_t seed, int subband, int pol, std::int64_t first,
                  std::span<cf64> out) {
    const std::int64_t last = first + static_cast<std::int64_t>(out.size());
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    for (std::int64_t seg = floor_div(first, kNoiseSegment); seg * kNoiseSegment < last; ++seg) {
        std::mt19937_64 rng(derive_seed({seed, 0x50u, std::uint64_t(subband), std::uint64_t(pol),
                                         std::uint64_t(seg)}));
        normal.reset();
        const std::int64_t seg0 = seg * kNoiseSegment;
        for (std::int64_t m = seg0; m < seg0 + kNoiseSegment; ++m) {
            const double re = normal(rng);
            const double im = normal(rng);
            if (m >= first && m < last)
                out[std::size_t(m - first)] = cf64(re, im);
        }
    }
}

} // namespace

StationGenerator::StationGenerator(PulsarScenario scenario, StationLayout layout,
                                   ObservationConfig config)
    : scenario_(std::move(scenario)), layout_(std::move(layout)), config_(std::move(config)) {
    scenario_.validate();
    layout_.validate();
    config_.validate();
    if (layout_.size() < config_.n_stations)
        throw ConfigError("station layout lists " + std::to_string(layout_.size()) +
                          " positions for " + std::to_string(config_.n_stations) + " stations");
}

StationGenerator::~StationGenerator() = default;

const FftPlan<double>& StationGenerator::plan(std::size_t n, FftDirection dir) const {
    std::lock_guard lock(plans_mutex_);
    auto& slot = plans_[{n, static_cast<int>(dir)}];
    if (!slot)
        slot = std::make_unique<FftPlan<double>>(n, dir);
    return *slot;
}

double StationGenerator::subband_delay(int station, int subband) const {
    double delay = -geometric_delay(layout_.positions.at(station), scenario_.source_direction);
    if (scenario_.dm > 0) {
        delay += kDispersionConstantHz * scenario_.dm /
                 (config_.subband_base(subband) * config_.subband_base(subband));
        if (scenario_.center_frequency > 0)
            delay -= kDispersionConstantHz * scenario_.dm /
                     (scenario_.center_frequency * scenario_.center_frequency);
    }
    return delay;
}

Chunk StationGenerator::generate_chunk(int station, int subband, int block) const {
    const double W = config_.subband_width;
    const double cw = config_.channel_width();
    const double f_base = config_.subband_base(subband);
    const double dm = scenario_.dm;
    const auto L = static_cast<std::int64_t>(config_.chunk_samples());
    const std::int64_t n0 = block * L;

    // Integer part of the delay is a sample shift (free of carrier phase,
    // since f_base is a multiple of W); the fraction and the in-subband
    // dispersion are applied as a frequency-domain phase.
    const double delay = subband_delay(station, subband);
    const auto q = static_cast<std::int64_t>(std::llround(delay * W));
    const double frac = delay - static_cast<double>(q) / W;

    double spread = 0.0;
    if (dm > 0) {
        const double lo = f_base - cw / 2, hi = f_base + W - cw / 2;
        const double d0 = kDispersionConstantHz * dm / (f_base * f_base);
        spread = std::max(kDispersionConstantHz * dm / (lo * lo) - d0,
                          d0 - kDispersionConstantHz * dm / (hi * hi));
    }
    // The band edge makes the delay filter ring with a 1/t tail; this much
    // margin keeps the wrapped-around tail below the integer rounding step.
    const auto pad = static_cast<std::int64_t>(std::ceil(spread * W)) + kEdgeMargin;
    const std::size_t M = smooth_size(std::size_t(L + 2 * pad));
    const std::int64_t m0 = n0 - q - pad; // absolute source index of window start

    std::vector<cf64> transfer(M);
    for (std::size_t j = 0; j < M; ++j) {
        double f_bb = static_cast<double>(j) * W / static_cast<double>(M);
        if (f_bb >= W - cw / 2)
            f_bb -= W;
        const double f = f_base + f_bb;
        double phase = -2.0 * std::numbers::pi * f * frac;
        if (dm > 0)
            phase += 2.0 * std::numbers::pi * kDispersionConstantHz * dm * f_bb * f_bb /
                     (f_base * f_base * f);
        transfer[j] = std::polar(1.0 / static_cast<double>(M), phase);
    }

    const auto& fwd = plan(M, FftDirection::Forward);
    const auto& bwd = plan(M, FftDirection::Backward);
    std::vector<cf64> window(M), spectrum(M), pol[2];
    const double t_sample = 1.0 / W;
    for (int p = 0; p < 2; ++p) {
        source_noise(scenario_.seed, subband, p, m0, window);
        for (std::size_t i = 0; i < M; ++i) {
            const double t = static_cast<double>(m0 + static_cast<std::int64_t>(i)) * t_sample;
            double phase = std::fmod(t - scenario_.epoch, scenario_.period);
            if (phase < 0)
                phase += scenario_.period;
            const bool on = phase < scenario_.duty_cycle * scenario_.period;
            window[i] *= on ? scenario_.amplitude : 0.0;
        }
        fwd.execute(window.data(), spectrum.data());
        for (std::size_t j = 0; j < M; ++j)
            spectrum[j] *= transfer[j];
        pol[p].resize(M);
        bwd.execute(spectrum.data(), pol[p].data());
    }

    Chunk chunk;
    chunk.station = static_cast<std::uint32_t>(station);
    chunk.subband = static_cast<std::uint32_t>(subband);
    chunk.block = static_cast<std::uint32_t>(block);
    chunk.sample_rate = W;
    chunk.start_time = static_cast<double>(n0) / W;
    chunk.samples.resize(std::size_t(L));

    std::mt19937_64 rng(derive_seed({scenario_.seed, 0x5Au, std::uint64_t(station),
                                     std::uint64_t(subband), std::uint64_t(block)}));
    std::normal_distribution<double> noise(0.0, scenario_.noise_sigma > 0 ? scenario_.noise_sigma : 1.0);
    const bool noisy = scenario_.noise_sigma > 0;
    for (std::int64_t i = 0; i < L; ++i) {
        cf64 x = pol[0][std::size_t(pad + i)];
        cf64 y = pol[1][std::size_t(pad + i)];
        if (noisy) {
            const double a = noise(rng), b = noise(rng), c = noise(rng), d = noise(rng);
            x += cf64(a, b);
            y += cf64(c, d);
        }
        chunk.samples[std::size_t(i)] = quantize(x, y);
    }
    return chunk;
}

std::vector<Chunk> generate_station_stream(const PulsarScenario& scenario,
                                           const StationLayout& layout, int station,
                                           const ObservationConfig& config, double duration) {
    const StationGenerator gen(scenario, layout, config);
    const double blocks = duration / config.block_duration();
    if (!(blocks >= 0) || std::abs(blocks - std::round(blocks)) > 1e-6)
        throw ConfigError("duration must be a whole number of blocks (" +
                          std::to_string(config.block_duration()) + " s each)");
    const int n_blocks = static_cast<int>(std::round(blocks));
    std::vector<Chunk> out;
    out.reserve(std::size_t(n_blocks) * config.n_subbands);
    for (int b = 0; b < n_blocks; ++b)
        for (int s = 0; s < config.n_subbands; ++s)
            out.push_back(gen.generate_chunk(station, s, b));
    return out;
}

} // namespace bf
