#pragma once

// Shared set-up for tests that push generated station data through the
// delay compensation by hand (the pipeline does the same internally).

#include <random>
#include <vector>

#include "bf/beamform.hpp"
#include "bf/channelizer.hpp"
#include "bf/stationgen.hpp"
#include "oracles.hpp"

namespace testutil {

inline bf::StationLayout random_layout(int n, double radius, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-radius, radius);
    bf::StationLayout l;
    for (int s = 0; s < n; ++s)
        l.positions.push_back({u(rng), u(rng), 0.1 * u(rng)});
    return l;
}

// Station s delayed by shift[s] whole samples (block `block` borrowing the
// tail of block - 1), then channelized.
inline std::vector<bf::ChannelizedChunk> aligned_channels(const bf::StationGenerator& gen,
                                                          const bf::BeamWeightSet& w, int subband,
                                                          int block) {
    const auto& cfg = gen.config();
    const int L = cfg.chunk_samples();
    const bf::Channelizer ch(cfg.n_channels, L);
    std::vector<bf::ChannelizedChunk> out;
    for (int s = 0; s < w.n_stations; ++s) {
        const auto cur = gen.generate_chunk(s, subband, block);
        const auto prev = gen.generate_chunk(s, subband, block - 1);
        bf::Chunk shifted = cur;
        for (int n = 0; n < L; ++n) {
            const auto idx = n - w.sample_shift[s];
            shifted.samples[n] = idx >= 0 ? cur.samples[idx] : prev.samples[L + idx];
        }
        out.push_back(ch.channelize(shifted));
    }
    return out;
}

// Random station data and weights for kernel comparisons.
inline std::vector<bf::ChannelizedChunk> random_chunks(int S, int C, int T, std::uint64_t seed) {
    std::vector<bf::ChannelizedChunk> out;
    for (int s = 0; s < S; ++s) {
        bf::ChannelizedChunk c;
        c.station = static_cast<std::uint32_t>(s);
        c.subband = 2;
        c.block = 9;
        c.n_channels = C;
        c.n_times = T;
        c.channel_width = bf::kSubbandRate / C;
        c.data = oracle::random_samples(std::size_t(C) * T, seed * 1000 + s, 30.0f);
        out.push_back(std::move(c));
    }
    return out;
}

inline std::vector<bf::Vec3> random_directions(int n, double spread, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-spread, spread);
    std::vector<bf::Vec3> d;
    for (int i = 0; i < n; ++i)
        d.push_back(bf::normalized(bf::Vec3{u(rng), u(rng), 1.0}));
    return d;
}

inline std::vector<double> freqs(int C, double base = 150e6) {
    std::vector<double> f(C);
    for (int c = 0; c < C; ++c)
        f[c] = base + c * bf::kSubbandRate / C;
    return f;
}

inline bf::BeamWeightSet random_weights(int S, int C, int B, std::uint64_t seed) {
    const auto dirs = random_directions(B, 0.05, seed);
    return bf::compute_weights(random_layout(S, 3000, seed), dirs, freqs(C));
}

inline double mean_power(const bf::BeamChunk& b) {
    double p = 0;
    for (std::size_t k = 0; k < b.data.size(); ++k)
        p += double(b.data[k]) * b.data[k];
    return p / (double(b.n_channels) * b.n_times);
}

inline double mean_power(const bf::ChannelizedChunk& c) {
    double p = 0;
    for (const auto& v : c.data)
        p += std::norm(std::complex<double>(v.x)) + std::norm(std::complex<double>(v.y));
    return p / double(c.data.size());
}

} // namespace testutil
