// Times the beam-former and Stokes kernels per ISA, and the whole reference
// beam former against the blocked one.  Informational.
#include <chrono>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "bf/beamform.hpp"
#include "bf/kernels.hpp"

using namespace bf;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// One subband block of S stations into B beams: reference against blocked.
void bench_form_beams(int S, int B) {
    const int C = 16, T = 3056;
    std::mt19937_64 rng(11);
    std::normal_distribution<float> n(0.0f, 30.0f);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<ChannelizedChunk> chunks(S);
    for (int s = 0; s < S; ++s) {
        auto& c = chunks[s];
        c.station = static_cast<std::uint32_t>(s);
        c.n_channels = C;
        c.n_times = T;
        c.channel_width = kSubbandRate / C;
        c.data.resize(std::size_t(C) * T);
        for (auto& v : c.data)
            v = {{n(rng), n(rng)}, {n(rng), n(rng)}};
    }
    StationLayout layout;
    for (int s = 0; s < S; ++s)
        layout.positions.push_back({3000 * u(rng), 3000 * u(rng), 0.0});
    std::vector<Vec3> dirs;
    for (int b = 0; b < B; ++b)
        dirs.push_back(normalized(Vec3{0.05 * u(rng), 0.05 * u(rng), 1.0}));
    std::vector<double> freqs(C);
    for (int c = 0; c < C; ++c)
        freqs[c] = 150e6 + c * kSubbandRate / C;
    const auto w = compute_weights(layout, dirs, freqs);

    // Complex MACs per polarisation sample, 8 flops each, two polarisations.
    const double flops = 8.0 * 2 * S * B * double(C) * T;
    const int reps = 3;
    auto t0 = Clock::now();
    for (int r = 0; r < reps; ++r)
        form_beams_reference(chunks, w);
    const double ref = seconds_since(t0) / reps;
    std::printf("form_beams %dx%d  reference        %8.1f ms  %6.2f GFLOP/s\n", S, B, ref * 1e3,
                flops / ref / 1e9);
    for (auto isa : {kernels::Isa::Scalar, kernels::Isa::Avx2}) {
        if (!kernels::isa_supported(isa))
            continue;
        t0 = Clock::now();
        for (int r = 0; r < reps; ++r)
            form_beams_blocked(chunks, w, {6, 128, 3}, isa);
        const double blk = seconds_since(t0) / reps;
        std::printf("form_beams %dx%d  blocked %-7s  %8.1f ms  %6.2f GFLOP/s  %.1fx\n", S, B,
                    std::string(kernels::isa_name(isa)).c_str(), blk * 1e3, flops / blk / 1e9, ref / blk);
    }
}

} // namespace

int main() {
    std::mt19937 rng(7);
    std::normal_distribution<float> n(0.0f, 1.0f);
    const std::size_t T = 1 << 14;
    std::vector<std::vector<cf32>> in(6, std::vector<cf32>(2 * T));
    std::vector<std::vector<cf32>> out(3, std::vector<cf32>(2 * T));
    for (auto& v : in)
        for (auto& x : v)
            x = {n(rng), n(rng)};
    std::vector<cf32> w(18);
    for (auto& x : w)
        x = {n(rng), n(rng)};
    const cf32* ip[6];
    cf32* op[3];
    for (int i = 0; i < 6; ++i)
        ip[i] = in[i].data();
    for (int j = 0; j < 3; ++j)
        op[j] = out[j].data();
    std::vector<DualPolSample> samples(T);
    for (auto& s : samples)
        s = {{n(rng), n(rng)}, {n(rng), n(rng)}};
    std::vector<float> stokes(4 * T);

    for (auto isa : {kernels::Isa::Scalar, kernels::Isa::Avx2}) {
        if (!kernels::isa_supported(isa))
            continue;
        const int reps = 200;
        auto t0 = Clock::now();
        for (int r = 0; r < reps; ++r)
            kernels::beamform_block(isa, {ip, 6, op, 3, w.data(), 2 * T});
        const double bf = std::chrono::duration<double>(Clock::now() - t0).count();
        t0 = Clock::now();
        for (int r = 0; r < reps; ++r)
            kernels::stokes_iquv(isa, samples.data(), stokes.data(), T);
        const double st = std::chrono::duration<double>(Clock::now() - t0).count();
        // 6 x 3 complex MACs = 8 flops each, per complex sample.
        const double gflops = 8.0 * 18 * 2 * T * reps / bf / 1e9;
        std::printf("%-6s beamform 6x3  %.2f GFLOP/s   stokes iquv %.1f Msamples/s\n",
                    std::string(kernels::isa_name(isa)).c_str(), gflops, T * reps / st / 1e6);
    }
    bench_form_beams(32, 16);
    bench_form_beams(64, 24);
    return 0;
}
