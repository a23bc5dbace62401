#include "bf/dedisperse.hpp"

#include <algorithm>
#include <numbers>
#include <string>

#include "bf/errors.hpp"
#include "bf/stationgen.hpp"

namespace bf {

double ChirpTable::offset(int k) const {
    const int signed_k = k < n_fft / 2 ? k : k - n_fft;
    return signed_k * channel_width / n_fft;
}

ChirpTable chirp_weights(double dm, double channel_center, double channel_width, int n_fft) {
    if (!(dm >= 0.0))
        throw DomainError("dispersion measure must be non-negative");
    if (!(channel_width > 0.0) || !(channel_center > channel_width))
        throw DomainError("channel centre must exceed the channel width");
    if (n_fft < 1 || (n_fft & (n_fft - 1)) != 0)
        throw ShapeError("dedispersion FFT size must be a power of two");

    ChirpTable t;
    t.dm = dm;
    t.channel_center = channel_center;
    t.channel_width = channel_width;
    t.n_fft = n_fft;
    t.factors.resize(n_fft);
    t.factors_f32.resize(n_fft);
    const double f0 = channel_center;
    for (int k = 0; k < n_fft; ++k) {
        const double df = t.offset(k);
        const double phase =
            -2.0 * std::numbers::pi * kDispersionConstantHz * dm * df * df / (f0 * f0 * (f0 + df));
        t.factors[k] = std::polar(1.0, phase);
        t.factors_f32[k] = cf32(t.factors[k]);
    }
    return t;
}

Dedisperser::Dedisperser(int n_fft)
    : n_fft_(n_fft), forward_(n_fft, FftDirection::Forward), inverse_(n_fft, FftDirection::Backward) {
    if (n_fft < 1 || (n_fft & (n_fft - 1)) != 0)
        throw ShapeError("dedispersion FFT size must be a power of two");
}

void Dedisperser::block(cf32* io, const ChirpTable& chirp, kernels::Isa isa) const {
    thread_local std::vector<cf32> spectrum;
    spectrum.resize(std::size_t(n_fft_));
    forward_.execute(io, spectrum.data());
    kernels::complex_multiply(isa, spectrum.data(), chirp.factors_f32.data(), spectrum.size());
    inverse_.execute(spectrum.data(), io);
    const float scale = 1.0f / static_cast<float>(n_fft_);
    for (int k = 0; k < n_fft_; ++k)
        io[k] *= scale;
}

void Dedisperser::apply(std::span<cf32> data, const ChirpTable& chirp, kernels::Isa isa) const {
    if (chirp.n_fft != n_fft_)
        throw ShapeError("chirp table size does not match the dedisperser");
    if (data.size() % std::size_t(n_fft_) != 0)
        throw ShapeError("channel length " + std::to_string(data.size()) +
                         " is not a multiple of " + std::to_string(n_fft_));
    for (std::size_t off = 0; off < data.size(); off += n_fft_)
        block(data.data() + off, chirp, isa);
}

void Dedisperser::apply_padded(std::span<cf32> data, const ChirpTable& chirp,
                               kernels::Isa isa) const {
    if (chirp.n_fft != n_fft_)
        throw ShapeError("chirp table size does not match the dedisperser");
    const std::size_t whole = data.size() / n_fft_ * n_fft_;
    apply(data.first(whole), chirp, isa);
    if (whole == data.size())
        return;
    thread_local std::vector<cf32> tail;
    tail.assign(std::size_t(n_fft_), cf32{});
    std::copy(data.begin() + whole, data.end(), tail.begin());
    block(tail.data(), chirp, isa);
    std::copy_n(tail.begin(), data.size() - whole, data.begin() + whole);
}

void Dedisperser::apply_padded(std::span<DualPolSample> data, const ChirpTable& chirp,
                               kernels::Isa isa) const {
    thread_local std::vector<cf32> x, y;
    x.resize(data.size());
    y.resize(data.size());
    for (std::size_t k = 0; k < data.size(); ++k) {
        x[k] = data[k].x;
        y[k] = data[k].y;
    }
    apply_padded(std::span<cf32>(x), chirp, isa);
    apply_padded(std::span<cf32>(y), chirp, isa);
    for (std::size_t k = 0; k < data.size(); ++k)
        data[k] = {x[k], y[k]};
}

std::vector<cf32> dedisperse_channel(std::span<const cf32> data, const ChirpTable& chirp) {
    std::vector<cf32> out(data.begin(), data.end());
    Dedisperser(chirp.n_fft).apply(out, chirp);
    return out;
}

} // namespace bf
