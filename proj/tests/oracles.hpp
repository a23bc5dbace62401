#pragma once

// Independent reference computations for the tests: direct sums, no FFTW,
// no library kernels.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <type_traits>
#include <vector>

#include "bf/types.hpp"

namespace oracle {

using cd = std::complex<double>;

// X[k] = sum_n x[n] exp(-2 pi i k n / N)
inline std::vector<cd> dft(std::span<const cd> x) {
    const std::size_t n = x.size();
    std::vector<cd> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        cd acc = 0;
        for (std::size_t j = 0; j < n; ++j)
            acc += x[j] * std::polar(1.0, -2.0 * std::numbers::pi * double(k * j % n) / double(n));
        out[k] = acc;
    }
    return out;
}

inline std::vector<cd> idft(std::span<const cd> x) {
    const std::size_t n = x.size();
    std::vector<cd> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        cd acc = 0;
        for (std::size_t j = 0; j < n; ++j)
            acc += x[j] * std::polar(1.0, 2.0 * std::numbers::pi * double(k * j % n) / double(n));
        out[k] = acc / double(n);
    }
    return out;
}

template <typename T>
cd as_cd(const T& v) {
    if constexpr (std::is_arithmetic_v<T>)
        return cd(double(v), 0.0);
    else
        return cd(double(v.real()), double(v.imag()));
}

// max |a - b| / max |b|
template <typename A, typename B>
double relative_error(const A& a, const B& b) {
    double num = 0, den = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num = std::max(num, std::abs(as_cd(a[i]) - as_cd(b[i])));
        den = std::max(den, std::abs(as_cd(b[i])));
    }
    return den > 0 ? num / den : num;
}

inline std::vector<bf::DualPolSample> random_samples(std::size_t n, std::uint64_t seed,
                                                     float scale = 1.0f) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> g(0.0f, scale);
    std::vector<bf::DualPolSample> out(n);
    for (auto& s : out)
        s = {{g(rng), g(rng)}, {g(rng), g(rng)}};
    return out;
}

inline std::vector<bf::DualPolSample> random_integer_samples(std::size_t n, std::uint64_t seed,
                                                             int max_abs = 32767) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> u(-max_abs - 1, max_abs);
    std::vector<bf::DualPolSample> out(n);
    for (auto& s : out)
        s = {{float(u(rng)), float(u(rng))}, {float(u(rng)), float(u(rng))}};
    return out;
}

// Lag (in samples) at which sum_t a[t + lag] conj(b[t]) has the largest
// magnitude, searched over [-max_lag, max_lag].
inline int xcorr_peak_lag(std::span<const cd> a, std::span<const cd> b, int max_lag) {
    int best = 0;
    double best_mag = -1;
    const int n = static_cast<int>(std::min(a.size(), b.size()));
    for (int lag = -max_lag; lag <= max_lag; ++lag) {
        cd acc = 0;
        for (int t = 0; t < n; ++t) {
            const int i = t + lag;
            if (i >= 0 && i < n)
                acc += a[i] * std::conj(b[t]);
        }
        if (std::abs(acc) > best_mag) {
            best_mag = std::abs(acc);
            best = lag;
        }
    }
    return best;
}

// Least-squares fit y = a + b x; returns {a, b, max |residual|}.
struct LineFit {
    double a, b, max_residual;
};
inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    const double n = double(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double b = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double a = (sy - b * sx) / n;
    double r = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
        r = std::max(r, std::abs(y[i] - (a + b * x[i])));
    return {a, b, r};
}

// Arrival time in [0, period) of a periodic power series, from the phase of
// its first Fourier harmonic at the folding frequency.  For a pulse that is
// symmetric about its centre this is the centre.
inline double harmonic_arrival(std::span<const double> power, double sample_rate, double period,
                               double t_first = 0.0) {
    cd acc = 0;
    for (std::size_t i = 0; i < power.size(); ++i) {
        const double t = t_first + double(i) / sample_rate;
        acc += power[i] * std::polar(1.0, -2.0 * std::numbers::pi * t / period);
    }
    double t = -std::arg(acc) / (2.0 * std::numbers::pi) * period;
    if (t < 0)
        t += period;
    return t;
}

// Unwraps a sequence of times known modulo `period` so consecutive entries
// differ by less than half a period.
inline void unwrap(std::vector<double>& t, double period) {
    for (std::size_t i = 1; i < t.size(); ++i)
        t[i] -= period * std::round((t[i] - t[i - 1]) / period);
}

// Power |x|^2 + |y|^2 of a narrowband channel centred at `freq` (cycles per
// sample) of a dual-polarisation series, through a Hann window of `length`
// taps evaluated every `stride` samples.  Output k is centred on input
// sample k * stride + (length - 1) / 2.  Low sidelobes, unlike a bare FFT.
inline std::vector<double> narrowband_power(std::span<const bf::DualPolSample> s, double freq,
                                            int length, int stride) {
    std::vector<cd> mix(static_cast<std::size_t>(length));
    for (int j = 0; j < length; ++j) {
        const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * (j + 0.5) / length);
        mix[std::size_t(j)] = w * std::polar(1.0, -2.0 * std::numbers::pi * freq * j);
    }
    std::vector<double> out;
    for (std::size_t start = 0; start + std::size_t(length) <= s.size(); start += std::size_t(stride)) {
        // The carrier phase at `start` is common to x and y and drops out of the power.
        cd x = 0, y = 0;
        for (int j = 0; j < length; ++j) {
            x += mix[std::size_t(j)] * cd(s[start + std::size_t(j)].x);
            y += mix[std::size_t(j)] * cd(s[start + std::size_t(j)].y);
        }
        out.push_back(std::norm(x) + std::norm(y));
    }
    return out;
}

} // namespace oracle
