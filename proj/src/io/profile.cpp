#include "bf/io/profile.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "bf/errors.hpp"
#include "bf/stationgen.hpp"

namespace bf::io {

namespace {

int bin_of(double time, double period, int n_bins) {
    double phase = std::fmod(time / period, 1.0);
    if (phase < 0)
        phase += 1.0;
    return std::min(n_bins - 1, static_cast<int>(phase * n_bins));
}

} // namespace

std::vector<double> fold_series(std::span<const double> power, double sample_rate, double period,
                                int n_bins, double phase_offset) {
    if (n_bins < 2)
        throw RangeError("profile needs at least two bins");
    if (!(period > 0) || !(sample_rate > 0))
        throw RangeError("period and sample rate must be positive");
    std::vector<double> sum(std::size_t(n_bins), 0.0), count(std::size_t(n_bins), 0.0);
    for (std::size_t t = 0; t < power.size(); ++t) {
        const int b = bin_of(double(t) / sample_rate + phase_offset, period, n_bins);
        sum[b] += power[t];
        count[b] += 1;
    }
    for (int b = 0; b < n_bins; ++b)
        sum[b] = count[b] > 0 ? sum[b] / count[b] : 0.0;
    return sum;
}

std::vector<double> fold_profile(const BeamFile& file, double period, const FoldOptions& options) {
    const auto& h = file.header;
    if (options.n_bins < 2)
        throw RangeError("profile needs at least two bins");
    if (!(period > 0))
        throw RangeError("period must be positive");
    if (options.component < 0 || std::uint32_t(options.component) >= h.n_components)
        throw RangeError("component not present in the beam file");
    std::vector<int> channels = options.channels;
    if (channels.empty())
        for (std::uint32_t k = 0; k < h.n_channels(); ++k)
            channels.push_back(static_cast<int>(k));
    double f_top = 0;
    for (int k : channels) {
        if (k < 0 || std::uint32_t(k) >= h.n_channels())
            throw RangeError("channel " + std::to_string(k) + " not present in the beam file");
        f_top = std::max(f_top, h.channel_frequency(std::uint32_t(k)));
    }
    const std::size_t T = file.n_times();
    std::vector<double> sum(std::size_t(options.n_bins), 0.0), count(std::size_t(options.n_bins), 0.0);
    for (int k : channels) {
        double shift = 0;
        if (options.dm > 0)
            shift = dispersion_delay(options.dm, h.channel_frequency(std::uint32_t(k)) / 1e6) -
                    dispersion_delay(options.dm, f_top / 1e6);
        for (std::size_t t = 0; t < T; ++t) {
            const double time = double(t) / h.sample_rate - shift + options.phase_offset;
            const int b = bin_of(time, period, options.n_bins);
            sum[b] += file.at(t, std::size_t(k), std::size_t(options.component));
            count[b] += 1;
        }
    }
    for (int b = 0; b < options.n_bins; ++b)
        sum[b] = count[b] > 0 ? sum[b] / count[b] : 0.0;
    return sum;
}

PulseWidth measure_fwhm(std::span<const double> profile, double period) {
    const int n = static_cast<int>(profile.size());
    if (n < 3)
        throw RangeError("profile too short to measure a width");
    PulseWidth w;
    w.peak_bin = static_cast<int>(std::max_element(profile.begin(), profile.end()) - profile.begin());
    w.peak = profile[w.peak_bin];
    std::vector<double> sorted(profile.begin(), profile.end());
    std::nth_element(sorted.begin(), sorted.begin() + n / 2, sorted.end());
    w.baseline = sorted[n / 2];
    const double half = w.baseline + 0.5 * (w.peak - w.baseline);
    auto at = [&](int i) { return profile[((i % n) + n) % n]; };

    // Walk right then left until the profile drops below half maximum.
    double right = w.peak_bin, left = w.peak_bin;
    for (int i = 1; i < n; ++i) {
        const double a = at(w.peak_bin + i - 1), b = at(w.peak_bin + i);
        if (b < half) {
            right = w.peak_bin + i - 1 + (a - half) / (a - b);
            break;
        }
    }
    for (int i = 1; i < n; ++i) {
        const double a = at(w.peak_bin - i + 1), b = at(w.peak_bin - i);
        if (b < half) {
            left = w.peak_bin - i + 1 - (a - half) / (a - b);
            break;
        }
    }
    w.width_bins = right - left;
    w.width_seconds = w.width_bins * period / n;
    w.center_bin = std::fmod(0.5 * (left + right) + n, double(n));
    return w;
}

std::string profile_csv(std::span<const double> profile) {
    std::string out = "phase,power\n";
    char line[64];
    for (std::size_t i = 0; i < profile.size(); ++i) {
        std::snprintf(line, sizeof line, "%.6f,%.9g\n", (i + 0.5) / profile.size(), profile[i]);
        out += line;
    }
    return out;
}

} // namespace bf::io
