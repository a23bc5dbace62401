#include "bf/channelizer.hpp"

#include <string>

#include "bf/errors.hpp"

namespace bf {

double channel_center_frequency(double subband_base, int n_channels, int channel,
                                double subband_width) {
    if (channel < 0 || channel >= n_channels)
        throw RangeError("channel " + std::to_string(channel) + " outside [0, " +
                         std::to_string(n_channels) + ")");
    return subband_base + channel * (subband_width / n_channels);
}

namespace {

int checked_channels(int n_channels, int n_samples) {
    if (n_channels <= 0 || (n_channels & (n_channels - 1)) != 0)
        throw ShapeError("channel count " + std::to_string(n_channels) + " is not a power of two");
    if (n_samples <= 0 || n_samples % n_channels != 0)
        throw ShapeError("chunk length " + std::to_string(n_samples) +
                         " is not divisible by " + std::to_string(n_channels) + " channels");
    return n_channels;
}

FftPlan<float>::Layout channel_layout(int n_channels, int n_samples) {
    // Complex view of DualPolSample[]: X of sample k at 2k, Y at 2k + 1.
    const std::size_t times = std::size_t(n_samples / n_channels);
    FftPlan<float>::Layout l;
    l.howmany = times;
    l.istride = 2;
    l.idist = 2 * std::size_t(n_channels);
    l.ostride = 2 * times;
    l.odist = 2;
    return l;
}

} // namespace

Channelizer::Channelizer(int n_channels, int n_samples)
    : n_channels_(checked_channels(n_channels, n_samples)), n_samples_(n_samples),
      plan_(std::size_t(n_channels), FftDirection::Forward, channel_layout(n_channels, n_samples)) {}

void Channelizer::channelize(std::span<const DualPolSample> in, std::span<DualPolSample> out) const {
    if (in.size() != std::size_t(n_samples_) || out.size() != std::size_t(n_samples_))
        throw ShapeError("channelizer expects " + std::to_string(n_samples_) + " samples, got " +
                         std::to_string(in.size()));
    const auto* src = reinterpret_cast<const cf32*>(in.data());
    auto* dst = reinterpret_cast<cf32*>(out.data());
    plan_.execute(src, dst);         // X
    plan_.execute(src + 1, dst + 1); // Y
}

ChannelizedChunk Channelizer::channelize(const Chunk& chunk) const {
    ChannelizedChunk out;
    out.station = chunk.station;
    out.subband = chunk.subband;
    out.block = chunk.block;
    out.n_channels = n_channels_;
    out.n_times = n_times();
    out.channel_width = chunk.sample_rate / n_channels_;
    out.data.resize(chunk.samples.size());
    channelize(chunk.samples, out.data);
    return out;
}

ChannelizedChunk channelize(const Chunk& chunk, int n_channels) {
    checked_channels(n_channels, static_cast<int>(chunk.samples.size()));
    return Channelizer(n_channels, static_cast<int>(chunk.samples.size())).channelize(chunk);
}

} // namespace bf
