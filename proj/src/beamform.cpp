#include "bf/beamform.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "bf/errors.hpp"
#include "bf/stokes.hpp"

namespace bf {

DelaySplit split_delay(double delay, double sample_rate) {
    // nearbyint honours the default round-to-nearest-even mode.
    const double shift = std::nearbyint(delay * sample_rate);
    return {static_cast<std::int64_t>(shift), delay - shift / sample_rate};
}

std::int64_t BeamWeightSet::max_shift() const {
    return sample_shift.empty() ? 0 : *std::max_element(sample_shift.begin(), sample_shift.end());
}

BeamWeightSet compute_weights(const StationLayout& layout, std::span<const Vec3> beam_directions,
                              std::span<const double> channel_frequencies, double sample_rate,
                              std::optional<Vec3> reference) {
    for (const auto& d : beam_directions)
        if (!is_unit(d))
            throw DomainError("beam direction is not a unit vector");
    if (reference && !is_unit(*reference))
        throw DomainError("reference direction is not a unit vector");

    BeamWeightSet w;
    w.n_stations = layout.size();
    w.n_channels = static_cast<int>(channel_frequencies.size());
    w.n_beams = static_cast<int>(beam_directions.size());
    w.sample_shift.assign(std::size_t(w.n_stations), 0);
    w.weights.resize(std::size_t(w.n_stations) * w.n_channels * w.n_beams);

    const std::optional<Vec3> ref =
        reference ? reference
                  : (beam_directions.empty() ? std::nullopt : std::optional(beam_directions[0]));
    std::vector<std::int64_t> ref_shift(std::size_t(w.n_stations), 0);
    if (ref)
        for (int s = 0; s < w.n_stations; ++s)
            ref_shift[s] = split_delay(geometric_delay(layout.positions[s], *ref), sample_rate).shift;
    const std::int64_t lowest =
        ref_shift.empty() ? 0 : *std::min_element(ref_shift.begin(), ref_shift.end());
    for (int s = 0; s < w.n_stations; ++s)
        w.sample_shift[s] = ref_shift[s] - lowest;

    for (int s = 0; s < w.n_stations; ++s)
        for (int b = 0; b < w.n_beams; ++b) {
            const double delay = geometric_delay(layout.positions[s], beam_directions[b]);
            const double residual = delay - static_cast<double>(ref_shift[s]) / sample_rate;
            for (int c = 0; c < w.n_channels; ++c)
                w.weights[w.index(s, c, b)] =
                    std::polar(1.0, -2.0 * std::numbers::pi * channel_frequencies[c] * residual);
        }
    w.weights_f32.resize(w.weights.size());
    std::transform(w.weights.begin(), w.weights.end(), w.weights_f32.begin(),
                   [](cf64 v) { return cf32(v); });
    return w;
}

namespace {

void check_inputs(std::span<const ChannelizedChunk> chunks, const BeamWeightSet& w) {
    if (static_cast<int>(chunks.size()) != w.n_stations)
        throw StalenessError("beam former needs " + std::to_string(w.n_stations) +
                             " station chunks, got " + std::to_string(chunks.size()));
    for (std::size_t s = 0; s < chunks.size(); ++s) {
        if (chunks[s].station != s)
            throw StalenessError("station " + std::to_string(s) + " chunk missing");
        if (chunks[s].n_channels != w.n_channels || chunks[s].n_times != chunks[0].n_times ||
            chunks[s].subband != chunks[0].subband || chunks[s].block != chunks[0].block ||
            chunks[s].data.size() != std::size_t(chunks[s].n_channels) * chunks[s].n_times)
            throw ShapeError("station chunks disagree in shape, subband or block");
    }
}

std::vector<BeamChunk> to_beam_chunks(std::span<const DualPolSample> all, int n_beams,
                                      const ChannelizedChunk& like) {
    std::vector<BeamChunk> out;
    const std::size_t per_beam = std::size_t(like.n_channels) * like.n_times;
    for (int b = 0; b < n_beams; ++b) {
        auto chunk = voltages_to_beam_chunk(all.subspan(b * per_beam, per_beam), like.n_channels,
                                            like.n_times);
        chunk.beam = static_cast<std::uint32_t>(b);
        chunk.subband = like.subband;
        chunk.block = like.block;
        out.push_back(std::move(chunk));
    }
    return out;
}

} // namespace

BeamChunk voltages_to_beam_chunk(std::span<const DualPolSample> voltages, int n_channels,
                                 int n_times) {
    BeamChunk c;
    c.representation = OutputMode::ComplexVoltages;
    c.n_channels = n_channels;
    c.n_times = n_times;
    c.data.resize(voltages.size() * 4);
    for (std::size_t k = 0; k < voltages.size(); ++k) {
        c.data[4 * k + 0] = voltages[k].x.real();
        c.data[4 * k + 1] = voltages[k].x.imag();
        c.data[4 * k + 2] = voltages[k].y.real();
        c.data[4 * k + 3] = voltages[k].y.imag();
    }
    return c;
}

std::vector<BeamChunk> form_beams_reference(std::span<const ChannelizedChunk> chunks,
                                            const BeamWeightSet& w) {
    check_inputs(chunks, w);
    const int C = w.n_channels, B = w.n_beams;
    const int T = chunks.empty() ? 0 : chunks[0].n_times;
    std::vector<DualPolSample> out(std::size_t(B) * C * T);
    for (int b = 0; b < B; ++b)
        for (int c = 0; c < C; ++c)
            for (int t = 0; t < T; ++t) {
                float xr = 0, xi = 0, yr = 0, yi = 0;
                for (int s = 0; s < w.n_stations; ++s) {
                    const cf32 wt = w.weights_f32[w.index(s, c, b)];
                    const DualPolSample& v = chunks[s].at(c, t);
                    xr += v.x.real() * wt.real() - v.x.imag() * wt.imag();
                    xi += v.x.real() * wt.imag() + v.x.imag() * wt.real();
                    yr += v.y.real() * wt.real() - v.y.imag() * wt.imag();
                    yi += v.y.real() * wt.imag() + v.y.imag() * wt.real();
                }
                out[(std::size_t(b) * C + c) * T + t] = {cf32(xr, xi), cf32(yr, yi)};
            }
    return chunks.empty() ? std::vector<BeamChunk>{} : to_beam_chunks(out, B, chunks[0]);
}

void form_beams_into(std::span<const DualPolSample* const> stations, int n_channels, int n_times,
                     const BeamWeightSet& w, BlockSizes blocks, kernels::Isa isa,
                     std::span<DualPolSample> out) {
    if (blocks.stations <= 0 || blocks.times <= 0 || blocks.beams <= 0)
        throw ConfigError("beam former block sizes must be positive");
    const int S = static_cast<int>(stations.size());
    const int B = w.n_beams;
    if (S != w.n_stations || n_channels != w.n_channels)
        throw ShapeError("station count or channel count does not match the weight set");
    if (out.size() != std::size_t(B) * n_channels * n_times)
        throw ShapeError("beam output buffer has the wrong size");
    std::fill(out.begin(), out.end(), DualPolSample{});

    const std::size_t plane = std::size_t(n_channels) * n_times;
    cf32 tile_w[kernels::kMaxBlockInputs * kernels::kMaxBlockOutputs];
    const cf32* tile_in[kernels::kMaxBlockInputs];
    cf32* tile_out[kernels::kMaxBlockOutputs];

    for (int c = 0; c < n_channels; ++c)
        for (int s0 = 0; s0 < S; s0 += blocks.stations) {
            const int s_end = std::min(S, s0 + blocks.stations);
            for (int t0 = 0; t0 < n_times; t0 += blocks.times) {
                const int nt = std::min(n_times - t0, blocks.times);
                for (int b0 = 0; b0 < B; b0 += blocks.beams) {
                    const int b_end = std::min(B, b0 + blocks.beams);
                    // Register tiles inside the cache block, stations ascending.
                    for (int si = s0; si < s_end; si += kernels::kMaxBlockInputs) {
                        const int ns = std::min(s_end - si, kernels::kMaxBlockInputs);
                        for (int bj = b0; bj < b_end; bj += kernels::kMaxBlockOutputs) {
                            const int nb = std::min(b_end - bj, kernels::kMaxBlockOutputs);
                            for (int i = 0; i < ns; ++i) {
                                tile_in[i] = reinterpret_cast<const cf32*>(
                                    stations[si + i] + std::size_t(c) * n_times + t0);
                                for (int j = 0; j < nb; ++j)
                                    tile_w[i * nb + j] = w.weights_f32[w.index(si + i, c, bj + j)];
                            }
                            for (int j = 0; j < nb; ++j)
                                tile_out[j] = reinterpret_cast<cf32*>(
                                    out.data() + (bj + j) * plane + std::size_t(c) * n_times + t0);
                            kernels::beamform_block(isa, {tile_in, ns, tile_out, nb, tile_w,
                                                          2 * std::size_t(nt)});
                        }
                    }
                }
            }
        }
}

std::vector<BeamChunk> form_beams_blocked(std::span<const ChannelizedChunk> chunks,
                                          const BeamWeightSet& w, BlockSizes blocks,
                                          kernels::Isa isa) {
    if (blocks.stations <= 0 || blocks.times <= 0 || blocks.beams <= 0)
        throw ConfigError("beam former block sizes must be positive");
    check_inputs(chunks, w);
    if (chunks.empty())
        return {};
    std::vector<const DualPolSample*> ptrs;
    for (const auto& ch : chunks)
        ptrs.push_back(ch.data.data());
    const int T = chunks[0].n_times;
    std::vector<DualPolSample> out(std::size_t(w.n_beams) * w.n_channels * T);
    form_beams_into(ptrs, w.n_channels, T, w, blocks, isa, out);
    return to_beam_chunks(out, w.n_beams, chunks[0]);
}

BeamChunk form_incoherent_beam(std::span<const ChannelizedChunk> chunks, OutputMode mode,
                               kernels::Isa isa) {
    if (chunks.empty())
        throw StalenessError("incoherent beam needs at least one station");
    if (mode == OutputMode::ComplexVoltages)
        throw ConfigError("incoherent beam is Stokes I or Stokes IQUV");
    const auto& first = chunks[0];
    BeamChunk beam;
    beam.representation = mode;
    beam.incoherent = true;
    beam.subband = first.subband;
    beam.block = first.block;
    beam.n_channels = first.n_channels;
    beam.n_times = first.n_times;
    const int nc = components_per_sample(mode);
    const std::size_t n = first.data.size();
    beam.data.assign(n * nc, 0.0f);
    std::vector<float> tmp(n * nc);
    for (const auto& ch : chunks) {
        if (ch.data.size() != n)
            throw ShapeError("station chunks disagree in shape");
        stokes_into(isa, ch.data, mode, tmp);
        for (std::size_t k = 0; k < tmp.size(); ++k)
            beam.data[k] += tmp[k];
    }
    return beam;
}

} // namespace bf
