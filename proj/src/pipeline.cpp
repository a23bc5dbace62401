#include "bf/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "bf/channelizer.hpp"
#include "bf/dedisperse.hpp"
#include "bf/errors.hpp"
#include "bf/queues.hpp"
#include "bf/stokes.hpp"

namespace bf {

using Clock = std::chrono::steady_clock;

// ---- sources ---------------------------------------------------------------

std::optional<Chunk> VectorSource::next() {
    if (pos_ >= chunks_.size())
        return std::nullopt;
    return std::move(chunks_[pos_++]);
}

GeneratorSource::GeneratorSource(std::shared_ptr<const StationGenerator> generator, int n_blocks)
    : generator_(std::move(generator)), n_blocks_(n_blocks) {}

std::optional<Chunk> GeneratorSource::next() {
    const auto& cfg = generator_->config();
    const std::int64_t per_block = std::int64_t(cfg.n_subbands) * cfg.n_stations;
    if (pos_ >= per_block * n_blocks_)
        return std::nullopt;
    const int block = static_cast<int>(pos_ / per_block);
    const int subband = static_cast<int>(pos_ % per_block / cfg.n_stations);
    const int station = static_cast<int>(pos_ % cfg.n_stations);
    ++pos_;
    return generator_->generate_chunk(station, subband, block);
}

PacedSource::PacedSource(ChunkSource& inner, double block_duration, double speed)
    : inner_(inner), block_duration_(block_duration), speed_(speed) {
    if (!(speed > 0))
        throw ConfigError("pacing speed must be > 0");
}

std::optional<Chunk> PacedSource::next() {
    auto chunk = inner_.next();
    if (!chunk)
        return chunk;
    std::unique_lock lock(mutex_);
    if (!start_)
        start_ = Clock::now();
    const double due = (chunk->block + 1) * block_duration_ / speed_;
    const auto when =
        *start_ + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(due));
    cv_.wait_until(lock, when, [&] { return cancelled_; });
    if (cancelled_)
        return std::nullopt;
    return chunk;
}

void PacedSource::cancel() {
    {
        std::lock_guard lock(mutex_);
        cancelled_ = true;
    }
    cv_.notify_all();
    inner_.cancel();
}

// ---- sinks -----------------------------------------------------------------

void MemorySink::write(const OutputBlock& block) {
    std::lock_guard lock(mutex_);
    blocks_.push_back(block);
}

std::vector<OutputBlock> MemorySink::blocks() const {
    std::lock_guard lock(mutex_);
    return blocks_;
}

ThrottledSink::ThrottledSink(std::unique_ptr<BeamSink> inner, double bytes_per_second)
    : inner_(std::move(inner)), bytes_per_second_(bytes_per_second) {
    if (!(bytes_per_second > 0))
        throw ConfigError("sink rate must be > 0");
}

void ThrottledSink::write(const OutputBlock& block) {
    if (!start_)
        start_ = Clock::now();
    bytes_ += static_cast<double>(block.data.size() * sizeof(float));
    const auto due = *start_ + std::chrono::duration_cast<Clock::duration>(
                                   std::chrono::duration<double>(bytes_ / bytes_per_second_));
    std::this_thread::sleep_until(due);
    inner_->write(block);
}

// ---- reordering ------------------------------------------------------------

std::vector<float> reorder_for_output(std::span<const BeamChunk* const> chunks,
                                      int first_component, int n_components, bool* substituted) {
    const BeamChunk* like = nullptr;
    for (const auto* c : chunks)
        if (c) {
            like = c;
            break;
        }
    if (substituted)
        *substituted = like == nullptr || std::any_of(chunks.begin(), chunks.end(),
                                                      [](const BeamChunk* c) { return !c; });
    if (!like)
        throw StalenessError("no chunk of the block is present to take its shape from");
    const int C = like->n_channels, T = like->n_times, K = like->n_components();
    if (first_component < 0 || n_components < 1 || first_component + n_components > K)
        throw RangeError("component range outside the beam representation");
    for (const auto* c : chunks)
        if (c && (c->n_channels != C || c->n_times != T || c->n_components() != K ||
                  c->data.size() != std::size_t(C) * T * K))
            throw ShapeError("beam chunks of one block disagree in shape");

    const std::size_t S = chunks.size();
    std::vector<float> out(std::size_t(T) * S * C * n_components, 0.0f);
    for (std::size_t s = 0; s < S; ++s) {
        if (!chunks[s])
            continue;
        const float* src = chunks[s]->data.data();
        for (int c = 0; c < C; ++c)
            for (int t = 0; t < T; ++t)
                for (int k = 0; k < n_components; ++k)
                    out[((std::size_t(t) * S + s) * C + c) * n_components + k] =
                        src[(std::size_t(c) * T + t) * K + first_component + k];
    }
    return out;
}

std::vector<BeamChunk> split_output_block(std::span<const float> data, int n_subbands,
                                          int n_channels, int n_times, OutputMode representation) {
    const int K = components_per_sample(representation);
    if (data.size() != std::size_t(n_subbands) * n_channels * n_times * K)
        throw ShapeError("output block size does not match its shape");
    std::vector<BeamChunk> out(static_cast<std::size_t>(n_subbands));
    for (int s = 0; s < n_subbands; ++s) {
        auto& b = out[s];
        b.subband = static_cast<std::uint32_t>(s);
        b.representation = representation;
        b.n_channels = n_channels;
        b.n_times = n_times;
        b.data.resize(std::size_t(n_channels) * n_times * K);
        for (int c = 0; c < n_channels; ++c)
            for (int t = 0; t < n_times; ++t)
                for (int k = 0; k < K; ++k)
                    b.data[(std::size_t(c) * n_times + t) * K + k] =
                        data[((std::size_t(t) * n_subbands + s) * n_channels + c) * K + k];
    }
    return out;
}

// ---- stats -----------------------------------------------------------------

std::string run_stats_text(const RunStats& s) {
    std::ostringstream os;
    char buf[160];
    os << "chunks in            " << s.chunks_in << "\n";
    os << "chunks late          " << s.chunks_late << "\n";
    os << "chunks rejected      " << s.chunks_rejected << "\n";
    os << "chunks substituted   " << s.chunks_substituted << "\n";
    os << "samples substituted  " << s.samples_substituted << "\n";
    os << "bad-version packets  " << s.packets_bad_version << "\n";
    os << "work items           " << s.work_items << "\n";
    os << "blocks attempted     " << s.blocks_out_attempted << "\n";
    os << "blocks delivered     " << s.blocks_out_delivered << "\n";
    os << "blocks dropped       " << s.blocks_out_dropped << "\n";
    os << "blocks substituted   " << s.blocks_out_substituted << "\n";
    os << "bytes delivered      " << s.bytes_delivered << "\n";
    os << "sink failures        " << s.sink_failures << "\n";
    std::snprintf(buf, sizeof buf, "drop fraction        %.6f\n", s.drop_fraction);
    os << buf;
    os << "starved              " << (s.starved ? "yes" : "no") << "\n";
    os << "workers              " << s.workers << "  (" << s.isa << ")\n";
    std::snprintf(buf, sizeof buf,
                  "stage seconds        shift %.3f  channelize %.3f  beamform %.3f  "
                  "dedisperse %.3f  stokes %.3f  assemble %.3f  sink %.3f\n",
                  s.stage.shift, s.stage.channelize, s.stage.beamform, s.stage.dedisperse,
                  s.stage.stokes, s.stage.assemble, s.stage.sink);
    os << buf;
    std::snprintf(buf, sizeof buf, "wall seconds         %.3f\n", s.wall_seconds);
    os << buf;
    return os.str();
}

std::string run_stats_json(const RunStats& s) {
    nlohmann::json j = {{"chunks_in", s.chunks_in},
                        {"chunks_late", s.chunks_late},
                        {"chunks_rejected", s.chunks_rejected},
                        {"chunks_substituted", s.chunks_substituted},
                        {"samples_substituted", s.samples_substituted},
                        {"packets_bad_version", s.packets_bad_version},
                        {"work_items", s.work_items},
                        {"blocks_out_attempted", s.blocks_out_attempted},
                        {"blocks_out_delivered", s.blocks_out_delivered},
                        {"blocks_out_dropped", s.blocks_out_dropped},
                        {"blocks_out_substituted", s.blocks_out_substituted},
                        {"bytes_delivered", s.bytes_delivered},
                        {"sink_failures", s.sink_failures},
                        {"drop_fraction", s.drop_fraction},
                        {"starved", s.starved},
                        {"workers", s.workers},
                        {"isa", s.isa},
                        {"stage_seconds",
                         {{"shift", s.stage.shift},
                          {"channelize", s.stage.channelize},
                          {"beamform", s.stage.beamform},
                          {"dedisperse", s.stage.dedisperse},
                          {"stokes", s.stage.stokes},
                          {"assemble", s.stage.assemble},
                          {"sink", s.stage.sink}}},
                        {"wall_seconds", s.wall_seconds}};
    return j.dump(2) + "\n";
}

// ---- run -------------------------------------------------------------------

std::vector<PartInfo> describe_parts(const ObservationConfig& config, const OutputPlan& plan) {
    std::vector<PartInfo> parts;
    for (std::size_t i = 0; i < plan.parts.size(); ++i) {
        const BeamPart& p = plan.parts[i];
        PartInfo info;
        info.part = static_cast<int>(i);
        info.layout = p;
        info.channels_per_subband = config.n_channels;
        info.integration = p.mode == OutputMode::StokesI ? config.integration_factor : 1;
        info.times_per_block = config.channel_samples() / info.integration;
        info.n_components_total = components_per_sample(p.mode);
        info.channel_width = config.channel_width();
        info.sample_rate = info.channel_width / info.integration;
        info.base_frequency = config.channel_center(p.first_subband, 0);
        info.subband_stride = config.subband_stride;
        if (!p.incoherent && p.beam < config.n_beams())
            info.direction = config.beam_directions[p.beam];
        info.dedispersed = config.dedisperse && !p.incoherent;
        parts.push_back(info);
    }
    return parts;
}

namespace {

using Samples = std::vector<DualPolSample>;
using SharedSamples = std::shared_ptr<const Samples>;

struct WorkItem {
    int subband = 0;
    std::uint32_t block = 0;
    bool substituted = false;
    std::vector<SharedSamples> current;   // [station]
    std::vector<SharedSamples> previous;  // [station]
};

struct WorkResult {
    int subband = 0;
    std::uint32_t block = 0;
    bool substituted = false;
    std::vector<BeamChunk> beams;  // [output beam]
};

struct Shared {
    const ObservationConfig& config;
    const PipelineOptions& options;
    std::vector<BeamWeightSet> weights;          // [subband]
    std::vector<std::vector<ChirpTable>> chirps; // [subband][channel]
    std::unique_ptr<Channelizer> channelizer;
    std::unique_ptr<Dedisperser> dedisperser;
};

void check_plan(const ObservationConfig& config, const StationLayout& layout,
                const OutputPlan& plan) {
    if (!plan.feasible)
        throw ConfigError("output plan is infeasible; refusing to start (" + plan.reason + ")");
    if (layout.size() != config.n_stations)
        throw ConfigError("station layout has " + std::to_string(layout.size()) +
                          " stations, configuration " + std::to_string(config.n_stations));
    if (plan.n_beams != config.n_output_beams() || plan.n_subbands != config.n_subbands ||
        plan.mode != config.mode ||
        (config.mode == OutputMode::StokesI && plan.integration_factor != config.integration_factor))
        throw ConfigError("output plan was made for a different configuration");
}

class Worker {
  public:
    explicit Worker(const Shared& shared) : sh_(shared) {}

    WorkResult process(const WorkItem& item) {
        const auto& cfg = sh_.config;
        const int S = cfg.n_stations, C = cfg.n_channels;
        const int L = cfg.chunk_samples(), T = cfg.channel_samples();
        const auto isa = sh_.options.isa;
        const BeamWeightSet& w = sh_.weights[item.subband];
        const std::size_t plane = std::size_t(C) * T;

        auto t0 = Clock::now();
        window_.resize(std::size_t(L));
        channels_.resize(std::size_t(S) * plane);
        for (int s = 0; s < S; ++s) {
            const Samples& cur = *item.current[s];
            const Samples& prev = *item.previous[s];
            const std::int64_t shift = w.sample_shift[s];
            for (std::int64_t n = 0; n < L; ++n) {
                const std::int64_t idx = n - shift;
                window_[n] = idx >= 0 ? cur[idx] : prev[L + idx];
            }
            auto t1 = Clock::now();
            stage_.shift += seconds(t0, t1);
            sh_.channelizer->channelize(window_, std::span(channels_).subspan(s * plane, plane));
            t0 = Clock::now();
            stage_.channelize += seconds(t1, t0);
        }

        WorkResult result;
        result.subband = item.subband;
        result.block = item.block;
        result.substituted = item.substituted;

        const int B = cfg.n_beams();
        beams_.resize(std::size_t(B) * plane);
        if (B > 0) {
            ptrs_.resize(std::size_t(S));
            for (int s = 0; s < S; ++s)
                ptrs_[s] = channels_.data() + s * plane;
            form_beams_into(ptrs_, C, T, w, sh_.options.blocks, isa, beams_);
        }
        auto t1 = Clock::now();
        stage_.beamform += seconds(t0, t1);

        if (cfg.dedisperse)
            for (int b = 0; b < B; ++b)
                for (int c = 0; c < C; ++c)
                    sh_.dedisperser->apply_padded(
                        std::span(beams_).subspan(b * plane + std::size_t(c) * T, std::size_t(T)),
                        sh_.chirps[item.subband][c], isa);
        t0 = Clock::now();
        stage_.dedisperse += seconds(t1, t0);

        for (int b = 0; b < B; ++b)
            result.beams.push_back(
                convert(std::span(beams_).subspan(b * plane, plane), cfg.mode, b, false));
        if (cfg.include_incoherent) {
            const OutputMode m = incoherent_mode(cfg);
            const int K = components_per_sample(m);
            incoherent_.assign(plane * K, 0.0f);
            tmp_.resize(plane * K);
            for (int s = 0; s < S; ++s) {
                stokes_into(isa, std::span(channels_).subspan(s * plane, plane), m, tmp_);
                for (std::size_t k = 0; k < tmp_.size(); ++k)
                    incoherent_[k] += tmp_[k];
            }
            result.beams.push_back(finish_stokes(incoherent_, m, B, true));
        }
        for (auto& bc : result.beams) {
            bc.subband = static_cast<std::uint32_t>(item.subband);
            bc.block = item.block;
            bc.substituted = item.substituted;
        }
        stage_.stokes += seconds(t0, Clock::now());
        return result;
    }

    const StageSeconds& stage() const { return stage_; }

  private:
    static double seconds(Clock::time_point a, Clock::time_point b) {
        return std::chrono::duration<double>(b - a).count();
    }

    BeamChunk convert(std::span<const DualPolSample> v, OutputMode mode, int beam, bool incoherent) {
        const auto& cfg = sh_.config;
        if (mode == OutputMode::ComplexVoltages) {
            BeamChunk bc = voltages_to_beam_chunk(v, cfg.n_channels, cfg.channel_samples());
            bc.beam = static_cast<std::uint32_t>(beam);
            return bc;
        }
        tmp_.resize(v.size() * components_per_sample(mode));
        stokes_into(sh_.options.isa, v, mode, tmp_);
        return finish_stokes(tmp_, mode, beam, incoherent);
    }

    // [channel][time][component] Stokes values -> BeamChunk, integrating Stokes I.
    BeamChunk finish_stokes(const std::vector<float>& values, OutputMode mode, int beam,
                            bool incoherent) const {
        const auto& cfg = sh_.config;
        const int C = cfg.n_channels, T = cfg.channel_samples();
        BeamChunk bc;
        bc.beam = static_cast<std::uint32_t>(beam);
        bc.representation = mode;
        bc.incoherent = incoherent;
        bc.n_channels = C;
        if (mode == OutputMode::StokesI && cfg.integration_factor > 1) {
            bc.n_times = T / cfg.integration_factor;
            bc.data.reserve(std::size_t(C) * bc.n_times);
            for (int c = 0; c < C; ++c) {
                auto summed = integrate_stokes_i(
                    std::span<const float>(values.data() + std::size_t(c) * T, std::size_t(T)),
                    cfg.integration_factor);
                bc.data.insert(bc.data.end(), summed.begin(), summed.end());
            }
        } else {
            bc.n_times = T;
            bc.data = values;
        }
        return bc;
    }

    const Shared& sh_;
    StageSeconds stage_;
    Samples window_;
    Samples channels_;
    Samples beams_;
    std::vector<const DualPolSample*> ptrs_;
    std::vector<float> tmp_;
    std::vector<float> incoherent_;
};

void add(StageSeconds& into, const StageSeconds& s) {
    into.shift += s.shift;
    into.channelize += s.channelize;
    into.beamform += s.beamform;
    into.dedisperse += s.dedisperse;
    into.stokes += s.stokes;
    into.assemble += s.assemble;
    into.sink += s.sink;
}

// Collects the first exception thrown on any pipeline thread.
class ErrorSlot {
  public:
    void set(std::exception_ptr e) {
        std::lock_guard lock(mutex_);
        if (!error_)
            error_ = e;
    }
    void rethrow() {
        if (error_)
            std::rethrow_exception(error_);
    }

  private:
    std::mutex mutex_;
    std::exception_ptr error_;
};

} // namespace

RunStats run_pipeline(const ObservationConfig& config, const StationLayout& layout,
                      const OutputPlan& plan, ChunkSource& source, const SinkFactory& sinks,
                      const PipelineOptions& options) {
    const auto wall_start = Clock::now();
    config.validate();
    check_plan(config, layout, plan);
    if (options.workers < 1)
        throw ConfigError("pipeline.workers must be >= 1");
    if (options.deadline_blocks < 0)
        throw ConfigError("pipeline.deadline_blocks must be >= 0");
    if (!kernels::isa_supported(options.isa))
        throw ConfigError("requested kernel ISA is not supported on this CPU");

    const int S = config.n_stations, NS = config.n_subbands, L = config.chunk_samples();

    Shared shared{config, options, {}, {}, nullptr, nullptr};
    for (int sb = 0; sb < NS; ++sb) {
        const auto freqs = config.channel_centers(sb);
        shared.weights.push_back(
            compute_weights(layout, config.beam_directions, freqs, config.subband_width));
        if (config.dedisperse) {
            std::vector<ChirpTable> row;
            for (double f : freqs)
                row.push_back(chirp_weights(config.dm, f, config.channel_width(),
                                            config.dedispersion_fft_size));
            shared.chirps.push_back(std::move(row));
        }
    }
    if (!shared.weights.empty() && shared.weights[0].max_shift() > L)
        throw ConfigError("station delays exceed one block; use longer chunks");
    shared.channelizer = std::make_unique<Channelizer>(config.n_channels, L);
    if (config.dedisperse)
        shared.dedisperser = std::make_unique<Dedisperser>(config.dedispersion_fft_size);

    RunStats stats;
    stats.workers = options.workers;
    stats.isa = std::string(kernels::isa_name(options.isa));

    // Output streams: one best-effort buffer and one writer thread per part.
    const auto parts = describe_parts(config, plan);
    const std::size_t P = parts.size();
    std::vector<std::unique_ptr<BestEffortBuffer<OutputBlock>>> buffers;
    std::vector<std::unique_ptr<BeamSink>> part_sinks;
    for (const auto& info : parts) {
        buffers.push_back(std::make_unique<BestEffortBuffer<OutputBlock>>(options.output_buffer_blocks));
        part_sinks.push_back(sinks(info));
        if (!part_sinks.back())
            throw ConfigError("sink factory returned no sink for part " + std::to_string(info.part));
    }

    ErrorSlot errors;
    std::atomic<std::uint64_t> delivered{0};
    std::mutex stage_mutex;
    StageSeconds stage;

    std::vector<std::thread> sink_threads;
    for (std::size_t p = 0; p < P; ++p)
        sink_threads.emplace_back([&, p] {
            double busy = 0;
            try {
                while (auto block = buffers[p]->pop()) {
                    const auto t = Clock::now();
                    part_sinks[p]->write(*block);
                    busy += std::chrono::duration<double>(Clock::now() - t).count();
                    ++delivered;
                }
                part_sinks[p]->finish();
            } catch (...) {
                errors.set(std::current_exception());
            }
            std::lock_guard lock(stage_mutex);
            stage.sink += busy;
        });

    // Assembler: restores block order and splits beams into plan parts.
    BoundedQueue<WorkResult> results(std::size_t(options.workers) * 2 + 2);
    std::uint64_t attempted = 0, out_substituted = 0;
    std::thread assembler([&] {
        std::map<std::uint32_t, std::vector<std::optional<WorkResult>>> pending;
        std::map<std::uint32_t, int> counts;
        std::uint32_t next_block = 0;
        double busy = 0;
        try {
            while (auto r = results.pop()) {
                const auto t = Clock::now();
                auto& slots = pending[r->block];
                if (slots.empty())
                    slots.resize(std::size_t(NS));
                const int sb = r->subband;
                const std::uint32_t blk = r->block;
                slots[sb] = std::move(*r);
                ++counts[blk];
                while (counts.count(next_block) && counts[next_block] == NS) {
                    auto& done = pending[next_block];
                    for (std::size_t p = 0; p < P; ++p) {
                        const BeamPart& part = parts[p].layout;
                        std::vector<const BeamChunk*> chunks;
                        bool any_sub = false;
                        for (int s = part.first_subband; s < part.first_subband + part.n_subbands; ++s) {
                            chunks.push_back(&done[s]->beams[part.beam]);
                            any_sub = any_sub || done[s]->substituted;
                        }
                        OutputBlock ob;
                        ob.part = static_cast<int>(p);
                        ob.block = next_block;
                        ob.substituted = any_sub;
                        ob.data = reorder_for_output(chunks, part.first_component,
                                                     part.n_components);
                        ++attempted;
                        out_substituted += any_sub ? 1 : 0;
                        buffers[p]->offer(std::move(ob));
                    }
                    pending.erase(next_block);
                    counts.erase(next_block);
                    ++next_block;
                }
                busy += std::chrono::duration<double>(Clock::now() - t).count();
            }
        } catch (...) {
            errors.set(std::current_exception());
            results.close();
        }
        std::lock_guard lock(stage_mutex);
        stage.assemble += busy;
    });

    // Worker pool over (subband, block) items.
    BoundedQueue<WorkItem> work(std::size_t(options.workers) * 2);
    std::vector<std::thread> workers;
    for (int i = 0; i < options.workers; ++i)
        workers.emplace_back([&] {
            Worker worker(shared);
            try {
                while (auto item = work.pop())
                    results.push(worker.process(*item));
            } catch (...) {
                errors.set(std::current_exception());
                work.close();
            }
            std::lock_guard lock(stage_mutex);
            add(stage, worker.stage());
        });

    // Ingest: the source runs on its own thread behind a bounded queue.
    BoundedQueue<Chunk> ingest(options.ingest_capacity);
    std::thread ingest_thread([&] {
        try {
            while (auto chunk = source.next())
                if (!ingest.push(std::move(*chunk)))
                    break;
        } catch (...) {
            errors.set(std::current_exception());
        }
        ingest.close();
    });

    // Dispatcher (this thread): gathers chunks per block, zero-fills at the deadline.
    const auto zeros = std::make_shared<const Samples>(std::size_t(L));
    std::map<std::uint32_t, std::vector<SharedSamples>> gathering;  // [subband * S + station]
    std::vector<SharedSamples> previous(std::size_t(NS) * S, zeros);
    std::uint32_t next_dispatch = 0;
    std::int64_t max_seen = -1;

    auto dispatch = [&](std::uint32_t block) {
        auto it = gathering.find(block);
        std::vector<SharedSamples> have =
            it != gathering.end() ? std::move(it->second) : std::vector<SharedSamples>(std::size_t(NS) * S);
        if (it != gathering.end())
            gathering.erase(it);
        for (int sb = 0; sb < NS; ++sb) {
            WorkItem item;
            item.subband = sb;
            item.block = block;
            for (int s = 0; s < S; ++s) {
                SharedSamples& cur = have[std::size_t(sb) * S + s];
                if (!cur) {
                    cur = zeros;
                    item.substituted = true;
                    ++stats.chunks_substituted;
                }
                item.current.push_back(cur);
                item.previous.push_back(previous[std::size_t(sb) * S + s]);
                previous[std::size_t(sb) * S + s] = cur;
            }
            ++stats.work_items;
            work.push(std::move(item));
        }
    };

    try {
        for (;;) {
            std::optional<Chunk> chunk;
            if (options.starvation_timeout.count() > 0) {
                bool timed_out = false;
                chunk = ingest.pop_for(options.starvation_timeout, &timed_out);
                if (timed_out) {
                    stats.starved = true;
                    source.cancel();
                    ingest.close();
                    break;
                }
            } else {
                chunk = ingest.pop();
            }
            if (!chunk)
                break;
            ++stats.chunks_in;
            if (chunk->station >= std::uint32_t(S) || chunk->subband >= std::uint32_t(NS) ||
                chunk->samples.size() != std::size_t(L)) {
                ++stats.chunks_rejected;
                continue;
            }
            if (chunk->block < next_dispatch) {
                ++stats.chunks_late;
                continue;
            }
            auto& slots = gathering[chunk->block];
            if (slots.empty())
                slots.resize(std::size_t(NS) * S);
            auto& slot = slots[std::size_t(chunk->subband) * S + chunk->station];
            if (slot) {
                ++stats.chunks_rejected;
                continue;
            }
            slot = std::make_shared<const Samples>(std::move(chunk->samples));
            max_seen = std::max<std::int64_t>(max_seen, chunk->block);
            while (std::int64_t(next_dispatch) + options.deadline_blocks <= max_seen)
                dispatch(next_dispatch++);
        }
        while (std::int64_t(next_dispatch) <= max_seen)
            dispatch(next_dispatch++);
    } catch (...) {
        errors.set(std::current_exception());
        source.cancel();
        ingest.close();
    }

    ingest_thread.join();
    work.close();
    for (auto& t : workers)
        t.join();
    results.close();
    assembler.join();
    for (auto& b : buffers)
        b->close();
    for (auto& t : sink_threads)
        t.join();
    errors.rethrow();

    stats.samples_substituted = source.samples_substituted();
    stats.packets_bad_version = source.packets_bad_version();
    stats.blocks_out_attempted = attempted;
    stats.blocks_out_substituted = out_substituted;
    stats.blocks_out_delivered = delivered.load();
    for (const auto& b : buffers)
        stats.blocks_out_dropped += b->dropped();
    for (const auto& s : part_sinks) {
        stats.bytes_delivered += s->bytes_delivered();
        stats.sink_failures += s->failed() ? 1 : 0;
    }
    stats.drop_fraction = attempted ? double(stats.blocks_out_dropped) / double(attempted) : 0.0;
    stats.stage = stage;
    stats.wall_seconds = std::chrono::duration<double>(Clock::now() - wall_start).count();
    return stats;
}

} // namespace bf
