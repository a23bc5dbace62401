#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bf/beamform.hpp"
#include "bf/cluster_plan.hpp"
#include "bf/config.hpp"
#include "bf/kernels.hpp"
#include "bf/stationgen.hpp"
#include "bf/types.hpp"

namespace bf {

// ---- sources ---------------------------------------------------------------

class ChunkSource {
  public:
    virtual ~ChunkSource() = default;
    // Next chunk, or nullopt at end of stream.  May block.
    virtual std::optional<Chunk> next() = 0;
    // Ask a blocked next() to give up and return nullopt soon.
    virtual void cancel() {}
    // Samples the source itself zero-filled (lost packets) and packets it
    // discarded for an unknown version.
    virtual std::uint64_t samples_substituted() const { return 0; }
    virtual std::uint64_t packets_bad_version() const { return 0; }
};

class VectorSource : public ChunkSource {
  public:
    explicit VectorSource(std::vector<Chunk> chunks) : chunks_(std::move(chunks)) {}
    std::optional<Chunk> next() override;

  private:
    std::vector<Chunk> chunks_;
    std::size_t pos_ = 0;
};

// Generates chunks on demand, block by block, subbands then stations.
class GeneratorSource : public ChunkSource {
  public:
    GeneratorSource(std::shared_ptr<const StationGenerator> generator, int n_blocks);
    std::optional<Chunk> next() override;

  private:
    std::shared_ptr<const StationGenerator> generator_;
    int n_blocks_;
    std::int64_t pos_ = 0;
};

// Releases each chunk no earlier than the moment its block would be complete
// at the telescope, compressed by `speed` (2 = twice real time).
class PacedSource : public ChunkSource {
  public:
    PacedSource(ChunkSource& inner, double block_duration, double speed);
    std::optional<Chunk> next() override;
    void cancel() override;
    std::uint64_t samples_substituted() const override { return inner_.samples_substituted(); }
    std::uint64_t packets_bad_version() const override { return inner_.packets_bad_version(); }

  private:
    ChunkSource& inner_;
    double block_duration_;
    double speed_;
    std::optional<std::chrono::steady_clock::time_point> start_;
    std::mutex mutex_;
    std::condition_variable cv_;
    bool cancelled_ = false;
};

// ---- sinks -----------------------------------------------------------------

// Everything a writer needs to describe one output stream (one plan part).
struct PartInfo {
    int part = 0;
    BeamPart layout;
    int channels_per_subband = 0;
    int times_per_block = 0;      // after integration
    int integration = 1;
    int n_components_total = 0;   // of the beam's representation
    double sample_rate = 0.0;     // output samples per second per channel
    double channel_width = 0.0;
    double base_frequency = 0.0;  // centre of channel 0 of the first subband
    int subband_stride = 1;
    Vec3 direction{0.0, 0.0, 0.0};
    bool dedispersed = false;

    int n_channels() const { return layout.n_subbands * channels_per_subband; }
    std::size_t floats_per_block() const {
        return std::size_t(times_per_block) * n_channels() * layout.n_components;
    }
};

// One block of one stream, [time][channel][component].
struct OutputBlock {
    int part = 0;
    std::uint32_t block = 0;
    bool substituted = false;
    std::vector<float> data;
};

class BeamSink {
  public:
    virtual ~BeamSink() = default;
    virtual void write(const OutputBlock& block) = 0;
    virtual void finish() {}
    // Bytes that reached the destination, and whether a write failed there
    // (disk full).  Sinks that do not track either report 0 and false.
    virtual std::uint64_t bytes_delivered() const { return 0; }
    virtual bool failed() const { return false; }
};

using SinkFactory = std::function<std::unique_ptr<BeamSink>(const PartInfo&)>;

class NullSink : public BeamSink {
  public:
    void write(const OutputBlock&) override {}
};

// Keeps every block; thread-safe to inspect after the run.
class MemorySink : public BeamSink {
  public:
    void write(const OutputBlock& block) override;
    std::vector<OutputBlock> blocks() const;

  private:
    mutable std::mutex mutex_;
    std::vector<OutputBlock> blocks_;
};

// Limits an inner sink to bytes_per_second, measured from the first write.
class ThrottledSink : public BeamSink {
  public:
    ThrottledSink(std::unique_ptr<BeamSink> inner, double bytes_per_second);
    void write(const OutputBlock& block) override;
    void finish() override { inner_->finish(); }
    std::uint64_t bytes_delivered() const override { return inner_->bytes_delivered(); }
    bool failed() const override { return inner_->failed(); }

  private:
    std::unique_ptr<BeamSink> inner_;
    double bytes_per_second_;
    double bytes_ = 0.0;
    std::optional<std::chrono::steady_clock::time_point> start_;
};

// ---- reordering ------------------------------------------------------------

// chunks[i] holds subband first_subband + i of the beam (nullptr = missing,
// zero-filled).  Output: [time][subband, channel][component], components
// [first_component, first_component + n_components).  Sets *substituted when
// anything was missing.
std::vector<float> reorder_for_output(std::span<const BeamChunk* const> chunks,
                                      int first_component, int n_components,
                                      bool* substituted = nullptr);

// Inverse of reorder_for_output for a block holding every component.
std::vector<BeamChunk> split_output_block(std::span<const float> data, int n_subbands,
                                          int n_channels, int n_times, OutputMode representation);

// ---- run -------------------------------------------------------------------

struct StageSeconds {
    double shift = 0, channelize = 0, beamform = 0, dedisperse = 0, stokes = 0, assemble = 0,
           sink = 0;
};

struct RunStats {
    std::uint64_t chunks_in = 0;
    std::uint64_t chunks_late = 0;         // arrived after their block was dispatched
    std::uint64_t chunks_rejected = 0;     // wrong shape, out of range or duplicate
    std::uint64_t chunks_substituted = 0;  // (station, subband, block) zero-filled
    std::uint64_t samples_substituted = 0; // zero-filled by the source (lost packets)
    std::uint64_t packets_bad_version = 0;
    std::uint64_t work_items = 0;
    std::uint64_t blocks_out_attempted = 0;
    std::uint64_t blocks_out_delivered = 0;
    std::uint64_t blocks_out_dropped = 0;
    std::uint64_t blocks_out_substituted = 0;
    std::uint64_t bytes_delivered = 0;     // as reported by the sinks
    std::uint64_t sink_failures = 0;       // sinks whose destination failed
    double drop_fraction = 0.0;
    bool starved = false;
    int workers = 0;
    std::string isa;
    StageSeconds stage;
    double wall_seconds = 0.0;
};

std::string run_stats_text(const RunStats& stats);
std::string run_stats_json(const RunStats& stats);

struct PipelineOptions {
    int workers = 1;
    BlockSizes blocks{};
    kernels::Isa isa = kernels::detect_isa();
    // Block k is processed once a chunk of block k + deadline_blocks has
    // arrived (or the stream ended); its missing chunks are zero-filled.
    int deadline_blocks = 2;
    std::size_t ingest_capacity = 1024;
    std::size_t output_buffer_blocks = 64;  // per stream
    // Give up when no chunk arrives for this long (0 = wait forever).
    std::chrono::milliseconds starvation_timeout{0};
};

// PartInfo for every part of a plan.
std::vector<PartInfo> describe_parts(const ObservationConfig& config, const OutputPlan& plan);

// Runs the whole chain.  Throws ConfigError when the plan is infeasible or
// does not belong to this configuration.
RunStats run_pipeline(const ObservationConfig& config, const StationLayout& layout,
                      const OutputPlan& plan, ChunkSource& source, const SinkFactory& sinks,
                      const PipelineOptions& options = {});

} // namespace bf
