#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bf/config.hpp"
#include "bf/types.hpp"

namespace bf {

// Rates throughout are bits per second.  All rates this module produces are
// whole numbers, so doubles hold them exactly.
constexpr double kGbps = 1e9;

// A BG/P-style partition: one I/O node per pset.  The first n_stations I/O
// nodes (when stations_per_ionode is 1) also receive a station stream and
// are left with the smaller output cap.
struct ClusterModel {
    int n_psets = 64;
    int cores_per_pset = 64;
    int output_cores_per_pset = 16;  // the last cores of each pset
    double ionode_output_cap_plain = 3.1e9;
    double ionode_output_cap_with_station = 1.1e9;
    double station_input_rate = 3.1e9;
    double storage_cap = 81e9;
    int stations_per_ionode = 1;     // 0 or 1
    int max_subband_split = 3;

    // Throws ConfigError naming the offending field.
    void validate() const;

    int input_cores_per_pset() const { return cores_per_pset - output_cores_per_pset; }
    int n_input_cores() const { return n_psets * input_cores_per_pset(); }
    double ionode_cap(int ionode, int n_stations) const;
    bool is_output_core(int core) const;
};

// Output rate of one beam over n_subbands subbands: 16 bytes per sample for
// voltages and full Stokes, 4 bytes per integrated sample for Stokes I.
// Throws ConfigError for integration != 1 outside Stokes I (or < 1).
double beam_rate(OutputMode mode, int integration_factor, int n_subbands);

// 3.1 Gb/s per station; RangeError outside 1..64.
double station_input_rate_total(int n_stations, const ClusterModel& cluster = {});

// One stream of a split beam: a component range of one beam over a
// contiguous subband range, written by one output core to one I/O node.
struct BeamPart {
    int beam = 0;
    OutputMode mode = OutputMode::ComplexVoltages;
    bool incoherent = false;
    int first_component = 0;  // float components of a sample, see BeamChunk
    int n_components = 0;
    int first_subband = 0;
    int n_subbands = 0;
    double rate = 0.0;        // actual output rate
    double reserved = 0.0;    // bandwidth held on the I/O node
    int pset = 0;             // == I/O node
    int output_core = 0;      // global core index
};

struct OutputPlan {
    bool feasible = false;
    std::string reason;        // why not, when infeasible
    OutputMode mode = OutputMode::ComplexVoltages;
    int integration_factor = 1;
    int n_beams = 0;           // output beams, incoherent included
    int n_stations = 0;
    int n_subbands = 0;
    int subband_split = 0;     // contiguous subband ranges per part
    std::vector<BeamPart> parts;
    std::vector<double> ionode_load;  // reserved bandwidth per I/O node
    std::vector<double> ionode_cap;
    double total_rate = 0.0;
    double storage_cap = 0.0;
};

// First-fit-decreasing: items in decreasing size (ties by index) go to the
// lowest-indexed bin with room.  Returns the bin of each item, or nullopt.
std::optional<std::vector<int>> pack_first_fit_decreasing(std::span<const double> sizes,
                                                          std::span<const double> capacities);

// Beams split into one part per polarisation (voltages) or Stokes component,
// then every part into k contiguous subband ranges, for the smallest
// k <= max_subband_split that packs.  Infeasibility is a result, not an error.
OutputPlan plan_output(const ClusterModel& cluster, const ObservationConfig& config);

// Plan for n identical beams of one mode (no incoherent beam).
OutputPlan plan_output(const ClusterModel& cluster, OutputMode mode, int integration_factor,
                       int n_stations, int n_beams, int n_subbands = kMaxSubbands);

// Re-checks a plan without trusting the packer: caps, storage, pset-local
// output cores disjoint from input cores, and that every
// (beam, component, subband) is written exactly once.  Returns the problems.
std::vector<std::string> validate_plan(const ClusterModel& cluster, const OutputPlan& plan);

// Largest beam count whose plan is feasible.
int max_beams(const ClusterModel& cluster, OutputMode mode, int integration_factor, int n_stations,
              int n_subbands = kMaxSubbands);

// Which core collects each (station, subband, block) chunk, and which output
// core writes each plan part.
struct ExchangeMap {
    int n_stations = 0;
    int n_subbands = 0;
    std::vector<int> input_cores;        // global core ids, round-robin targets
    std::vector<int> part_output_core;   // per OutputPlan part

    int input_core(int station, int subband, int block) const;
    int output_core(int part, int subband, int block) const;
    std::vector<int> subbands_per_core() const;
};

// Subband i goes to input_cores[i % size]; all stations of a subband meet
// there.  Throws RangeError for an empty core list.
ExchangeMap plan_first_exchange(int n_stations, int n_subbands, std::vector<int> input_cores);
ExchangeMap plan_first_exchange(int n_stations, int n_subbands, int n_input_cores);
ExchangeMap plan_exchanges(const ClusterModel& cluster, const OutputPlan& plan);

std::string plan_report(const OutputPlan& plan);
std::string plan_to_json(const OutputPlan& plan);
// Throws MalformedInputError for anything that does not parse as a plan.
OutputPlan plan_from_json(const std::string& text);

} // namespace bf
