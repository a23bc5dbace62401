#pragma once

#include <string>

#include "bf/cluster_plan.hpp"
#include "bf/config.hpp"
#include "bf/io/ini.hpp"
#include "bf/pipeline.hpp"
#include "bf/stationgen.hpp"

namespace bf::io {

// Everything the command-line tools read from one configuration file:
//
//   [observation]  n_stations n_subbands subband_width base_frequency
//                  subband_stride n_channels mode integration_factor beams
//                  dedisperse dm dedispersion_fft_size include_incoherent
//                  samples_per_chunk n_blocks
//   [stations]     positions  |  radius seed   (random layout in a disc)
//   [pulsar]       period duty_cycle amplitude dm direction center_frequency
//                  epoch noise_sigma seed
//   [cluster]      n_psets cores_per_pset output_cores_per_pset
//                  ionode_output_cap_plain ionode_output_cap_with_station
//                  station_input_rate storage_cap (Gb/s) stations_per_ionode
//                  max_subband_split
//   [pipeline]     workers deadline_blocks ingest_capacity
//                  output_buffer_blocks starvation_timeout_ms isa
//                  block_stations block_times block_beams
//
// Frequencies are Hz.  Directions are "x,y,z" triples separated by ';' and
// are normalised on load.
struct RunConfig {
    ObservationConfig observation;
    StationLayout layout;
    PulsarScenario pulsar;
    ClusterModel cluster;
    PipelineOptions pipeline;
};

// Throws ConfigError "<file>:<line>: <section>.<key>: ..." for anything
// malformed, unknown or out of range.
RunConfig parse_run_config(const IniFile& ini);
RunConfig load_run_config(const std::string& path);

// Uniformly random station positions in a disc of `radius` metres (z = 0).
StationLayout random_layout(int n_stations, double radius, std::uint64_t seed);

} // namespace bf::io
