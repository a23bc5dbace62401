#include "bf/io/run_config.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "bf/errors.hpp"

namespace bf::io {

StationLayout random_layout(int n_stations, double radius, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    StationLayout layout;
    for (int s = 0; s < n_stations; ++s) {
        const double r = radius * std::sqrt(u(rng));
        const double a = 2.0 * std::numbers::pi * u(rng);
        layout.positions.push_back({r * std::cos(a), r * std::sin(a), 0.0});
    }
    return layout;
}

namespace {

int get_count(const IniFile& ini, const std::string& sec, const std::string& key, int fallback) {
    const long long v = ini.get_int(sec, key, fallback);
    if (v < INT32_MIN || v > INT32_MAX)
        ini.fail(sec, key, "out of range");
    return static_cast<int>(v);
}

Vec3 unit(const IniFile& ini, const std::string& sec, const std::string& key, Vec3 v) {
    const double n = norm(v);
    if (!(n > 0) || !std::isfinite(n))
        ini.fail(sec, key, "direction has zero length");
    return normalized(v);
}

// Re-runs a validator so its ConfigError carries the file and line of the
// offending key ("observation.n_channels: ..." -> that key's line).
template <typename F>
void validate_with_lines(const IniFile& ini, F&& validate) {
    try {
        validate();
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        const auto dot = msg.find('.');
        const auto colon = msg.find(':');
        if (dot != std::string::npos && colon != std::string::npos && dot < colon) {
            const std::string section = msg.substr(0, dot);
            std::string key = msg.substr(dot + 1, colon - dot - 1);
            if (key == "beam_directions")
                key = "beams";
            if (ini.has(section, key))
                ini.fail(section, key, msg.substr(colon + 2));
        }
        throw ConfigError(ini.name() + ": " + msg);
    }
}

} // namespace

RunConfig parse_run_config(const IniFile& ini) {
    ini.require_sections({"observation", "stations", "pulsar", "cluster", "pipeline"});
    ini.require_known("observation",
                      {"n_stations", "n_subbands", "subband_width", "base_frequency",
                       "subband_stride", "n_channels", "mode", "integration_factor", "beams",
                       "dedisperse", "dm", "dedispersion_fft_size", "include_incoherent",
                       "samples_per_chunk", "n_blocks"});
    ini.require_known("stations", {"positions", "radius", "seed"});
    ini.require_known("pulsar", {"period", "duty_cycle", "amplitude", "dm", "direction",
                                 "center_frequency", "epoch", "noise_sigma", "seed"});
    ini.require_known("cluster", {"n_psets", "cores_per_pset", "output_cores_per_pset",
                                  "ionode_output_cap_plain", "ionode_output_cap_with_station",
                                  "station_input_rate", "storage_cap", "stations_per_ionode",
                                  "max_subband_split"});
    ini.require_known("pipeline", {"workers", "deadline_blocks", "ingest_capacity",
                                   "output_buffer_blocks", "starvation_timeout_ms", "isa",
                                   "block_stations", "block_times", "block_beams"});

    RunConfig rc;
    auto& o = rc.observation;
    const std::string obs = "observation";
    o.n_stations = get_count(ini, obs, "n_stations", o.n_stations);
    o.n_subbands = get_count(ini, obs, "n_subbands", o.n_subbands);
    o.subband_width = ini.get_double(obs, "subband_width", o.subband_width);
    o.base_frequency = ini.get_double(obs, "base_frequency", o.base_frequency);
    o.subband_stride = get_count(ini, obs, "subband_stride", o.subband_stride);
    o.n_channels = get_count(ini, obs, "n_channels", o.n_channels);
    if (ini.has(obs, "mode")) {
        try {
            o.mode = parse_output_mode(ini.get_string(obs, "mode", ""));
        } catch (const ConfigError& e) {
            ini.fail(obs, "mode", e.what());
        }
    }
    o.integration_factor = get_count(ini, obs, "integration_factor", o.integration_factor);
    for (const auto& v : ini.get_vectors(obs, "beams"))
        o.beam_directions.push_back(unit(ini, obs, "beams", v));
    o.dedisperse = ini.get_bool(obs, "dedisperse", o.dedisperse);
    o.dm = ini.get_double(obs, "dm", o.dm);
    o.dedispersion_fft_size = get_count(ini, obs, "dedispersion_fft_size", o.dedispersion_fft_size);
    o.include_incoherent = ini.get_bool(obs, "include_incoherent", o.include_incoherent);
    o.samples_per_chunk = get_count(ini, obs, "samples_per_chunk", o.samples_per_chunk);
    o.n_blocks = get_count(ini, obs, "n_blocks", o.n_blocks);
    validate_with_lines(ini, [&] { o.validate(); });

    const auto positions = ini.get_vectors("stations", "positions");
    if (!positions.empty()) {
        if (static_cast<int>(positions.size()) != o.n_stations)
            ini.fail("stations", "positions",
                     std::to_string(positions.size()) + " positions for " +
                         std::to_string(o.n_stations) + " stations");
        rc.layout.positions = positions;
    } else {
        const double radius = ini.get_double("stations", "radius", 0.0);
        if (!(radius >= 0))
            ini.fail("stations", "radius", "must be >= 0");
        const long long seed = ini.get_int("stations", "seed", 1);
        rc.layout = random_layout(o.n_stations, radius, static_cast<std::uint64_t>(seed));
    }

    auto& p = rc.pulsar;
    const std::string pul = "pulsar";
    p.period = ini.get_double(pul, "period", p.period);
    p.duty_cycle = ini.get_double(pul, "duty_cycle", p.duty_cycle);
    p.amplitude = ini.get_double(pul, "amplitude", p.amplitude);
    p.dm = ini.get_double(pul, "dm", p.dm);
    if (ini.has(pul, "direction")) {
        const auto dirs = ini.get_vectors(pul, "direction");
        if (dirs.size() != 1)
            ini.fail(pul, "direction", "expected one x,y,z triple");
        p.source_direction = unit(ini, pul, "direction", dirs[0]);
    } else if (!o.beam_directions.empty()) {
        p.source_direction = o.beam_directions[0];
    }
    p.center_frequency = ini.get_double(pul, "center_frequency", p.center_frequency);
    p.epoch = ini.get_double(pul, "epoch", p.epoch);
    p.noise_sigma = ini.get_double(pul, "noise_sigma", p.noise_sigma);
    p.seed = static_cast<std::uint64_t>(ini.get_int(pul, "seed", static_cast<long long>(p.seed)));
    validate_with_lines(ini, [&] { p.validate(); });

    auto& c = rc.cluster;
    const std::string clu = "cluster";
    c.n_psets = get_count(ini, clu, "n_psets", c.n_psets);
    c.cores_per_pset = get_count(ini, clu, "cores_per_pset", c.cores_per_pset);
    c.output_cores_per_pset = get_count(ini, clu, "output_cores_per_pset", c.output_cores_per_pset);
    auto gbps = [&](const std::string& key, double fallback) {
        return std::round(ini.get_double(clu, key, fallback / kGbps) * kGbps);
    };
    c.ionode_output_cap_plain = gbps("ionode_output_cap_plain", c.ionode_output_cap_plain);
    c.ionode_output_cap_with_station =
        gbps("ionode_output_cap_with_station", c.ionode_output_cap_with_station);
    c.station_input_rate = gbps("station_input_rate", c.station_input_rate);
    c.storage_cap = gbps("storage_cap", c.storage_cap);
    c.stations_per_ionode = get_count(ini, clu, "stations_per_ionode", c.stations_per_ionode);
    c.max_subband_split = get_count(ini, clu, "max_subband_split", c.max_subband_split);
    validate_with_lines(ini, [&] { c.validate(); });

    auto& q = rc.pipeline;
    const std::string pip = "pipeline";
    q.workers = get_count(ini, pip, "workers", q.workers);
    if (q.workers < 1)
        ini.fail(pip, "workers", "must be >= 1");
    q.deadline_blocks = get_count(ini, pip, "deadline_blocks", q.deadline_blocks);
    if (q.deadline_blocks < 0)
        ini.fail(pip, "deadline_blocks", "must be >= 0");
    const int ingest = get_count(ini, pip, "ingest_capacity", static_cast<int>(q.ingest_capacity));
    if (ingest < 1)
        ini.fail(pip, "ingest_capacity", "must be >= 1");
    q.ingest_capacity = std::size_t(ingest);
    const int out = get_count(ini, pip, "output_buffer_blocks", static_cast<int>(q.output_buffer_blocks));
    if (out < 1)
        ini.fail(pip, "output_buffer_blocks", "must be >= 1");
    q.output_buffer_blocks = std::size_t(out);
    const int starve = get_count(ini, pip, "starvation_timeout_ms", 0);
    if (starve < 0)
        ini.fail(pip, "starvation_timeout_ms", "must be >= 0");
    q.starvation_timeout = std::chrono::milliseconds(starve);
    const std::string isa = ini.get_string(pip, "isa", "auto");
    if (isa == "scalar")
        q.isa = kernels::Isa::Scalar;
    else if (isa == "avx2") {
        if (!kernels::isa_supported(kernels::Isa::Avx2))
            ini.fail(pip, "isa", "AVX2 is not available on this CPU");
        q.isa = kernels::Isa::Avx2;
    } else if (isa == "auto")
        q.isa = kernels::detect_isa();
    else
        ini.fail(pip, "isa", "expected auto, scalar or avx2");
    q.blocks.stations = get_count(ini, pip, "block_stations", q.blocks.stations);
    q.blocks.times = get_count(ini, pip, "block_times", q.blocks.times);
    q.blocks.beams = get_count(ini, pip, "block_beams", q.blocks.beams);
    for (const char* key : {"block_stations", "block_times", "block_beams"})
        if (ini.get_int(pip, key, 1) < 1)
            ini.fail(pip, key, "must be >= 1");
    return rc;
}

RunConfig load_run_config(const std::string& path) {
    return parse_run_config(IniFile::load(path));
}

} // namespace bf::io
