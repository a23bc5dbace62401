// bfpipe: generate station data, plan the output side, run the beam former,
// fold pulse profiles.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "bf/cluster_plan.hpp"
#include "bf/errors.hpp"
#include "bf/io/beam_file.hpp"
#include "bf/io/profile.hpp"
#include "bf/io/run_config.hpp"
#include "bf/io/station_file.hpp"
#include "bf/io/udp.hpp"
#include "bf/pipeline.hpp"
#include "bf/stationgen.hpp"

namespace fs = std::filesystem;
using namespace bf;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitBadConfig = 3;

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw Error(path + ": cannot open");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!(out << text))
        throw Error(path + ": cannot write");
}

std::pair<std::string, std::uint16_t> split_endpoint(const std::string& endpoint) {
    const auto colon = endpoint.rfind(':');
    if (colon == std::string::npos)
        throw ConfigError("expected HOST:PORT, got '" + endpoint + "'");
    const int port = std::stoi(endpoint.substr(colon + 1));
    if (port <= 0 || port > 65535)
        throw ConfigError("port out of range in '" + endpoint + "'");
    return {endpoint.substr(0, colon), static_cast<std::uint16_t>(port)};
}

struct GenerateArgs {
    std::string config, out_dir, udp;
    int blocks = -1;
    double speed = 0, loss = 0, packet_rate = 0;
    int samples_per_packet = io::kDefaultSamplesPerPacket;
};

int cmd_generate(const GenerateArgs& a) {
    const auto rc = io::load_run_config(a.config);
    const auto& obs = rc.observation;
    const int blocks = a.blocks >= 0 ? a.blocks : obs.n_blocks;
    auto gen = std::make_shared<const StationGenerator>(rc.pulsar, rc.layout, obs);

    if (!a.udp.empty()) {
        const auto [host, port] = split_endpoint(a.udp);
        io::UdpSender sender(host, port);
        GeneratorSource src(gen, blocks);
        std::unique_ptr<PacedSource> paced;
        ChunkSource* feed = &src;
        if (a.speed > 0) {
            paced = std::make_unique<PacedSource>(src, obs.block_duration(), a.speed);
            feed = paced.get();
        }
        io::SendOptions opt;
        opt.samples_per_packet = a.samples_per_packet;
        opt.loss_probability = a.loss;
        opt.max_packets_per_second = a.packet_rate;
        opt.n_stations = obs.n_stations;
        opt.seed = rc.pulsar.seed;
        const auto s = io::send_stream(*feed, sender, opt);
        std::printf("sent %llu packets, dropped %llu (%llu samples) to %s\n",
                    static_cast<unsigned long long>(s.packets_sent),
                    static_cast<unsigned long long>(s.packets_dropped),
                    static_cast<unsigned long long>(s.samples_dropped), a.udp.c_str());
        return kExitOk;
    }

    if (a.out_dir.empty())
        throw ConfigError("generate needs --out or --udp");
    fs::create_directories(a.out_dir);
    for (int s = 0; s < obs.n_stations; ++s) {
        std::vector<Chunk> chunks;
        for (int b = 0; b < blocks; ++b)
            for (int sb = 0; sb < obs.n_subbands; ++sb)
                chunks.push_back(gen->generate_chunk(s, sb, b));
        io::StationFileHeader h;
        h.station = static_cast<std::uint16_t>(s);
        h.n_subbands = static_cast<std::uint32_t>(obs.n_subbands);
        h.samples_per_chunk = static_cast<std::uint32_t>(obs.chunk_samples());
        h.n_blocks = static_cast<std::uint32_t>(blocks);
        h.sample_rate = obs.subband_width;
        const auto path = (fs::path(a.out_dir) / io::station_file_name(s)).string();
        io::write_station_file(path, h, chunks);
        std::printf("%s  %d blocks x %d subbands\n", path.c_str(), blocks, obs.n_subbands);
    }
    return kExitOk;
}

struct PlanArgs {
    std::string config, json;
    bool max = false;
};

int cmd_plan(const PlanArgs& a) {
    const auto rc = io::load_run_config(a.config);
    const auto plan = plan_output(rc.cluster, rc.observation);
    std::printf("stations %d  input %.1f Gb/s\n", rc.observation.n_stations,
                station_input_rate_total(rc.observation.n_stations, rc.cluster) / kGbps);
    std::fputs(plan_report(plan).c_str(), stdout);
    if (plan.feasible) {
        const auto problems = validate_plan(rc.cluster, plan);
        for (const auto& p : problems)
            std::printf("validator: %s\n", p.c_str());
        if (!problems.empty())
            return kExitFailure;
    }
    if (a.max)
        std::printf("max beams (%s) %d\n", std::string(to_string(rc.observation.mode)).c_str(),
                    max_beams(rc.cluster, rc.observation.mode, rc.observation.integration_factor,
                              rc.observation.n_stations, rc.observation.n_subbands));
    if (!a.json.empty())
        write_text(a.json, plan_to_json(plan));
    return plan.feasible ? kExitOk : kExitInfeasible;
}

struct RunArgs {
    std::string config, plan, input, out_dir, stats_json;
    int listen = -1;
    int workers = 0;
    double speed = 0, sink_rate = 0;
    int idle_ms = 2000;
};

int cmd_run(const RunArgs& a) {
    auto rc = io::load_run_config(a.config);
    if (a.workers > 0)
        rc.pipeline.workers = a.workers;
    const auto plan = a.plan.empty() ? plan_output(rc.cluster, rc.observation)
                                     : plan_from_json(read_text(a.plan));
    if (!plan.feasible) {
        std::fprintf(stderr, "plan infeasible: %s\n", plan.reason.c_str());
        return kExitInfeasible;
    }
    if (a.out_dir.empty())
        throw ConfigError("run needs --out");
    fs::create_directories(a.out_dir);

    std::unique_ptr<ChunkSource> base;
    if (a.listen >= 0) {
        io::ReceiveOptions opt;
        opt.deadline_blocks = rc.pipeline.deadline_blocks;
        opt.idle_timeout = std::chrono::milliseconds(a.idle_ms);
        auto udp = std::make_unique<io::UdpChunkSource>(static_cast<std::uint16_t>(a.listen),
                                                        rc.observation, opt);
        std::fprintf(stderr, "listening on 127.0.0.1:%u\n", udp->port());
        base = std::move(udp);
    } else if (!a.input.empty()) {
        base = std::make_unique<io::StationFileSource>(a.input, rc.observation);
    } else {
        throw ConfigError("run needs --input or --listen");
    }
    std::unique_ptr<PacedSource> paced;
    ChunkSource* source = base.get();
    if (a.speed > 0) {
        paced = std::make_unique<PacedSource>(*base, rc.observation.block_duration(), a.speed);
        source = paced.get();
    }

    // The pipeline owns and destroys its sinks; keep the files alive for the report.
    struct Shared : BeamSink {
        std::shared_ptr<io::BeamFileSink> file;
        void write(const OutputBlock& b) override { file->write(b); }
        void finish() override { file->finish(); }
        std::uint64_t bytes_delivered() const override { return file->bytes_delivered(); }
        bool failed() const override { return file->failed(); }
    };
    std::vector<std::shared_ptr<io::BeamFileSink>> files;
    std::mutex files_mutex;
    SinkFactory factory = [&](const PartInfo& part) -> std::unique_ptr<BeamSink> {
        const auto path = (fs::path(a.out_dir) / io::beam_file_name(part)).string();
        auto file = std::make_unique<Shared>();
        file->file = std::make_shared<io::BeamFileSink>(path, part);
        {
            std::lock_guard lock(files_mutex);
            files.push_back(file->file);
        }
        if (a.sink_rate > 0)
            return std::make_unique<ThrottledSink>(std::move(file), a.sink_rate);
        return file;
    };
    const auto stats = run_pipeline(rc.observation, rc.layout, plan, *source, factory, rc.pipeline);
    std::fputs(run_stats_text(stats).c_str(), stdout);
    for (const auto& f : files)
        std::printf("%s  %llu bytes%s\n", f->path().c_str(),
                    static_cast<unsigned long long>(f->bytes_delivered()),
                    f->failed() ? "  (write failed)" : "");
    if (!a.stats_json.empty())
        write_text(a.stats_json, run_stats_json(stats));
    return kExitOk;
}

struct ProfileArgs {
    std::string beam, csv;
    double period = 0, dm = 0;
    int bins = 64, component = 0;
    std::vector<int> channels;
};

int cmd_profile(const ProfileArgs& a) {
    const auto file = io::read_beam_file(a.beam);
    io::FoldOptions opt;
    opt.n_bins = a.bins;
    opt.dm = a.dm;
    opt.channels = a.channels;
    opt.component = a.component;
    const auto profile = io::fold_profile(file, a.period, opt);
    const auto w = io::measure_fwhm(profile, a.period);
    if (!a.csv.empty())
        write_text(a.csv, io::profile_csv(profile));
    else
        std::fputs(io::profile_csv(profile).c_str(), stdout);
    std::fprintf(a.csv.empty() ? stderr : stdout,
                 "samples %zu  bins %d  peak bin %d  fwhm %.3f bins = %.6f ms\n", file.n_times(),
                 a.bins, w.peak_bin, w.width_bins, w.width_seconds * 1e3);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"LOFAR-style tied-array beam former"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* g = app.add_subcommand("generate", "write synthetic station streams (files or UDP)");
    g->add_option("-c,--config", gen.config, "configuration file")->required();
    g->add_option("-o,--out", gen.out_dir, "directory for station_<s>.raw files");
    g->add_option("--udp", gen.udp, "send packets to HOST:PORT instead of writing files");
    g->add_option("--blocks", gen.blocks, "blocks to generate (default observation.n_blocks)");
    g->add_option("--speed", gen.speed, "UDP pacing, multiple of real time (0 = unpaced)");
    g->add_option("--loss", gen.loss, "probability of deliberately dropping a packet");
    g->add_option("--packet-rate", gen.packet_rate, "cap on packets per second (0 = none)");
    g->add_option("--samples-per-packet", gen.samples_per_packet, "payload samples per packet");

    PlanArgs plan;
    auto* p = app.add_subcommand("plan", "plan the output side; exit 2 when infeasible");
    p->add_option("-c,--config", plan.config, "configuration file")->required();
    p->add_option("--json", plan.json, "write the plan as JSON");
    p->add_flag("--max-beams", plan.max, "also report the largest feasible beam count");

    RunArgs run;
    auto* r = app.add_subcommand("run", "run the beam former");
    r->add_option("-c,--config", run.config, "configuration file")->required();
    r->add_option("--plan", run.plan, "plan JSON from 'plan --json' (default: plan now)");
    r->add_option("-i,--input", run.input, "directory with station_<s>.raw files");
    r->add_option("--listen", run.listen, "receive station packets on this UDP port (0 = any)");
    r->add_option("--idle-ms", run.idle_ms, "UDP: end the stream after this much silence");
    r->add_option("-o,--out", run.out_dir, "directory for beam files")->required();
    r->add_option("--stats", run.stats_json, "write run statistics as JSON");
    r->add_option("-w,--workers", run.workers, "worker threads (overrides pipeline.workers)");
    r->add_option("--speed", run.speed, "pace file input at this multiple of real time");
    r->add_option("--sink-rate", run.sink_rate, "throttle each output stream to bytes/s");

    ProfileArgs prof;
    auto* f = app.add_subcommand("profile", "fold a beam file into a pulse profile");
    f->add_option("-b,--beam", prof.beam, "beam file")->required();
    f->add_option("-p,--period", prof.period, "pulse period, seconds")->required();
    f->add_option("--bins", prof.bins, "phase bins");
    f->add_option("--dm", prof.dm, "align channels for this dispersion measure");
    f->add_option("--channel", prof.channels, "file channel(s) to fold (default all)");
    f->add_option("--component", prof.component, "component to fold (0 = I)");
    f->add_option("--csv", prof.csv, "write phase,power CSV here (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (g->parsed())
            return cmd_generate(gen);
        if (p->parsed())
            return cmd_plan(plan);
        if (r->parsed())
            return cmd_run(run);
        if (f->parsed())
            return cmd_profile(prof);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitBadConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitFailure;
    }
    return kExitFailure;
}
