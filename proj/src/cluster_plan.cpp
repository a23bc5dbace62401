#include "bf/cluster_plan.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "bf/errors.hpp"

namespace bf {

namespace {

// Rates are integers in bits/s; this only absorbs rounding of parsed caps.
constexpr double kRateSlack = 1e-3;

bool fits(double load, double size, double cap) { return load + size <= cap + kRateSlack; }

struct PartShape {
    int first_component;
    int n_components;
};

std::vector<PartShape> part_shapes(OutputMode mode) {
    switch (mode) {
    case OutputMode::ComplexVoltages: return {{0, 2}, {2, 2}};
    case OutputMode::StokesIQUV: return {{0, 1}, {1, 1}, {2, 1}, {3, 1}};
    case OutputMode::StokesI: return {{0, 1}};
    }
    return {};
}

struct BeamSpec {
    OutputMode mode;
    int integration;
    bool incoherent;
};

std::string gbps(double rate) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", rate / kGbps);
    return buf;
}

OutputPlan plan_beams(const ClusterModel& cluster, const std::vector<BeamSpec>& beams,
                      OutputMode mode, int integration, int n_stations, int n_subbands) {
    cluster.validate();
    if (n_subbands < 1 || n_subbands > kMaxSubbands)
        throw RangeError("n_subbands must be in 1.." + std::to_string(kMaxSubbands));
    OutputPlan plan;
    plan.mode = mode;
    plan.integration_factor = integration;
    plan.n_beams = static_cast<int>(beams.size());
    plan.n_stations = n_stations;
    plan.n_subbands = n_subbands;
    plan.storage_cap = cluster.storage_cap;
    for (int n = 0; n < cluster.n_psets; ++n)
        plan.ionode_cap.push_back(cluster.ionode_cap(n, n_stations));
    plan.ionode_load.assign(plan.ionode_cap.size(), 0.0);

    for (const auto& b : beams)
        plan.total_rate += beam_rate(b.mode, b.integration, n_subbands);

    if (cluster.stations_per_ionode == 1 && n_stations > cluster.n_psets) {
        plan.reason = "more stations than I/O nodes";
        return plan;
    }
    if (!fits(0.0, plan.total_rate, cluster.storage_cap)) {
        plan.reason = "output " + gbps(plan.total_rate) + " Gb/s exceeds storage cap " +
                      gbps(cluster.storage_cap) + " Gb/s";
        return plan;
    }
    if (beams.empty()) {
        plan.feasible = true;
        plan.subband_split = 1;
        return plan;
    }

    for (int k = 1; k <= std::min(cluster.max_subband_split, n_subbands); ++k) {
        const int widest = (n_subbands + k - 1) / k;
        std::vector<BeamPart> parts;
        for (int b = 0; b < plan.n_beams; ++b) {
            const auto shapes = part_shapes(beams[b].mode);
            const double per_subband =
                beam_rate(beams[b].mode, beams[b].integration, 1) / double(shapes.size());
            for (const auto& shape : shapes) {
                int first = 0;
                for (int r = 0; r < k; ++r) {
                    const int len = n_subbands / k + (r < n_subbands % k ? 1 : 0);
                    BeamPart p;
                    p.beam = b;
                    p.mode = beams[b].mode;
                    p.incoherent = beams[b].incoherent;
                    p.first_component = shape.first_component;
                    p.n_components = shape.n_components;
                    p.first_subband = first;
                    p.n_subbands = len;
                    p.rate = per_subband * len;
                    p.reserved = per_subband * widest;
                    parts.push_back(p);
                    first += len;
                }
            }
        }
        std::vector<double> sizes(parts.size());
        for (std::size_t i = 0; i < parts.size(); ++i)
            sizes[i] = parts[i].reserved;
        const auto bins = pack_first_fit_decreasing(sizes, plan.ionode_cap);
        if (!bins)
            continue;
        std::vector<int> used(plan.ionode_cap.size(), 0);
        for (std::size_t i = 0; i < parts.size(); ++i) {
            const int node = (*bins)[i];
            parts[i].pset = node;
            parts[i].output_core = node * cluster.cores_per_pset + cluster.input_cores_per_pset() +
                                   used[node]++ % cluster.output_cores_per_pset;
            plan.ionode_load[node] += parts[i].reserved;
        }
        plan.parts = std::move(parts);
        plan.subband_split = k;
        plan.feasible = true;
        return plan;
    }
    plan.reason = "beam parts do not pack onto the I/O nodes with at most " +
                  std::to_string(cluster.max_subband_split) + " subband ranges per part";
    return plan;
}

} // namespace

void ClusterModel::validate() const {
    auto fail = [](const std::string& field, const std::string& what) {
        throw ConfigError("cluster." + field + ": " + what);
    };
    if (n_psets < 1)
        fail("n_psets", "must be >= 1");
    if (cores_per_pset < 2)
        fail("cores_per_pset", "must be >= 2");
    if (output_cores_per_pset < 1 || output_cores_per_pset >= cores_per_pset)
        fail("output_cores_per_pset", "must be in 1..cores_per_pset-1");
    if (!(ionode_output_cap_plain > 0))
        fail("ionode_output_cap_plain", "must be > 0");
    if (!(ionode_output_cap_with_station > 0))
        fail("ionode_output_cap_with_station", "must be > 0");
    if (ionode_output_cap_with_station > ionode_output_cap_plain)
        fail("ionode_output_cap_with_station", "must not exceed ionode_output_cap_plain");
    if (!(station_input_rate > 0))
        fail("station_input_rate", "must be > 0");
    if (!(storage_cap > 0))
        fail("storage_cap", "must be > 0");
    if (stations_per_ionode != 0 && stations_per_ionode != 1)
        fail("stations_per_ionode", "must be 0 or 1");
    if (max_subband_split < 1)
        fail("max_subband_split", "must be >= 1");
}

double ClusterModel::ionode_cap(int ionode, int n_stations) const {
    return stations_per_ionode == 1 && ionode < n_stations ? ionode_output_cap_with_station
                                                           : ionode_output_cap_plain;
}

bool ClusterModel::is_output_core(int core) const {
    return core >= 0 && core < n_psets * cores_per_pset &&
           core % cores_per_pset >= input_cores_per_pset();
}

double beam_rate(OutputMode mode, int integration_factor, int n_subbands) {
    if (integration_factor < 1)
        throw ConfigError("integration factor must be >= 1");
    if (mode != OutputMode::StokesI && integration_factor != 1)
        throw ConfigError("integration is only available for Stokes I");
    if (n_subbands < 0)
        throw RangeError("negative subband count");
    const double bytes = mode == OutputMode::StokesI ? 4.0 : 16.0;
    return n_subbands * kSubbandRate * bytes * 8.0 / integration_factor;
}

double station_input_rate_total(int n_stations, const ClusterModel& cluster) {
    if (n_stations < 1 || n_stations > kMaxStations)
        throw RangeError("station count must be in 1.." + std::to_string(kMaxStations));
    return n_stations * cluster.station_input_rate;
}

std::optional<std::vector<int>> pack_first_fit_decreasing(std::span<const double> sizes,
                                                          std::span<const double> capacities) {
    std::vector<std::size_t> order(sizes.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return sizes[a] > sizes[b]; });
    std::vector<double> load(capacities.size(), 0.0);
    std::vector<int> bin(sizes.size(), -1);
    for (std::size_t i : order) {
        for (std::size_t n = 0; n < capacities.size(); ++n)
            if (fits(load[n], sizes[i], capacities[n])) {
                load[n] += sizes[i];
                bin[i] = static_cast<int>(n);
                break;
            }
        if (bin[i] < 0)
            return std::nullopt;
    }
    return bin;
}

OutputPlan plan_output(const ClusterModel& cluster, const ObservationConfig& config) {
    std::vector<BeamSpec> beams(std::size_t(config.n_beams()),
                                {config.mode, config.integration_factor, false});
    if (config.include_incoherent) {
        const OutputMode m = incoherent_mode(config);
        beams.push_back({m, m == OutputMode::StokesI ? config.integration_factor : 1, true});
    }
    return plan_beams(cluster, beams, config.mode, config.integration_factor, config.n_stations,
                      config.n_subbands);
}

OutputPlan plan_output(const ClusterModel& cluster, OutputMode mode, int integration_factor,
                       int n_stations, int n_beams, int n_subbands) {
    std::vector<BeamSpec> beams(std::size_t(std::max(0, n_beams)),
                                {mode, integration_factor, false});
    return plan_beams(cluster, beams, mode, integration_factor, n_stations, n_subbands);
}

std::vector<std::string> validate_plan(const ClusterModel& cluster, const OutputPlan& plan) {
    std::vector<std::string> problems;
    if (!plan.feasible) {
        problems.push_back("plan is marked infeasible");
        return problems;
    }
    std::vector<double> load(std::size_t(cluster.n_psets), 0.0);
    double total = 0.0;
    // covered[beam][component][subband]
    std::vector<std::vector<std::vector<int>>> covered(std::size_t(plan.n_beams));
    for (std::size_t i = 0; i < plan.parts.size(); ++i) {
        const auto& p = plan.parts[i];
        const std::string tag = "part " + std::to_string(i) + ": ";
        if (p.pset < 0 || p.pset >= cluster.n_psets) {
            problems.push_back(tag + "pset out of range");
            continue;
        }
        if (p.output_core / cluster.cores_per_pset != p.pset)
            problems.push_back(tag + "output core outside its pset");
        if (!cluster.is_output_core(p.output_core))
            problems.push_back(tag + "output core is an input core");
        if (p.reserved + kRateSlack < p.rate)
            problems.push_back(tag + "reserves less than it sends");
        const double expect = beam_rate(p.mode, p.mode == OutputMode::StokesI
                                                    ? plan.integration_factor
                                                    : 1,
                                        p.n_subbands) *
                              p.n_components / components_per_sample(p.mode);
        if (std::abs(expect - p.rate) > kRateSlack)
            problems.push_back(tag + "rate does not match its components and subbands");
        load[p.pset] += p.reserved;
        total += p.rate;
        if (p.beam < 0 || p.beam >= plan.n_beams) {
            problems.push_back(tag + "beam out of range");
            continue;
        }
        auto& cov = covered[p.beam];
        if (cov.empty())
            cov.assign(std::size_t(components_per_sample(p.mode)),
                       std::vector<int>(std::size_t(plan.n_subbands), 0));
        for (int c = p.first_component; c < p.first_component + p.n_components; ++c)
            for (int s = p.first_subband; s < p.first_subband + p.n_subbands; ++s) {
                if (c < 0 || c >= int(cov.size()) || s < 0 || s >= plan.n_subbands) {
                    problems.push_back(tag + "component or subband out of range");
                    continue;
                }
                ++cov[c][s];
            }
    }
    for (int n = 0; n < cluster.n_psets; ++n)
        if (!fits(0.0, load[n], cluster.ionode_cap(n, plan.n_stations)))
            problems.push_back("I/O node " + std::to_string(n) + " over its cap");
    if (!fits(0.0, total, cluster.storage_cap))
        problems.push_back("total output exceeds the storage cap");
    for (int b = 0; b < plan.n_beams; ++b) {
        if (covered[b].empty()) {
            problems.push_back("beam " + std::to_string(b) + " has no parts");
            continue;
        }
        for (const auto& comp : covered[b])
            if (std::any_of(comp.begin(), comp.end(), [](int n) { return n != 1; })) {
                problems.push_back("beam " + std::to_string(b) +
                                   " has a component/subband not written exactly once");
                break;
            }
    }
    return problems;
}

int max_beams(const ClusterModel& cluster, OutputMode mode, int integration_factor, int n_stations,
              int n_subbands) {
    const double rate = beam_rate(mode, integration_factor, n_subbands);
    // Storage alone rules out hi beams; zero beams always fit.
    int lo = 0;
    int hi = static_cast<int>(std::floor(cluster.storage_cap / rate)) + 1;
    while (hi - lo > 1) {
        const int mid = lo + (hi - lo) / 2;
        if (plan_output(cluster, mode, integration_factor, n_stations, mid, n_subbands).feasible)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

int ExchangeMap::input_core(int station, int subband, int block) const {
    (void)block;
    if (station < 0 || station >= n_stations || subband < 0 || subband >= n_subbands)
        throw RangeError("station or subband outside the exchange map");
    return input_cores[std::size_t(subband) % input_cores.size()];
}

int ExchangeMap::output_core(int part, int subband, int block) const {
    (void)subband;
    (void)block;
    if (part < 0 || part >= static_cast<int>(part_output_core.size()))
        throw RangeError("part outside the exchange map");
    return part_output_core[part];
}

std::vector<int> ExchangeMap::subbands_per_core() const {
    std::vector<int> load(input_cores.size(), 0);
    for (int s = 0; s < n_subbands; ++s)
        ++load[std::size_t(s) % input_cores.size()];
    return load;
}

ExchangeMap plan_first_exchange(int n_stations, int n_subbands, std::vector<int> input_cores) {
    if (input_cores.empty())
        throw RangeError("at least one input core is required");
    if (n_stations < 0 || n_subbands < 0)
        throw RangeError("negative station or subband count");
    ExchangeMap m;
    m.n_stations = n_stations;
    m.n_subbands = n_subbands;
    m.input_cores = std::move(input_cores);
    return m;
}

ExchangeMap plan_first_exchange(int n_stations, int n_subbands, int n_input_cores) {
    if (n_input_cores < 1)
        throw RangeError("at least one input core is required");
    std::vector<int> cores(static_cast<std::size_t>(n_input_cores));
    std::iota(cores.begin(), cores.end(), 0);
    return plan_first_exchange(n_stations, n_subbands, std::move(cores));
}

ExchangeMap plan_exchanges(const ClusterModel& cluster, const OutputPlan& plan) {
    std::vector<int> cores;
    // Interleave psets so consecutive subbands land on different psets.
    for (int c = 0; c < cluster.input_cores_per_pset(); ++c)
        for (int p = 0; p < cluster.n_psets; ++p)
            cores.push_back(p * cluster.cores_per_pset + c);
    ExchangeMap m = plan_first_exchange(plan.n_stations, plan.n_subbands, std::move(cores));
    for (const auto& part : plan.parts)
        m.part_output_core.push_back(part.output_core);
    return m;
}

std::string plan_report(const OutputPlan& plan) {
    std::ostringstream os;
    os << "mode " << to_string(plan.mode);
    if (plan.mode == OutputMode::StokesI)
        os << "  integration " << plan.integration_factor;
    os << "  beams " << plan.n_beams << "  stations " << plan.n_stations << "  subbands "
       << plan.n_subbands << "\n";
    os << "feasible " << (plan.feasible ? "yes" : "no");
    if (!plan.feasible)
        os << " (" << plan.reason << ")";
    else
        os << "  subband ranges per part " << plan.subband_split;
    os << "\n";
    os << "output " << gbps(plan.total_rate) << " Gb/s of " << gbps(plan.storage_cap)
       << " Gb/s storage\n";
    if (!plan.feasible)
        return os.str();
    os << "parts " << plan.parts.size() << "\n";
    os << "ionode  cap_gbps  load_gbps  parts\n";
    for (std::size_t n = 0; n < plan.ionode_cap.size(); ++n) {
        const auto count = std::count_if(plan.parts.begin(), plan.parts.end(),
                                         [&](const BeamPart& p) { return p.pset == int(n); });
        if (count == 0)
            continue;
        char line[96];
        std::snprintf(line, sizeof line, "%6zu  %8.3f  %9.3f  %5ld\n", n, plan.ionode_cap[n] / kGbps,
                      plan.ionode_load[n] / kGbps, static_cast<long>(count));
        os << line;
    }
    os << "beam  components  subbands  rate_gbps  pset  core\n";
    for (const auto& p : plan.parts) {
        char line[128];
        std::snprintf(line, sizeof line, "%4d%s  %d..%d  %3d..%-3d  %9.4f  %4d  %4d\n", p.beam,
                      p.incoherent ? "i" : " ", p.first_component,
                      p.first_component + p.n_components - 1, p.first_subband,
                      p.first_subband + p.n_subbands - 1, p.rate / kGbps, p.pset, p.output_core);
        os << line;
    }
    return os.str();
}

std::string plan_to_json(const OutputPlan& plan) {
    using nlohmann::json;
    json j;
    j["format"] = "bf-output-plan";
    j["version"] = 1;
    j["feasible"] = plan.feasible;
    j["reason"] = plan.reason;
    j["mode"] = std::string(to_string(plan.mode));
    j["integration_factor"] = plan.integration_factor;
    j["n_beams"] = plan.n_beams;
    j["n_stations"] = plan.n_stations;
    j["n_subbands"] = plan.n_subbands;
    j["subband_split"] = plan.subband_split;
    j["total_rate_bps"] = plan.total_rate;
    j["storage_cap_bps"] = plan.storage_cap;
    j["ionode_cap_bps"] = plan.ionode_cap;
    j["ionode_load_bps"] = plan.ionode_load;
    json parts = json::array();
    for (const auto& p : plan.parts)
        parts.push_back({{"beam", p.beam},
                         {"mode", std::string(to_string(p.mode))},
                         {"incoherent", p.incoherent},
                         {"first_component", p.first_component},
                         {"n_components", p.n_components},
                         {"first_subband", p.first_subband},
                         {"n_subbands", p.n_subbands},
                         {"rate_bps", p.rate},
                         {"reserved_bps", p.reserved},
                         {"pset", p.pset},
                         {"output_core", p.output_core}});
    j["parts"] = parts;
    return j.dump(2) + "\n";
}

OutputPlan plan_from_json(const std::string& text) {
    using nlohmann::json;
    try {
        const json j = json::parse(text);
        if (j.at("format").get<std::string>() != "bf-output-plan")
            throw MalformedInputError("not an output plan");
        if (j.at("version").get<int>() != 1)
            throw MalformedInputError("unsupported plan version");
        OutputPlan plan;
        plan.feasible = j.at("feasible").get<bool>();
        plan.reason = j.at("reason").get<std::string>();
        plan.mode = parse_output_mode(j.at("mode").get<std::string>());
        plan.integration_factor = j.at("integration_factor").get<int>();
        plan.n_beams = j.at("n_beams").get<int>();
        plan.n_stations = j.at("n_stations").get<int>();
        plan.n_subbands = j.at("n_subbands").get<int>();
        plan.subband_split = j.at("subband_split").get<int>();
        plan.total_rate = j.at("total_rate_bps").get<double>();
        plan.storage_cap = j.at("storage_cap_bps").get<double>();
        plan.ionode_cap = j.at("ionode_cap_bps").get<std::vector<double>>();
        plan.ionode_load = j.at("ionode_load_bps").get<std::vector<double>>();
        for (const auto& jp : j.at("parts")) {
            BeamPart p;
            p.beam = jp.at("beam").get<int>();
            p.mode = parse_output_mode(jp.at("mode").get<std::string>());
            p.incoherent = jp.at("incoherent").get<bool>();
            p.first_component = jp.at("first_component").get<int>();
            p.n_components = jp.at("n_components").get<int>();
            p.first_subband = jp.at("first_subband").get<int>();
            p.n_subbands = jp.at("n_subbands").get<int>();
            p.rate = jp.at("rate_bps").get<double>();
            p.reserved = jp.at("reserved_bps").get<double>();
            p.pset = jp.at("pset").get<int>();
            p.output_core = jp.at("output_core").get<int>();
            plan.parts.push_back(p);
        }
        return plan;
    } catch (const json::exception& e) {
        throw MalformedInputError(std::string("output plan: ") + e.what());
    } catch (const ConfigError& e) {
        throw MalformedInputError(std::string("output plan: ") + e.what());
    }
}

} // namespace bf
