// Command-line front end: analytical models, channel planning, and the
// mesh interconnect simulator, emitting CSV/JSON datasets.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qnet/channel.hpp"
#include "qnet/fidelity.hpp"
#include "qnet/purification.hpp"
#include "qnet/simulator.hpp"
#include "qnet/sweep.hpp"
#include "qnet/workloads.hpp"

namespace fs = std::filesystem;
using namespace qnet;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitInfeasible = 3;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

struct Cell {
    std::string text;
    Cell(const char* s) : text(s) {}
    Cell(const std::string& s) : text(s) {}
    Cell(double v) : text(format_double(v)) {}
    Cell(int v) : text(std::to_string(v)) {}
    Cell(long long v) : text(std::to_string(v)) {}
    Cell(unsigned long long v) : text(std::to_string(v)) {}
    Cell(bool v) : text(v ? "true" : "false") {}
};

// CSV with '#' provenance lines, mirrored as JSON records on request.
struct DatasetWriter {
    fs::path out_dir = ".";
    bool json = false;
    std::string command_line;

    void write(const std::string& name, const std::vector<std::string>& meta,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<Cell>>& rows) const {
        fs::create_directories(out_dir);
        const fs::path csv_path = out_dir / (name + ".csv");
        std::ofstream csv(csv_path);
        if (!csv) throw std::runtime_error("cannot write " + csv_path.string());
        csv << "# command: " << command_line << "\n";
        for (const auto& m : meta) csv << "# " << m << "\n";
        for (size_t c = 0; c < columns.size(); ++c)
            csv << columns[c] << (c + 1 < columns.size() ? "," : "\n");
        for (const auto& row : rows) {
            for (size_t c = 0; c < row.size(); ++c)
                csv << row[c].text << (c + 1 < row.size() ? "," : "\n");
        }
        csv.close();
        std::cout << "wrote " << csv_path.string() << " (" << rows.size() << " rows)\n";

        if (json) {
            nlohmann::ordered_json doc;
            doc["command"] = command_line;
            doc["meta"] = meta;
            auto records = nlohmann::ordered_json::array();
            for (const auto& row : rows) {
                nlohmann::ordered_json rec;
                for (size_t c = 0; c < row.size(); ++c) rec[columns[c]] = row[c].text;
                records.push_back(rec);
            }
            doc["rows"] = records;
            const fs::path json_path = out_dir / (name + ".json");
            std::ofstream js(json_path);
            js << doc.dump(2) << "\n";
            std::cout << "wrote " << json_path.string() << "\n";
        }
    }
};

std::vector<DistanceCells> parse_distance_range(const std::string& spec) {
    long long lo = 0, hi = 0, step = 0;
    if (std::sscanf(spec.c_str(), "%lld:%lld:%lld", &lo, &hi, &step) != 3 || step <= 0 ||
        lo < 0 || hi < lo)
        throw CLI::ValidationError("--distances", "expected lo:hi:step with step > 0");
    std::vector<DistanceCells> out;
    for (long long d = lo; d <= hi; d += step) out.push_back(d);
    return out;
}

// Either a comma list of rates or lo:hi:points-per-decade on a log grid.
std::vector<double> parse_rate_grid(const std::string& spec) {
    std::vector<double> out;
    if (spec.find(':') != std::string::npos) {
        double lo, hi;
        int ppd;
        if (std::sscanf(spec.c_str(), "%lf:%lf:%d", &lo, &hi, &ppd) != 3 || lo <= 0 ||
            hi < lo || ppd < 1)
            throw CLI::ValidationError("--rates", "expected lo:hi:points-per-decade");
        const double lo_exp = std::log10(lo);
        const double hi_exp = std::log10(hi);
        for (int k = 0;; ++k) {
            const double e = lo_exp + static_cast<double>(k) / ppd;
            if (e > hi_exp + 1e-9) break;
            out.push_back(std::pow(10.0, e));
        }
        return out;
    }
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw CLI::ValidationError("--rates", "malformed rate \"" + item + "\"");
        }
    }
    if (out.empty()) throw CLI::ValidationError("--rates", "empty rate list");
    return out;
}

std::vector<double> parse_double_list(const std::string& spec, const char* flag) {
    std::vector<double> out;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw CLI::ValidationError(flag, "malformed number \"" + item + "\"");
        }
    }
    if (out.empty()) throw CLI::ValidationError(flag, "empty list");
    return out;
}

std::vector<int> parse_int_list(const std::string& spec, const char* flag) {
    std::vector<int> out;
    for (double v : parse_double_list(spec, flag)) out.push_back(static_cast<int>(v));
    return out;
}

PlacementScheme parse_scheme(const std::string& name) {
    if (name == "endpoints-only") return PlacementScheme::EndpointsOnly;
    if (name == "virtual-wire") return PlacementScheme::VirtualWirePlusEndpoints;
    if (name == "between-teleports") return PlacementScheme::BetweenTeleports;
    if (name == "between-teleports-virtual-wire")
        return PlacementScheme::BetweenTeleportsPlusVirtualWire;
    throw CLI::ValidationError("--scheme", "unknown scheme \"" + name + "\"");
}

Protocol parse_protocol(const std::string& name) {
    if (name == "dejmps") return Protocol::DEJMPS;
    if (name == "bbpssw") return Protocol::BBPSSW;
    throw CLI::ValidationError("--protocol", "unknown protocol \"" + name + "\"");
}

ParameterSet load_params(const std::string& path) {
    if (path.empty()) return default_ion_trap();
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read params file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return load_config(buf.str());
}

struct GridSpec {
    int rows = 16;
    int cols = 16;
};

GridSpec parse_grid(const std::string& spec) {
    GridSpec g;
    if (std::sscanf(spec.c_str(), "%dx%d", &g.rows, &g.cols) != 2 || g.rows < 1 || g.cols < 1)
        throw CLI::ValidationError("--grid", "expected RxC");
    return g;
}

struct BenchmarkSpec {
    std::string benchmark = "qft";
    std::string layout = "home-base";
    int qubits = 0;  // 0: fill the grid
    int steps = 1;
};

InstructionStream make_stream(const BenchmarkSpec& spec, const GridLayout& layout) {
    const int n = spec.qubits > 0 ? spec.qubits : layout.site_count();
    InstructionStream stream;
    if (spec.benchmark == "qft") {
        stream = qft_pattern(n);
    } else if (spec.benchmark == "mm") {
        stream = modmult_pattern(n / 2, n - n / 2);
    } else if (spec.benchmark == "me") {
        stream = modexp_pattern(n % 2 == 0 ? n : n - 1, spec.steps);
    } else {
        throw CLI::ValidationError("--benchmark", "unknown benchmark \"" + spec.benchmark + "\"");
    }
    const PlacementKind kind =
        spec.layout == "mobile" ? PlacementKind::Mobile : PlacementKind::HomeBase;
    place_stream(stream, kind, layout);
    return stream;
}

std::string joined_argv(int argc, char** argv) {
    std::string out;
    for (int i = 0; i < argc; ++i) {
        if (i) out += ' ';
        out += argv[i];
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Teleportation-mesh interconnect models and simulator"};
    app.require_subcommand(1);

    std::string params_path, out_dir = ".";
    bool emit_json = false;
    app.add_option("--params", params_path, "parameter config file (key = value lines)");
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    app.add_flag("--json", emit_json, "also write JSON mirrors of each dataset");

    // model ------------------------------------------------------------------
    auto* model = app.add_subcommand("model", "transport fidelity/latency curves");
    std::string model_distances = "0:3000:50";
    model->add_option("--distances", model_distances, "lo:hi:step in cells")
        ->capture_default_str();

    // purify -----------------------------------------------------------------
    auto* purify = app.add_subcommand("purify", "purification round trajectories");
    std::string purify_protocol = "dejmps";
    double start_fidelity = 0.85;
    int purify_rounds = 8;
    purify->add_option("--protocol", purify_protocol, "dejmps|bbpssw")->capture_default_str();
    purify->add_option("--start-fidelity", start_fidelity, "initial Werner fidelity")
        ->capture_default_str();
    purify->add_option("--rounds", purify_rounds, "rounds to iterate")->capture_default_str();

    // plan -------------------------------------------------------------------
    auto* plan = app.add_subcommand("plan", "channel plans over a distance grid");
    std::string plan_scheme = "endpoints-only";
    std::string plan_distances = "600:38400:600";
    long long plan_hop_spacing = 600;
    plan->add_option("--scheme", plan_scheme,
                     "endpoints-only|virtual-wire|between-teleports|"
                     "between-teleports-virtual-wire")
        ->capture_default_str();
    plan->add_option("--distances", plan_distances, "lo:hi:step in cells")->capture_default_str();
    plan->add_option("--hop-spacing", plan_hop_spacing, "cells per teleport hop")
        ->capture_default_str();

    // sensitivity ---------------------------------------------------------------
    auto* sensitivity = app.add_subcommand("sensitivity", "pair need vs operation error rate");
    std::string rates_spec = "1e-9:1e-4:4";
    std::string sens_scheme = "virtual-wire";
    int sens_hops = 64;
    sensitivity->add_option("--rates", rates_spec, "comma list or lo:hi:points-per-decade")
        ->capture_default_str();
    sensitivity->add_option("--scheme", sens_scheme, "placement scheme")->capture_default_str();
    sensitivity->add_option("--hops", sens_hops, "reference path length in hops")
        ->capture_default_str();

    // teleport-chain --------------------------------------------------------------
    auto* chain = app.add_subcommand("teleport-chain", "error growth over chained teleports");
    int chain_hops = 64;
    std::string chain_fidelities;
    long long chain_hop_spacing = 600;
    chain->add_option("--hops", chain_hops, "maximum chain length")->capture_default_str();
    chain->add_option("--initial-fidelities", chain_fidelities,
                      "comma list of starting pair fidelities (default: the wire fidelity)");
    chain->add_option("--hop-spacing", chain_hop_spacing, "cells per teleport hop")
        ->capture_default_str();

    // simulate ----------------------------------------------------------------
    auto* simulate = app.add_subcommand("simulate", "run one workload on the mesh");
    BenchmarkSpec sim_spec;
    std::string sim_grid = "16x16", sim_layout_file;
    int sim_t = 4, sim_g = 4, sim_p = 1, sim_depth = 3;
    long long sim_hop_spacing = 600;
    std::uint64_t sim_seed = 1;
    bool sim_stochastic = false, sim_trace = false;
    simulate->add_option("--benchmark", sim_spec.benchmark, "qft|mm|me")->capture_default_str();
    simulate->add_option("--layout", sim_spec.layout, "home-base|mobile")->capture_default_str();
    simulate->add_option("--layout-file", sim_layout_file, "mesh layout document");
    simulate->add_option("--grid", sim_grid, "RxC router grid")->capture_default_str();
    simulate->add_option("--qubits", sim_spec.qubits, "logical qubits (default: fill the grid)");
    simulate->add_option("--steps", sim_spec.steps, "me benchmark steps")->capture_default_str();
    simulate->add_option("--t", sim_t, "teleporters per router (even)")->capture_default_str();
    simulate->add_option("--g", sim_g, "generators per link")->capture_default_str();
    simulate->add_option("--p", sim_p, "purifier queues per endpoint")->capture_default_str();
    simulate->add_option("--depth", sim_depth, "queue purifier depth")->capture_default_str();
    simulate->add_option("--hop-spacing", sim_hop_spacing, "cells per hop")->capture_default_str();
    simulate->add_option("--seed", sim_seed, "stochastic mode seed")->capture_default_str();
    simulate->add_flag("--stochastic", sim_stochastic, "sample purification outcomes");
    simulate->add_flag("--trace", sim_trace, "record the event trace in the report");

    // sweep -------------------------------------------------------------------
    auto* sweep = app.add_subcommand("sweep", "resource-allocation sweep");
    BenchmarkSpec sweep_spec;
    std::string sweep_grid = "16x16";
    std::string sweep_t = "2,4,8,16", sweep_g, sweep_p, sweep_p_ratio;
    std::string sweep_normalize = "1024,1024,1024";
    bool couple_tg = false;
    int sweep_depth = 3, sweep_threads = 2;
    std::uint64_t sweep_seed = 1;
    bool sweep_stochastic = false;
    sweep->add_option("--benchmark", sweep_spec.benchmark, "qft|mm|me")->capture_default_str();
    sweep->add_option("--layout", sweep_spec.layout, "home-base|mobile")->capture_default_str();
    sweep->add_option("--grid", sweep_grid, "RxC router grid")->capture_default_str();
    sweep->add_option("--qubits", sweep_spec.qubits, "logical qubits (default: fill the grid)");
    sweep->add_option("--steps", sweep_spec.steps, "me benchmark steps")->capture_default_str();
    sweep->add_option("--t", sweep_t, "comma list of teleporter counts")->capture_default_str();
    sweep->add_option("--g", sweep_g, "comma list of generator counts (default: --t values)");
    sweep->add_option("--p", sweep_p, "comma list of purifier queue counts");
    sweep->add_option("--p-ratio", sweep_p_ratio, "p = t / ratio for each listed ratio");
    sweep->add_flag("--couple-tg", couple_tg, "set g equal to t");
    sweep->add_option("--normalize", sweep_normalize, "baseline t,g,p triple")
        ->capture_default_str();
    sweep->add_option("--depth", sweep_depth, "queue purifier depth")->capture_default_str();
    sweep->add_option("--seed", sweep_seed, "stochastic mode seed")->capture_default_str();
    sweep->add_flag("--stochastic", sweep_stochastic, "sample purification outcomes");
    sweep->add_option("--threads", sweep_threads, "concurrent simulations")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    DatasetWriter writer;
    writer.out_dir = out_dir;
    writer.json = emit_json;
    writer.command_line = joined_argv(argc, argv);

    try {
        const ParameterSet params = load_params(params_path);

        if (model->parsed()) {
            const auto distances = parse_distance_range(model_distances);
            std::vector<std::vector<Cell>> rows;
            for (DistanceCells d : distances) {
                const double bf = ballistic_fidelity(1.0, d, params.errors);
                rows.push_back({static_cast<long long>(d), bf, 1.0 - bf,
                                ballistic_latency(d, params.times),
                                teleport_latency(d, params.times)});
            }
            std::vector<std::string> meta = {
                "generation_fidelity = " +
                    format_double(generation_fidelity(params.errors, params.f_zero)),
            };
            try {
                meta.push_back("crossover_distance_cells = " +
                               std::to_string(crossover_distance(params.times)));
            } catch (const std::domain_error&) {
                meta.push_back("crossover_distance_cells = none");
            }
            writer.write("model", meta,
                         {"distance_cells", "ballistic_fidelity", "ballistic_error",
                          "ballistic_latency_us", "teleport_latency_us"},
                         rows);
        }

        if (purify->parsed()) {
            const Protocol protocol = parse_protocol(purify_protocol);
            const auto points =
                purify_trajectory(protocol, start_fidelity, params.errors, purify_rounds);
            std::vector<std::vector<Cell>> rows;
            for (const auto& pt : points)
                rows.push_back({pt.round, pt.fidelity, 1.0 - pt.fidelity, pt.p_success,
                                pt.expected_pairs});
            writer.write("purify",
                         {"protocol = " + purify_protocol,
                          "start_fidelity = " + format_double(start_fidelity),
                          "max_achievable_fidelity = " +
                              format_double(max_achievable_fidelity(protocol, params.errors))},
                         {"round", "fidelity", "error", "p_success", "expected_pairs"}, rows);
        }

        if (plan->parsed()) {
            const PlacementScheme scheme = parse_scheme(plan_scheme);
            const auto rows_in = distance_sweep(
                scheme, params, parse_distance_range(plan_distances), plan_hop_spacing);
            std::vector<std::vector<Cell>> rows;
            for (const ChannelPlan& r : rows_in) {
                rows.push_back({static_cast<long long>(r.distance), r.hops, r.rounds_wire,
                                r.rounds_between, r.rounds_endpoint, r.total_pairs,
                                r.nonlocal_pairs, r.setup_latency, r.delivered_fidelity,
                                r.feasible});
            }
            writer.write("plan",
                         {"scheme = " + plan_scheme,
                          "hop_spacing = " + std::to_string(plan_hop_spacing)},
                         {"distance_cells", "hops", "rounds_wire", "rounds_between",
                          "rounds_endpoint", "total_pairs", "nonlocal_pairs",
                          "setup_latency_us", "delivered_fidelity", "feasible"},
                         rows);
        }

        if (sensitivity->parsed()) {
            const auto rows_in = error_rate_sensitivity(
                params, parse_rate_grid(rates_spec), parse_scheme(sens_scheme), sens_hops);
            std::vector<std::vector<Cell>> rows;
            for (const SensitivityRow& r : rows_in)
                rows.push_back({r.rate, r.max_fidelity, r.nonlocal_pairs, r.feasible});
            writer.write("sensitivity",
                         {"scheme = " + sens_scheme,
                          "reference_hops = " + std::to_string(sens_hops)},
                         {"error_rate", "max_achievable_fidelity", "nonlocal_pairs", "feasible"},
                         rows);
        }

        if (chain->parsed()) {
            const double f_link = link_fidelity(params, chain_hop_spacing);
            const std::vector<double> starts =
                chain_fidelities.empty()
                    ? std::vector<double>{f_link}
                    : parse_double_list(chain_fidelities, "--initial-fidelities");
            std::vector<std::vector<Cell>> rows;
            for (double f0 : starts) {
                double f = f0;
                rows.push_back({f0, 0, f, 1.0 - f});
                for (int h = 1; h <= chain_hops; ++h) {
                    f = teleport_fidelity(f, f_link, params.errors);
                    rows.push_back({f0, h, f, 1.0 - f});
                }
            }
            writer.write("teleport_chain",
                         {"link_fidelity = " + format_double(f_link),
                          "hop_spacing = " + std::to_string(chain_hop_spacing)},
                         {"initial_fidelity", "hops", "fidelity", "error"}, rows);
        }

        if (simulate->parsed()) {
            GridLayout layout;
            if (!sim_layout_file.empty()) {
                std::ifstream in(sim_layout_file);
                if (!in) throw std::runtime_error("cannot read layout " + sim_layout_file);
                std::stringstream buf;
                buf << in.rdbuf();
                layout = load_layout(buf.str());
            } else {
                const GridSpec g = parse_grid(sim_grid);
                layout = build_mesh(g.rows, g.cols, sim_t, sim_g, sim_p, sim_depth,
                                    sim_spec.layout == "mobile" ? LqCapacity::Mobile
                                                                : LqCapacity::HomeBase,
                                    sim_hop_spacing, params);
            }
            const InstructionStream stream = make_stream(sim_spec, layout);
            SimOptions opts;
            opts.stochastic = sim_stochastic;
            opts.seed = sim_seed;
            opts.collect_trace = sim_trace;
            const SimReport report = run(stream, layout, params, opts);

            fs::create_directories(out_dir);
            const fs::path path = fs::path(out_dir) / "report.json";
            std::ofstream js(path);
            js << report.to_json() << "\n";
            std::cout << "makespan_us=" << format_double(report.makespan)
                      << " instructions=" << report.instructions
                      << " total_pairs=" << report.total_pairs()
                      << " nonlocal_pairs=" << report.nonlocal_pairs << "\n"
                      << "wrote " << path.string() << "\n";
        }

        if (sweep->parsed()) {
            SweepConfig cfg;
            const GridSpec g = parse_grid(sweep_grid);
            cfg.base = build_mesh(g.rows, g.cols, 4, 4, 1, sweep_depth,
                                  sweep_spec.layout == "mobile" ? LqCapacity::Mobile
                                                                : LqCapacity::HomeBase,
                                  600, params);
            cfg.sim.stochastic = sweep_stochastic;
            cfg.sim.seed = sweep_seed;
            cfg.threads = sweep_threads;

            const auto ts = parse_int_list(sweep_t, "--t");
            std::vector<int> gs;
            if (!couple_tg && !sweep_g.empty()) gs = parse_int_list(sweep_g, "--g");

            for (size_t i = 0; i < ts.size(); ++i) {
                const int t = ts[i];
                const int gv = couple_tg ? t : (gs.empty() ? t : gs[i % gs.size()]);
                if (!sweep_p_ratio.empty()) {
                    for (int ratio : parse_int_list(sweep_p_ratio, "--p-ratio"))
                        cfg.points.push_back({t, gv, std::max(1, t / std::max(1, ratio))});
                } else if (!sweep_p.empty()) {
                    for (int p : parse_int_list(sweep_p, "--p")) cfg.points.push_back({t, gv, p});
                } else {
                    cfg.points.push_back({t, gv, std::max(1, t / 4)});
                }
            }
            const auto norm = parse_int_list(sweep_normalize, "--normalize");
            if (norm.size() != 3) throw CLI::ValidationError("--normalize", "expected t,g,p");
            cfg.baseline = {norm[0], norm[1], norm[2]};

            const InstructionStream stream = make_stream(sweep_spec, cfg.base);
            const auto runs = run_sweep(stream, cfg, params);

            std::vector<std::vector<Cell>> rows;
            for (const SweepRun& r : runs)
                rows.push_back({sweep_spec.benchmark, sweep_spec.layout, r.point.t, r.point.g,
                                r.point.p, r.makespan, r.normalized,
                                static_cast<unsigned long long>(r.total_pairs),
                                static_cast<unsigned long long>(r.nonlocal_pairs)});
            writer.write("sweep",
                         {"grid = " + sweep_grid, "baseline = " + sweep_normalize,
                          "stochastic = " + std::string(sweep_stochastic ? "true" : "false")},
                         {"benchmark", "layout", "t", "g", "p", "makespan_us", "normalized",
                          "total_pairs", "nonlocal_pairs"},
                         rows);
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const InfeasiblePlanError& e) {
        std::cerr << "infeasible plan: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const SimulationError& e) {
        std::cerr << "simulation error: " << e.what() << "\n";
        return std::string(e.what()).find("infeasible") != std::string::npos ? kExitInfeasible
                                                                             : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
