// z2sim: desk-scale emulator of a stroboscopic Z2 lattice-gauge simulator.
// Subcommands sweep the adiabatic preparation, check gate identities, and
// analyze the photonic interaction layer; results land in CSV files.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>

#include "z2sim/runner.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitCapacity = 3;
constexpr int kExitConvergence = 4;

using Command = int (*)(const z2sim::RunContext&);

const std::map<std::string, std::pair<Command, const char*>>& command_table() {
    static const std::map<std::string, std::pair<Command, const char*>> table = {
        {"exact-gs", {z2sim::cmd_exact_gs, "exact ground-state sweep over the coupling ratio"}},
        {"adiabatic", {z2sim::cmd_adiabatic, "Trotterized adiabatic ramps, both directions"}},
        {"wilson", {z2sim::cmd_wilson, "stator Wilson-loop readout vs direct expectation"}},
        {"prep-magnetic", {z2sim::cmd_prep_magnetic, "magnetic ground state by post-selection"}},
        {"noise-scan", {z2sim::cmd_noise_scan, "gauge error under residual couplings"}},
        {"schedule-check", {z2sim::cmd_schedule_check, "sideband selectivity and collisions"}},
        {"budget", {z2sim::cmd_budget, "cooperativity / Trotter error budget"}},
        {"trotter-scan", {z2sim::cmd_trotter_scan, "splitting error vs step count"}},
    };
    return table;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"z2sim: stroboscopic Z2 lattice-gauge simulation toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    std::string engine_override;
    int threads = 1;
    bool svg = false;

    app.add_option("--config", config_path, "configuration file (key = value lines)");
    app.add_option("--out", out_dir, "output directory for CSV/SVG files");
    app.add_option("--engine", engine_override, "engine override: auto|full|links|dual");
    app.add_option("--threads", threads, "worker threads for state-vector kernels");
    app.add_flag("--svg", svg, "also emit SVG line charts");

    std::string chosen;
    for (const auto& [name, entry] : command_table()) {
        auto* sub = app.add_subcommand(name, entry.second);
        sub->fallthrough();
        sub->callback([&chosen, name = name] { chosen = name; });
    }

    CLI11_PARSE(app, argc, argv);

    try {
        z2sim::RunContext ctx;
        ctx.config = config_path.empty() ? z2sim::Config{}
                                         : z2sim::Config::from_file(config_path);
        if (!engine_override.empty()) ctx.config.set("engine", engine_override);
        if (threads < 1) throw z2sim::ConfigError("--threads must be at least 1");
        z2sim::worker_threads() = threads;
        std::filesystem::create_directories(out_dir);
        ctx.out_dir = out_dir;
        ctx.svg = svg;
        return command_table().at(chosen).first(ctx);
    } catch (const z2sim::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const z2sim::CapacityError& e) {
        std::cerr << "capacity error: " << e.what() << "\n";
        return kExitCapacity;
    } catch (const z2sim::ConvergenceError& e) {
        std::cerr << "convergence error: " << e.what() << "\n";
        return kExitConvergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
