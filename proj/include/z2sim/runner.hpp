#ifndef Z2SIM_RUNNER_HPP
#define Z2SIM_RUNNER_HPP

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "z2sim/analysis.hpp"
#include "z2sim/config.hpp"
#include "z2sim/csvio.hpp"
#include "z2sim/gauge_dual.hpp"
#include "z2sim/lattice.hpp"
#include "z2sim/photonics.hpp"
#include "z2sim/protocol.hpp"
#include "z2sim/svg.hpp"

namespace z2sim {

struct RunContext {
    Config config;
    std::string out_dir = ".";
    bool svg = false;
    std::ostream* log = &std::cout;

    std::string out_path(const std::string& name) const {
        return (std::filesystem::path(out_dir) / name).string();
    }
};

namespace run_detail {

inline LatticeGeometry geometry_from(const Config& cfg) {
    return build_lattice(cfg.get_int("lattice.lx", 2), cfg.get_int("lattice.ly", 2));
}

inline EngineKind engine_from(const Config& cfg, const LatticeGeometry& geom, std::ostream& log) {
    const std::string req = cfg.get_string("engine", "auto");
    EngineKind kind;
    if (req == "auto") {
        kind = auto_engine(geom);
    } else if (req == "full") {
        kind = EngineKind::full;
        if (full_layout(geom).total_qubits() > QubitRegister::kMaxQubits)
            throw CapacityError("full engine needs " +
                                std::to_string(full_layout(geom).total_qubits()) +
                                " qubits; use the links-only or dual engine");
    } else if (req == "links") {
        kind = EngineKind::links;
        if (geom.n_links() > QubitRegister::kMaxQubits)
            throw CapacityError("links-only engine needs " + std::to_string(geom.n_links()) +
                                " qubits; use the dual (plaquette-spin) engine");
    } else if (req == "dual") {
        kind = EngineKind::dual;
        if (geom.n_plaquettes() > 25)
            throw CapacityError("dual engine capped at 25 plaquette spins");
    } else {
        throw ConfigError("engine must be auto|full|links|dual, got '" + req + "'");
    }
    log << "engine: " << engine_name(kind) << (req == "auto" ? " (auto)" : "") << "\n";
    return kind;
}

inline Schedule schedule_from(const Config& cfg) {
    Schedule s;
    const std::string dir = cfg.get_string("schedule.direction", "electric");
    if (dir == "electric")
        s.direction = Direction::electric_start;
    else if (dir == "magnetic")
        s.direction = Direction::magnetic_start;
    else if (dir != "both")
        throw ConfigError("schedule.direction must be electric|magnetic|both");
    s.total_time = cfg.get_double("schedule.total_time", 1.0);
    s.steps = cfg.get_int("schedule.steps", 80);
    s.final_ratio = cfg.get_double("schedule.final_ratio", 1.0);
    s.order = cfg.get_int("schedule.order", 1);
    const std::string sampling = cfg.get_string("schedule.sampling", "midpoint");
    if (sampling == "midpoint")
        s.sampling = TimeSampling::midpoint;
    else if (sampling == "left")
        s.sampling = TimeSampling::left;
    else
        throw ConfigError("schedule.sampling must be midpoint|left");
    s.validate();
    return s;
}

inline EigenOptions eigen_options_from(const Config& cfg) {
    EigenOptions opt;
    opt.tolerance = cfg.get_double("dual.tolerance", 1e-10);
    opt.max_iterations = cfg.get_int("dual.max_iterations", 10000);
    opt.dense_threshold = static_cast<std::size_t>(cfg.get_long("dual.dense_threshold", 1024));
    return opt;
}

inline GradientSpec gradient_from(const Config& cfg) {
    GradientSpec g;
    g.p = cfg.get_double("gradient.p", 1.0);
    g.q = cfg.get_double("gradient.q", M_SQRT2);
    g.scale_g = cfg.get_double("gradient.g", 1.0);
    g.validate();
    return g;
}

inline InteractionModel model_from(const Config& cfg) {
    InteractionModel m;
    const std::string kind = cfg.get_string("photonics.kind", "cavity");
    if (kind == "cavity")
        m.kind = PlatformKind::cavity;
    else if (kind == "crystal")
        m.kind = PlatformKind::photonic_crystal;
    else
        throw ConfigError("photonics.kind must be cavity|crystal");
    m.strength_j = cfg.get_double("photonics.j", 1.0);
    m.range_l = cfg.get_double("photonics.l", 1.0);
    m.cooperativity = cfg.get_double("photonics.c", 100.0);
    m.validate();
    return m;
}

inline std::vector<double> sweep_grid(const Config& cfg, double def_min, double def_max,
                                      int def_points) {
    const double lo = cfg.get_double("sweep.min", def_min);
    const double hi = cfg.get_double("sweep.max", def_max);
    const int n = cfg.get_int("sweep.points", def_points);
    if (n < 1 || hi < lo) throw ConfigError("bad sweep grid");
    const std::string scale = cfg.get_string("sweep.scale", "linear");
    std::vector<double> out;
    for (int i = 0; i < n; ++i) {
        const double t = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
        if (scale == "linear")
            out.push_back(lo + (hi - lo) * t);
        else if (scale == "log")
            out.push_back(lo * std::pow(hi / lo, t));
        else
            throw ConfigError("sweep.scale must be linear|log");
    }
    return out;
}

inline std::string loop_name(const LoopSpec& c, const std::string& prefix = "W") {
    std::ostringstream ss;
    ss << prefix << "(" << c.anchor_x << ";" << c.anchor_y << ";" << c.width << "x" << c.height
       << ")";
    return ss.str();
}

// central 1x1 loop, the default observable
inline LoopSpec default_loop(const LatticeGeometry& geom) {
    return {(geom.lx() - 1) / 2, (geom.ly() - 1) / 2, 1, 1};
}

inline void maybe_svg(const RunContext& ctx, const std::string& stem, const std::string& title,
                      const std::vector<SvgSeries>& series) {
    if (!ctx.svg) return;
    write_svg_chart(ctx.out_path(stem + ".svg"), title, series);
    *ctx.log << "wrote " << ctx.out_path(stem + ".svg") << "\n";
}

}  // namespace run_detail

// ---------------------------------------------------------------------------
// exact-gs: <W> and energy of the exact ground state over a ratio grid

inline int cmd_exact_gs(const RunContext& ctx) {
    const auto geom = run_detail::geometry_from(ctx.config);
    if (geom.n_plaquettes() > 25) throw CapacityError("dual engine capped at 25 plaquette spins");
    *ctx.log << "engine: dual\n";
    const auto loops =
        ctx.config.get_loops("observable.loops", {run_detail::default_loop(geom)});
    for (const auto& c : loops) check_loop(geom, c);
    const auto grid = run_detail::sweep_grid(ctx.config, 0.0, 8.0, 40);
    const auto eig_opt = run_detail::eigen_options_from(ctx.config);

    std::vector<CurveRecord> records;
    std::vector<SvgSeries> series(loops.size());
    for (std::size_t i = 0; i < loops.size(); ++i)
        series[i].name = run_detail::loop_name(loops[i]);
    for (double ratio : grid) {
        auto h = dual_map(geom, 1.0, ratio);
        auto gs = exact_ground_state(h, eig_opt);
        for (std::size_t i = 0; i < loops.size(); ++i) {
            const double w = wilson_expectation_dual(gs.vector, geom, loops[i]);
            records.push_back({"ratio", ratio, run_detail::loop_name(loops[i]), w, "exact", 0.0,
                               0, "dual"});
            series[i].points.emplace_back(ratio, w);
        }
        records.push_back({"ratio", ratio, "energy", gs.energy, "exact", 0.0, 0, "dual"});
    }
    write_curve_csv(ctx.out_path("exact_gs.csv"), records, ctx.config.hash());
    *ctx.log << "wrote " << ctx.out_path("exact_gs.csv") << "\n";
    run_detail::maybe_svg(ctx, "exact_gs", "exact ground state", series);
    return 0;
}

// ---------------------------------------------------------------------------
// adiabatic: final <W> vs final ratio for one or both ramp directions

inline int cmd_adiabatic(const RunContext& ctx) {
    const auto geom = run_detail::geometry_from(ctx.config);
    const EngineKind kind = run_detail::engine_from(ctx.config, geom, *ctx.log);
    Schedule base = run_detail::schedule_from(ctx.config);
    const std::string dir_req = ctx.config.get_string("schedule.direction", "both");
    const auto loops =
        ctx.config.get_loops("observable.loops", {run_detail::default_loop(geom)});
    for (const auto& c : loops) check_loop(geom, c);
    Observables obs;
    obs.loops = loops;
    obs.energy = ctx.config.get_bool("observable.energy", false);
    obs.gauge = ctx.config.get_bool("observable.gauge", false);
    const bool include_exact = ctx.config.get_bool("include_exact", true);
    const auto eig_opt = run_detail::eigen_options_from(ctx.config);

    std::vector<Direction> directions;
    if (dir_req == "electric" || dir_req == "both") directions.push_back(Direction::electric_start);
    if (dir_req == "magnetic" || dir_req == "both") directions.push_back(Direction::magnetic_start);

    if (ctx.config.get_bool("trajectory", false)) {
        // one ramp per direction at schedule.final_ratio, recorded step by step
        std::vector<CurveRecord> records;
        const int every = ctx.config.get_int("record_every", 1);
        for (Direction d : directions) {
            Schedule s = base;
            s.direction = d;
            if (d == Direction::magnetic_start) {
                if (base.final_ratio <= 0)
                    throw ConfigError("magnetic-start trajectory needs final_ratio > 0");
                s.final_ratio = 1.0 / base.final_ratio;
            }
            auto res = run_adiabatic(kind, geom, s, obs, every);
            for (const auto& r : res.records) {
                for (std::size_t i = 0; i < loops.size(); ++i)
                    records.push_back({"step", static_cast<double>(r.step),
                                       run_detail::loop_name(loops[i]), r.loop_values[i],
                                       direction_name(d), s.total_time, s.steps,
                                       engine_name(kind)});
                if (obs.energy)
                    records.push_back({"step", static_cast<double>(r.step), "energy", r.energy,
                                       direction_name(d), s.total_time, s.steps,
                                       engine_name(kind)});
                if (obs.gauge)
                    records.push_back({"step", static_cast<double>(r.step), "gauge_max_err",
                                       r.gauge_max_error, direction_name(d), s.total_time,
                                       s.steps, engine_name(kind)});
            }
        }
        write_curve_csv(ctx.out_path("adiabatic_trajectory.csv"), records, ctx.config.hash());
        *ctx.log << "wrote " << ctx.out_path("adiabatic_trajectory.csv") << "\n";
        return 0;
    }

    const auto grid = run_detail::sweep_grid(ctx.config, 0.0, 8.0, 20);
    std::vector<CurveRecord> records;
    std::vector<SvgSeries> series;
    std::vector<std::pair<double, double>> electric_curve, magnetic_curve;

    for (Direction d : directions) {
        SvgSeries sv;
        sv.name = run_detail::loop_name(loops[0]) + " " + direction_name(d);
        for (double ratio : grid) {
            if (d == Direction::magnetic_start && ratio <= 0.0) continue;
            Schedule s = base;
            s.direction = d;
            s.final_ratio = d == Direction::electric_start ? ratio : 1.0 / ratio;
            auto res = run_adiabatic(kind, geom, s, obs);
            const auto& fin = res.final_record();
            for (std::size_t i = 0; i < loops.size(); ++i)
                records.push_back({"final_ratio", ratio, run_detail::loop_name(loops[i]),
                                   fin.loop_values[i], direction_name(d), s.total_time, s.steps,
                                   engine_name(kind)});
            if (obs.energy)
                records.push_back({"final_ratio", ratio, "energy", fin.energy, direction_name(d),
                                   s.total_time, s.steps, engine_name(kind)});
            if (obs.gauge)
                records.push_back({"final_ratio", ratio, "gauge_max_err", fin.gauge_max_error,
                                   direction_name(d), s.total_time, s.steps, engine_name(kind)});
            sv.points.emplace_back(ratio, fin.loop_values[0]);
            (d == Direction::electric_start ? electric_curve : magnetic_curve)
                .emplace_back(ratio, fin.loop_values[0]);
        }
        series.push_back(std::move(sv));
    }

    if (include_exact && geom.n_plaquettes() <= 25) {
        SvgSeries sv;
        sv.name = run_detail::loop_name(loops[0]) + " exact";
        for (double ratio : grid) {
            auto gs = exact_ground_state(dual_map(geom, 1.0, ratio), eig_opt);
            for (std::size_t i = 0; i < loops.size(); ++i) {
                const double w = wilson_expectation_dual(gs.vector, geom, loops[i]);
                records.push_back({"final_ratio", ratio,
                                   run_detail::loop_name(loops[i], "Wexact"), w, "exact", 0.0, 0,
                                   "dual"});
                if (i == 0) sv.points.emplace_back(ratio, w);
            }
        }
        series.push_back(std::move(sv));
    }

    // where the two preparation directions meet (informational; at this size
    // it is not the bulk transition)
    if (electric_curve.size() > 1 && magnetic_curve.size() > 1) {
        std::vector<std::pair<double, double>> e_common(
            electric_curve.end() - static_cast<long>(magnetic_curve.size()),
            electric_curve.end());
        auto crossing = find_crossing(e_common, magnetic_curve);
        if (crossing) {
            records.push_back({"fit", 0.0, "crossing_ratio", *crossing, "both", base.total_time,
                               base.steps, engine_name(kind)});
            *ctx.log << "direction crossing at final ratio " << *crossing << "\n";
        } else {
            *ctx.log << "no strict direction crossing inside the sweep range\n";
        }
        // crossing of the two measurements' deviations from exact: where the
        // better preparation side swaps
        if (include_exact && geom.n_plaquettes() <= 25) {
            std::vector<std::pair<double, double>> dev_e, dev_m;
            for (const auto& [x, w] : e_common) {
                auto gs = exact_ground_state(dual_map(geom, 1.0, x), eig_opt);
                const double exact_w = wilson_expectation_dual(gs.vector, geom, loops[0]);
                dev_e.emplace_back(x, std::abs(w - exact_w));
            }
            for (const auto& [x, w] : magnetic_curve) {
                auto gs = exact_ground_state(dual_map(geom, 1.0, x), eig_opt);
                const double exact_w = wilson_expectation_dual(gs.vector, geom, loops[0]);
                dev_m.emplace_back(x, std::abs(w - exact_w));
            }
            auto swap = find_crossing(dev_e, dev_m);
            if (swap) {
                records.push_back({"fit", 0.0, "advantage_crossing_ratio", *swap, "both",
                                   base.total_time, base.steps, engine_name(kind)});
                *ctx.log << "preparation advantage swaps at final ratio " << *swap << "\n";
            }
        }
    }

    write_curve_csv(ctx.out_path("adiabatic.csv"), records, ctx.config.hash());
    *ctx.log << "wrote " << ctx.out_path("adiabatic.csv") << "\n";
    run_detail::maybe_svg(ctx, "adiabatic", "adiabatic preparation", series);
    return 0;
}

// ---------------------------------------------------------------------------
// wilson: stator readout vs direct expectation, loop by loop

inline int cmd_wilson(const RunContext& ctx) {
    const auto geom = run_detail::geometry_from(ctx.config);
    const auto loops =
        ctx.config.get_loops("observable.loops", {run_detail::default_loop(geom)});
    for (const auto& c : loops) check_loop(geom, c);

    const std::string state_req = ctx.config.get_string("wilson.state", "magnetic_gs");
    QubitRegister links(1);
    if (state_req == "electric_gs") {
        links = links_zero_e(geom);
    } else if (state_req == "magnetic_gs") {
        links = links_zero_b(geom);
    } else if (state_req == "random") {
        Rng rng(static_cast<std::uint64_t>(ctx.config.get_long("seed", 12345)));
        links = QubitRegister(geom.n_links());
        double nrm = 0.0;
        for (auto& v : links.amplitudes()) {
            v = rng.next_cgaussian();
            nrm += std::norm(v);
        }
        links.scale(1.0 / std::sqrt(nrm));
    } else {
        throw ConfigError("wilson.state must be electric_gs|magnetic_gs|random");
    }

    const bool full_fits = full_layout(geom).total_qubits() <= QubitRegister::kMaxQubits;
    *ctx.log << "engine: " << (full_fits ? "full" : "links + measurement ancilla") << "\n";
    std::optional<QubitRegister> full;
    if (full_fits) full.emplace(embed_links(geom, links));

    std::vector<CurveRecord> records;
    int idx = 0;
    for (const auto& c : loops) {
        const double direct = expectation_pauli(links, x_string(loop_links(geom, c)));
        const double stator = full_fits ? measure_wilson_stator(*full, geom, c)
                                        : measure_wilson_single_control(links, geom, c);
        const std::string name = run_detail::loop_name(c, "");
        records.push_back({"loop", static_cast<double>(idx), "W_stator" + name, stator,
                           state_req, 0.0, 0, full_fits ? "full" : "links"});
        records.push_back({"loop", static_cast<double>(idx), "W_direct" + name, direct,
                           state_req, 0.0, 0, full_fits ? "full" : "links"});
        records.push_back({"loop", static_cast<double>(idx), "W_diff" + name, stator - direct,
                           state_req, 0.0, 0, full_fits ? "full" : "links"});
        ++idx;
    }
    write_curve_csv(ctx.out_path("wilson.csv"), records, ctx.config.hash());
    *ctx.log << "wrote " << ctx.out_path("wilson.csv") << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// prep-magnetic: post-selected |0_B> preparation

inline int cmd_prep_magnetic(const RunContext& ctx) {
    const auto geom = run_detail::geometry_from(ctx.config);
    if (full_layout(geom).total_qubits() > QubitRegister::kMaxQubits)
        throw CapacityError("magnetic preparation needs the full register (" +
                            std::to_string(full_layout(geom).total_qubits()) +
                            " qubits); the dual engine provides |0_B> analytically");
    *ctx.log << "engine: full\n";
    auto prep = prepare_magnetic_gs(geom);
    auto extracted = extract_links(geom, prep.full);
    const double fidelity_to_projector = fidelity(extracted.links, links_zero_b(geom));
    double min_b = 1.0;
    for (int p = 0; p < geom.n_plaquettes(); ++p)
        min_b = std::min(min_b,
                         expectation_pauli(extracted.links, x_string(plaquette_links(geom, p))));

    std::vector<CurveRecord> records;
    records.push_back({"prep", 0.0, "success_probability", prep.probability, "", 0.0, 0, "full"});
    records.push_back({"prep", 0.0, "expected_probability",
                       std::pow(2.0, -geom.n_plaquettes()), "", 0.0, 0, "full"});
    records.push_back(
        {"prep", 0.0, "fidelity_to_projector_gs", fidelity_to_projector, "", 0.0, 0, "full"});
    records.push_back({"prep", 0.0, "min_plaquette_expectation", min_b, "", 0.0, 0, "full"});
    write_curve_csv(ctx.out_path("prep_magnetic.csv"), records, ctx.config.hash());
    *ctx.log << "wrote " << ctx.out_path("prep_magnetic.csv") << "\n";

    const std::string dump = ctx.config.get_string("output.state_dump", "");
    if (!dump.empty()) {
        dump_amplitudes(extracted.links, ctx.out_path(dump));
        *ctx.log << "wrote " << ctx.out_path(dump) << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// noise-scan: gauge error vs residual strength, class by class

inline int cmd_noise_scan(const RunContext& ctx) {
    const auto geom = run_detail::geometry_from(ctx.config);
    if (full_layout(geom).total_qubits() > QubitRegister::kMaxQubits)
        throw CapacityError("noise scans run on the full register; lattice too large");
    *ctx.log << "engine: full\n";
    Schedule sched = run_detail::schedule_from(ctx.config);
    const double j = ctx.config.get_double("photonics.j", 1.0);
    const auto modes = ctx.config.get_string_list(
        "noise.modes", {"link-link", "control-control", "control-link"});
    const auto strengths =
        ctx.config.get_double_list("noise.strengths", {0.05, 0.1, 0.2, 0.3, 0.4});

    const AtomTable atoms = atom_table(geom);
    const auto ideal = ideal_nn_coupling(geom, j);
    const auto ideal_run = gauge_violation_run(geom, ideal, j, sched);

    std::vector<CurveRecord> records;
    std::vector<SvgSeries> series;
    for (const std::string& mode : modes) {
        SvgSeries sv;
        sv.name = mode;
        for (double s : strengths) {
            CouplingMatrix m = ideal;
            int added = 0;
            if (mode == "link-link") {
                for (int i = 0; i < atoms.n_links; ++i)
                    for (int k = i + 1; k < atoms.n_links; ++k)
                        if (distance(atoms.positions[i], atoms.positions[k]) < 0.8) {
                            PairEntry e;
                            e.strength = s * j;
                            e.cls = PairClass::residual;
                            m.set(i, k, e);
                            ++added;
                        }
            } else if (mode == "control-control") {
                for (int p = 0; p < geom.n_plaquettes(); ++p)
                    for (int r = p + 1; r < geom.n_plaquettes(); ++r)
                        if (distance(geom.control_position(p), geom.control_position(r)) < 1.1) {
                            PairEntry e;
                            e.strength = s * j;
                            e.cls = PairClass::residual;
                            m.set(atoms.n_links + p, atoms.n_links + r, e);
                            ++added;
                        }
            } else if (mode == "control-link") {
                for (int p = 0; p < geom.n_plaquettes(); ++p)
                    for (int l = 0; l < atoms.n_links; ++l)
                        if (std::abs(distance(geom.control_position(p), atoms.positions[l]) -
                                     std::sqrt(5.0) / 2.0) < 1e-9) {
                            PairEntry e;
                            e.strength = s * j;
                            e.cls = PairClass::residual;
                            m.set(atoms.n_links + p, l, e);
                            ++added;
                        }
            } else {
                throw ConfigError("noise mode must be link-link|control-control|control-link");
            }
            if (added == 0) throw ConfigError("no residual pairs found for mode " + mode);
            auto run = gauge_violation_run(geom, m, j, sched);
            double worst = 0.0;
            for (double e : run.max_errors) worst = std::max(worst, e);
            double d2 = 0.0;
            for (std::size_t b = 0; b < run.final_state.dim(); ++b)
                d2 += std::norm(run.final_state[b] - ideal_run.final_state[b]);
            records.push_back({"strength", s, "max_gauge_error[" + mode + "]", worst, "",
                               sched.total_time, sched.steps, "full"});
            records.push_back({"strength", s, "final_state_deviation[" + mode + "]",
                               std::sqrt(d2), "", sched.total_time, sched.steps, "full"});
            sv.points.emplace_back(s, worst);
        }
        series.push_back(std::move(sv));
    }
    write_curve_csv(ctx.out_path("noise_scan.csv"), records, ctx.config.hash());
    *ctx.log << "wrote " << ctx.out_path("noise_scan.csv") << "\n";
    run_detail::maybe_svg(ctx, "noise_scan", "gauge error vs residual strength", series);
    return 0;
}

// ---------------------------------------------------------------------------
// schedule-check: resonance selectivity and collision analysis

inline int cmd_schedule_check(const RunContext& ctx) {
    const auto geom = run_detail::geometry_from(ctx.config);
    const auto grad = run_detail::gradient_from(ctx.config);
    const double df = ctx.config.get_double("schedule_check.df", 1e-6 * grad.scale_g);
    const int size_cap = ctx.config.get_int("schedule_check.size_cap", 12);

    const auto schedule = canonical_nn_schedule(grad, 0.0);
    const auto skeleton = resonant_pairs(geom, grad, schedule, df);
    int desired = 0, spurious = 0, missed = 0;
    for (int i = 0; i < skeleton.n_atoms(); ++i)
        for (int k = i + 1; k < skeleton.n_atoms(); ++k) {
            const auto& e = skeleton.at(i, k);
            if (e.cls == PairClass::desired_nn) {
                if (e.resonant)
                    ++desired;
                else
                    ++missed;
            } else if (e.resonant) {
                ++spurious;
            }
        }
    const bool nn_only = spurious == 0 && missed == 0;
    *ctx.log << "verdict: " << (nn_only ? "NN-only" : "NOT selective") << " (" << desired
             << " desired, " << spurious << " spurious, " << missed << " missed)\n";

    const auto rep = collision_report(geom, grad, df, size_cap);
    *ctx.log << "minimal spectral gap: " << rep.min_gap / grad.scale_g << " g\n";
    *ctx.log << "collisions on this lattice: " << rep.collisions.size() << "\n";
    *ctx.log << "largest collision-free square lattice (cap " << size_cap
             << "): " << rep.max_safe_size << "\n";

    std::vector<CurveRecord> records;
    records.push_back({"check", 0.0, "nn_only", nn_only ? 1.0 : 0.0, "", 0.0, 0, ""});
    records.push_back({"check", 0.0, "desired_resonant_pairs", static_cast<double>(desired), "",
                       0.0, 0, ""});
    records.push_back({"check", 0.0, "spurious_resonant_pairs", static_cast<double>(spurious),
                       "", 0.0, 0, ""});
    records.push_back({"check", 0.0, "min_gap_over_g", rep.min_gap / grad.scale_g, "", 0.0, 0, ""});
    records.push_back({"check", 0.0, "n_collisions", static_cast<double>(rep.collisions.size()),
                       "", 0.0, 0, ""});
    records.push_back({"check", 0.0, "max_safe_size", static_cast<double>(rep.max_safe_size), "",
                       0.0, 0, ""});
    write_curve_csv(ctx.out_path("schedule_check.csv"), records, ctx.config.hash());
    *ctx.log << "wrote " << ctx.out_path("schedule_check.csv") << "\n";

    std::vector<std::string> rows;
    const AtomTable atoms = atom_table(geom);
    for (const auto& c : rep.collisions) {
        std::ostringstream ss;
        ss << c.atom_a << ',' << c.atom_b << ','
           << (atoms.is_control[c.atom_a] ? "control" : "link") << ','
           << (atoms.is_control[c.atom_b] ? "control" : "link") << ',' << format_g17(c.distance)
           << ',' << format_g17(c.pair_frequency);
        rows.push_back(ss.str());
    }
    write_table_csv(ctx.out_path("collisions.csv"),
                    "atom_a,atom_b,kind_a,kind_b,distance,pair_frequency", rows,
                    ctx.config.hash());
    *ctx.log << "wrote " << ctx.out_path("collisions.csv") << "\n";

    // effective coupling matrix under the configured platform
    const auto model = run_detail::model_from(ctx.config);
    const std::string mode_req =
        ctx.config.get_string("schedule_check.residual_mode", "suppressed");
    const ResidualMode mode =
        mode_req == "bare" ? ResidualMode::bare : ResidualMode::suppressed;
    auto coupling = effective_interaction(model, geom, grad, schedule, df, mode);
    std::vector<std::string> crow;
    for (const auto& [a, b, e] : coupling.nonzero_pairs()) {
        std::ostringstream ss;
        ss << a << ',' << b << ',' << (e.cls == PairClass::desired_nn ? "desired" : "residual")
           << ',' << format_g17(e.distance) << ',' << format_g17(e.strength) << ','
           << format_g17(e.detuning);
        crow.push_back(ss.str());
    }
    write_table_csv(ctx.out_path("coupling_matrix.csv"),
                    "atom_a,atom_b,class,distance,strength,detuning", crow, ctx.config.hash());
    *ctx.log << "wrote " << ctx.out_path("coupling_matrix.csv") << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// budget: cooperativity / Trotter trade-off

inline int cmd_budget(const RunContext& ctx) {
    BudgetModel knobs;
    knobs.trotter_prefactor = ctx.config.get_double("budget.trotter_prefactor", 1.0);
    knobs.gate_prefactor = ctx.config.get_double("budget.gate_prefactor", 0.01);
    knobs.gate_error_exponent = ctx.config.get_double("budget.gate_exponent", 1.0);
    knobs.error_cap = ctx.config.get_double("budget.error_cap", 0.1);
    const int order = ctx.config.get_int("budget.order", 2);
    const double t_target = ctx.config.get_double("budget.t_target", 1.0);
    const double c_min = ctx.config.get_double("budget.c_min", 10.0);
    const double c_max = ctx.config.get_double("budget.c_max", 1e4);
    const int points = ctx.config.get_int("budget.points", 13);

    std::vector<CurveRecord> records;
    std::vector<std::pair<double, double>> tmax_curve;
    *ctx.log << "      C   optimal M        eps_min          T_max\n";
    for (int i = 0; i < points; ++i) {
        const double c =
            points == 1 ? c_min : c_min * std::pow(c_max / c_min, static_cast<double>(i) / (points - 1));
        auto pt = error_budget(c, t_target, order, knobs);
        records.push_back({"C", c, "optimal_m", static_cast<double>(pt.optimal_m), "", t_target,
                           order, ""});
        records.push_back({"C", c, "eps_min", pt.eps_min, "", t_target, order, ""});
        records.push_back({"C", c, "t_max", pt.t_max, "", t_target, order, ""});
        tmax_curve.emplace_back(c, pt.t_max);
        char line[128];
        std::snprintf(line, sizeof(line), "%9.1f  %10ld   %12.5e   %12.5e\n", c, pt.optimal_m,
                      pt.eps_min, pt.t_max);
        *ctx.log << line;
    }
    const auto fit = fit_slope(tmax_curve);
    records.push_back({"fit", 0.0, "t_max_exponent", fit.slope, "", t_target, order, ""});
    records.push_back({"fit", 0.0, "t_max_exponent_stderr", fit.stderr_slope, "", t_target,
                       order, ""});
    *ctx.log << "fitted T_max exponent: " << fit.slope << " +- " << fit.stderr_slope << "\n";
    write_curve_csv(ctx.out_path("budget.csv"), records, ctx.config.hash());
    *ctx.log << "wrote " << ctx.out_path("budget.csv") << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// trotter-scan: splitting error vs step count against the dense propagator

inline int cmd_trotter_scan(const RunContext& ctx) {
    const auto geom = run_detail::geometry_from(ctx.config);
    if (geom.n_plaquettes() > 12)
        throw CapacityError("trotter scans diagonalize densely; use at most 12 plaquettes");
    *ctx.log << "engine: dual\n";
    const double le = ctx.config.get_double("trotter.lambda_e", 1.0);
    const double lb = ctx.config.get_double("trotter.lambda_b", 1.3);
    const double t = ctx.config.get_double("trotter.t", 1.0);
    auto m_values = ctx.config.get_double_list("trotter.m_values",
                                               {10, 20, 40, 80, 160, 320});

    auto h = dual_map(geom, le, lb);
    auto eig = symmetric_eigensolve(h.dense(), static_cast<int>(h.dim()));
    QubitRegister init(h.n_spins());
    const auto exact = propagate_dense(eig, t, init.amplitudes());

    std::vector<CurveRecord> records;
    for (int order : {1, 2}) {
        std::vector<std::pair<double, double>> curve;
        for (double md : m_values) {
            const int m = static_cast<int>(md);
            auto reg = init;
            const double tau = t / m;
            for (int s = 0; s < m; ++s) trotter_step_dual(reg, h, le, lb, tau, order);
            double err = 0.0;
            for (std::size_t b = 0; b < exact.size(); ++b)
                err += std::norm(reg.amplitudes()[b] - exact[b]);
            err = std::sqrt(err);
            records.push_back({"steps", static_cast<double>(m),
                               "error_order" + std::to_string(order), err, "", t, m, "dual"});
            curve.emplace_back(static_cast<double>(m), err);
        }
        const auto fit = fit_slope(curve);
        records.push_back({"fit", 0.0, "slope_order" + std::to_string(order), fit.slope, "", t, 0,
                           "dual"});
        *ctx.log << "order " << order << " slope: " << fit.slope << " +- " << fit.stderr_slope
                 << "\n";
    }
    write_curve_csv(ctx.out_path("trotter_scan.csv"), records, ctx.config.hash());
    *ctx.log << "wrote " << ctx.out_path("trotter_scan.csv") << "\n";
    return 0;
}

}  // namespace z2sim

#endif
