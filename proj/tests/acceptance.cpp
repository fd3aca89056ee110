// End-to-end acceptance suite.  Each test case checks one numbered criterion
// at its stated tolerance and prints a single PASS/FAIL line.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cstdio>

#include "oracles.hpp"
#include "z2sim/analysis.hpp"
#include "z2sim/gauge_dual.hpp"
#include "z2sim/photonics.hpp"
#include "z2sim/protocol.hpp"

using namespace z2sim;

namespace {

struct CriterionGuard {
    int n;
    const char* name;
    bool passed = false;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    CriterionGuard(int n_, const char* name_) : n(n_), name(name_) {}
    double elapsed() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    ~CriterionGuard() {
        std::printf("[acceptance] criterion %2d (%s): %s  (%.1f s)\n", n, name,
                    passed ? "PASS" : "FAIL", elapsed());
        std::fflush(stdout);
    }
};

QubitRegister random_links(const LatticeGeometry& geom, Rng& rng) {
    QubitRegister reg(geom.n_links());
    double nrm = 0.0;
    for (auto& v : reg.amplitudes()) {
        v = rng.next_cgaussian();
        nrm += std::norm(v);
    }
    reg.scale(1.0 / std::sqrt(nrm));
    return reg;
}

double state_distance(const QubitRegister& a, const QubitRegister& b) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) d2 += std::norm(a[i] - b[i]);
    return std::sqrt(d2);
}

double exact_wilson(const LatticeGeometry& geom, double ratio, const LoopSpec& loop) {
    auto gs = exact_ground_state(dual_map(geom, 1.0, ratio));
    return wilson_expectation_dual(gs.vector, geom, loop);
}

std::vector<double> all_site_gauge(const AdiabaticResult& res) {
    std::vector<double> out;
    for (const auto& r : res.records) out.push_back(r.gauge_max_error);
    return out;
}

}  // namespace

TEST_CASE("criterion 1: stator identity") {
    CriterionGuard guard(1, "stator identity");
    REQUIRE(stator_eigenoperator_check(build_lattice(1, 1), 0, 20, 421) <= 1e-12);
    auto g22 = build_lattice(2, 2);
    for (int p = 0; p < g22.n_plaquettes(); ++p)
        REQUIRE(stator_eigenoperator_check(g22, p, 5, 422 + p) <= 1e-12);
    REQUIRE(guard.elapsed() < 1.0);
    guard.passed = true;
}

TEST_CASE("criterion 2: entangler decomposition") {
    CriterionGuard guard(2, "entangler decomposition");
    {
        auto g = build_lattice(1, 1);
        const int n = full_layout(g).total_qubits();
        GateSeq product;
        for (int l : plaquette_links(g, 0))
            for (const Gate& gg : controlled_plaquette_gate(g, 0, l)) product.push_back(gg);
        REQUIRE(max_abs_diff_up_to_phase(gate_seq_dense(build_u(g), n),
                                         gate_seq_dense(product, n)) <= 1e-12);
    }
    {
        auto g = build_lattice(2, 2);
        GateSeq product;
        for (int p = 0; p < g.n_plaquettes(); ++p)
            for (int l : plaquette_links(g, p))
                for (const Gate& gg : controlled_plaquette_gate(g, p, l)) product.push_back(gg);
        auto u = build_u(g);
        Rng rng(431);
        for (int t = 0; t < 20; ++t) {
            auto state = oracle::random_state(full_layout(g).total_qubits(), rng);
            auto a = state, b = state;
            apply_gates(a, u);
            apply_gates(b, product);
            REQUIRE(state_distance(a, b) <= 1e-12);
        }
    }
    REQUIRE(guard.elapsed() < 5.0);
    guard.passed = true;
}

TEST_CASE("criterion 3: disentanglement and step equivalence") {
    CriterionGuard guard(3, "stator step disentanglement");
    auto g = build_lattice(2, 2);
    auto u = build_u(g);
    auto u_dag = seq_dagger(u);
    Rng rng(433);
    for (int t = 0; t < 10; ++t) {
        const double lb = 3.0 * rng.next_double() + 0.05;
        const double tau = 0.6 * rng.next_double() + 0.01;
        auto psi = random_links(g, rng);
        auto full = embed_links(g, psi);
        step_wb_stator(full, g, lb, tau, u, u_dag);
        auto extracted = extract_links(g, full);
        REQUIRE(extracted.control_in_fidelity >= 1.0 - 1e-12);
        auto ideal = psi;
        step_wb_ideal(ideal, g, lb, tau);
        REQUIRE(state_distance(extracted.links, ideal) <= 1e-12);
    }
    REQUIRE(guard.elapsed() < 10.0);
    guard.passed = true;
}

TEST_CASE("criterion 4: gauge conservation on full ramps") {
    CriterionGuard guard(4, "gauge conservation");
    Observables obs;
    obs.gauge = true;
    {
        auto g = build_lattice(2, 2);
        for (auto [kind, dir, rf] :
             {std::tuple{EngineKind::full, Direction::electric_start, 2.0},
              std::tuple{EngineKind::full, Direction::magnetic_start, 0.25}}) {
            Schedule s{dir, 1.0, 80, rf};
            auto res = run_adiabatic(kind, g, s, obs, 1);
            for (double e : all_site_gauge(res)) REQUIRE(e <= 1e-10);
        }
    }
    {
        auto g = build_lattice(3, 3);
        for (auto [dir, rf] : {std::pair{Direction::electric_start, 2.0},
                               std::pair{Direction::magnetic_start, 0.25}}) {
            Schedule s{dir, 1.0, 80, rf};
            auto res = run_adiabatic(EngineKind::links, g, s, obs, 1);
            for (double e : all_site_gauge(res)) REQUIRE(e <= 1e-10);
        }
    }
    guard.passed = true;
}

TEST_CASE("criterion 5: dual engine equals the links engine in the gauge sector") {
    CriterionGuard guard(5, "engine oracle equivalence");
    Rng rng(437);
    for (auto [lx, ly] : {std::pair{1, 1}, std::pair{2, 2}, std::pair{2, 3}}) {
        auto g = build_lattice(lx, ly);
        const double le = 1.0, lb = 1.3;
        auto h = dual_map(g, le, lb);
        auto dual_spec = symmetric_eigensolve(h.dense(), static_cast<int>(h.dim())).values;
        auto basis = gauge_sector_basis(g);
        REQUIRE(basis.size() == h.dim());
        auto link_spec =
            symmetric_eigensolve(sector_hamiltonian_dense(g, le, lb, basis),
                                 static_cast<int>(basis.size()))
                .values;
        for (std::size_t i = 0; i < dual_spec.size(); ++i)
            REQUIRE(std::abs(dual_spec[i] - link_spec[i]) <= 1e-10);

        // Wilson expectations on sector-matched random states
        auto dual_state = oracle::random_state(g.n_plaquettes(), rng);
        auto link_state = dual_to_link_state(g, dual_state.amplitudes());
        for (int w = 1; w <= lx; ++w)
            for (int hh = 1; hh <= ly; ++hh)
                for (int ax = 0; ax + w <= lx; ++ax)
                    for (int ay = 0; ay + hh <= ly; ++ay) {
                        LoopSpec c{ax, ay, w, hh};
                        REQUIRE(std::abs(wilson_expectation_dual(dual_state, g, c) -
                                         expectation_pauli(link_state,
                                                           x_string(loop_links(g, c)))) <=
                                1e-10);
                    }
    }
    guard.passed = true;
}

TEST_CASE("criterion 6: adiabatic sweep reproduction at 4x4") {
    CriterionGuard guard(6, "4x4 sweep, both directions");
    auto g = build_lattice(4, 4);
    LoopSpec loop{1, 1, 1, 1};  // 1x1 loop in the bulk
    Observables obs;
    obs.loops = {loop};

    std::vector<double> grid;
    for (int i = 0; i <= 20; ++i) grid.push_back(0.4 * i);  // 0, 0.4, ..., 8

    std::vector<std::pair<double, double>> e_curve, m_curve, exact_curve;
    for (double x : grid) {
        Schedule s{Direction::electric_start, 1.0, 80, x};
        auto res = run_adiabatic(EngineKind::dual, g, s, obs);
        e_curve.emplace_back(x, res.final_record().loop_values[0]);
        exact_curve.emplace_back(x, exact_wilson(g, x, loop));
        if (x > 0) {
            Schedule sm{Direction::magnetic_start, 1.0, 80, 1.0 / x};
            auto resm = run_adiabatic(EngineKind::dual, g, sm, obs);
            m_curve.emplace_back(x, resm.final_record().loop_values[0]);
        }
    }

    // endpoints: nothing ramps
    REQUIRE(std::abs(e_curve.front().second) <= 1e-10);
    {
        Schedule sm{Direction::magnetic_start, 1.0, 80, 0.0};
        auto resm = run_adiabatic(EngineKind::dual, g, sm, obs);
        REQUIRE(std::abs(resm.final_record().loop_values[0] - 1.0) <= 1e-10);
    }

    // sided agreement with the exact ground state
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] <= 2.0 + 1e-12)
            REQUIRE(std::abs(e_curve[i].second - exact_curve[i].second) <= 0.05);
        if (grid[i] >= 4.0 - 1e-12)
            REQUIRE(std::abs(m_curve[i - 1].second - exact_curve[i].second) <= 0.05);
    }

    // the two measurements cross: the curves meet and the better preparation
    // side swaps; the crossing value itself is informational
    std::vector<std::pair<double, double>> dev_e, dev_m;
    double min_gap = 1e300, min_gap_at = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double gap = std::abs(e_curve[i].second - m_curve[i - 1].second);
        if (gap < min_gap) {
            min_gap = gap;
            min_gap_at = grid[i];
        }
        dev_e.emplace_back(grid[i], std::abs(e_curve[i].second - exact_curve[i].second));
        dev_m.emplace_back(grid[i], std::abs(m_curve[i - 1].second - exact_curve[i].second));
    }
    auto swap = find_crossing(dev_e, dev_m);
    std::vector<std::pair<double, double>> e_common(e_curve.begin() + 1, e_curve.end());
    auto strict = find_crossing(e_common, m_curve);
    std::printf("[acceptance]   curves meet to %.4f at ratio %.2f; advantage swaps at %s; "
                "strict sign change: %s\n",
                min_gap, min_gap_at,
                swap ? std::to_string(*swap).c_str() : "none",
                strict ? std::to_string(*strict).c_str() : "none");
    REQUIRE(min_gap <= 0.02);
    REQUIRE(swap.has_value());

    REQUIRE(guard.elapsed() < 300.0);
    guard.passed = true;
}

TEST_CASE("criterion 7: longer ramps track the exact state better (3x3)") {
    CriterionGuard guard(7, "3x3 duration scan");
    auto g = build_lattice(3, 3);
    LoopSpec loop{1, 1, 1, 1};
    Observables obs;
    obs.loops = {loop};
    const double durations[3] = {0.6, 1.0, 2.0};
    const int steps[3] = {48, 80, 160};
    for (int dir = 0; dir < 2; ++dir) {
        double previous = 1e300;
        for (int k = 0; k < 3; ++k) {
            double worst = 0.0;
            const auto side = dir == 0 ? std::vector<double>{0.4, 0.8, 1.2, 1.6, 2.0}
                                       : std::vector<double>{4, 5, 6, 7, 8};
            for (double x : side) {
                Schedule s{dir == 0 ? Direction::electric_start : Direction::magnetic_start,
                           durations[k], steps[k], dir == 0 ? x : 1.0 / x};
                auto res = run_adiabatic(EngineKind::dual, g, s, obs);
                worst = std::max(worst,
                                 std::abs(res.final_record().loop_values[0] -
                                          exact_wilson(g, x, loop)));
            }
            REQUIRE(worst < previous);
            previous = worst;
        }
    }
    guard.passed = true;
}

TEST_CASE("criterion 8: Trotter error slopes") {
    CriterionGuard guard(8, "Trotter scaling");
    auto g = build_lattice(2, 2);
    const double le = 1.0, lb = 1.3, t = 1.0;
    auto h = dual_map(g, le, lb);
    auto eig = symmetric_eigensolve(h.dense(), static_cast<int>(h.dim()));
    QubitRegister init(h.n_spins());
    const auto exact = propagate_dense(eig, t, init.amplitudes());
    for (int order : {1, 2}) {
        std::vector<std::pair<double, double>> curve;
        for (int m : {10, 20, 40, 80, 160, 320}) {
            auto reg = init;
            for (int s = 0; s < m; ++s) trotter_step_dual(reg, h, le, lb, t / m, order);
            double err = 0.0;
            for (std::size_t i = 0; i < exact.size(); ++i)
                err += std::norm(reg.amplitudes()[i] - exact[i]);
            curve.emplace_back(m, std::sqrt(err));
        }
        const auto fit = fit_slope(curve);
        std::printf("[acceptance]   order %d slope %.4f\n", order, fit.slope);
        REQUIRE(std::abs(fit.slope - (-order)) <= 0.1);
    }
    guard.passed = true;
}

TEST_CASE("criterion 9: magnetic ground-state preparation") {
    CriterionGuard guard(9, "magnetic preparation");
    {
        auto g = build_lattice(1, 1);
        auto prep = prepare_magnetic_gs(g);
        REQUIRE(std::abs(prep.probability - 0.5) <= 1e-10);
        auto extracted = extract_links(g, prep.full);
        REQUIRE(fidelity(extracted.links, links_zero_b(g)) >= 1.0 - 1e-10);
    }
    {
        auto g = build_lattice(2, 2);
        auto prep = prepare_magnetic_gs(g);
        REQUIRE(std::abs(prep.probability - 1.0 / 16) <= 1e-10);
        auto extracted = extract_links(g, prep.full);
        REQUIRE(fidelity(extracted.links, links_zero_b(g)) >= 1.0 - 1e-10);
        for (int p = 0; p < g.n_plaquettes(); ++p)
            REQUIRE(expectation_pauli(extracted.links, x_string(plaquette_links(g, p))) >=
                    1.0 - 1e-12);
    }
    guard.passed = true;
}

TEST_CASE("criterion 10: stator Wilson readout equals the direct expectation") {
    CriterionGuard guard(10, "Wilson measurement equivalence");
    auto g = build_lattice(2, 2);
    Rng rng(439);
    for (int t = 0; t < 20; ++t) {
        auto psi = random_links(g, rng);
        auto reg = embed_links(g, psi);
        for (int w = 1; w <= 2; ++w)
            for (int h = 1; h <= 2; ++h)
                for (int ax = 0; ax + w <= 2; ++ax)
                    for (int ay = 0; ay + h <= 2; ++ay) {
                        LoopSpec c{ax, ay, w, h};
                        const double direct =
                            expectation_pauli(psi, x_string(loop_links(g, c)));
                        REQUIRE(std::abs(measure_wilson_stator(reg, g, c) - direct) <= 1e-10);
                    }
    }
    // the 3x3 loop is read out in exactly two distance sets, through a
    // single measurement control
    auto g3 = build_lattice(3, 3);
    LoopSpec big{0, 0, 3, 3};
    const int center = loop_center_plaquette(g3, big);
    auto sets = wilson_link_sets(g3, big, center, true);
    REQUIRE(sets.size() == 2);
    REQUIRE(sets[0].size() == 4);
    REQUIRE(sets[1].size() == 8);
    Rng rng3(443);
    auto psi3 = random_links(g3, rng3);
    const double direct3 = expectation_pauli(psi3, x_string(loop_links(g3, big)));
    REQUIRE(std::abs(measure_wilson_single_control(psi3, g3, big, center) - direct3) <= 1e-10);
    guard.passed = true;
}

TEST_CASE("criterion 11: residual interaction theorems") {
    CriterionGuard guard(11, "undesired-interaction classes");
    auto geom = build_lattice(2, 2);
    const double j = 1.0;
    Schedule sched{Direction::electric_start, 1.0, 10, 1.5};
    const AtomTable atoms = atom_table(geom);
    const auto ideal = ideal_nn_coupling(geom, j);
    const auto ideal_run = gauge_violation_run(geom, ideal, j, sched);

    // link-link residuals cancel within each step
    {
        auto m = ideal;
        int added = 0;
        for (int i = 0; i < atoms.n_links; ++i)
            for (int k = i + 1; k < atoms.n_links; ++k)
                if (distance(atoms.positions[i], atoms.positions[k]) < 0.8) {
                    PairEntry e;
                    e.strength = 0.3 * j;
                    e.cls = PairClass::residual;
                    m.set(i, k, e);
                    ++added;
                }
        REQUIRE(added > 0);
        Schedule one_step = sched;
        one_step.steps = 1;
        auto single = gauge_violation_run(geom, m, j, one_step);
        auto single_ideal = gauge_violation_run(geom, ideal, j, one_step);
        REQUIRE(state_distance(single.final_state, single_ideal.final_state) <= 1e-12);
        auto multi = gauge_violation_run(geom, m, j, sched);
        REQUIRE(state_distance(multi.final_state, ideal_run.final_state) <= 1e-12);
    }
    // control-control residuals: one fixed control-only conjugation
    {
        auto m = ideal;
        const double strength = 0.35 * j;
        const FullLayout lay = full_layout(geom);
        GateSeq ucc;
        for (int p = 0; p < geom.n_plaquettes(); ++p)
            for (int r = p + 1; r < geom.n_plaquettes(); ++r)
                if (distance(geom.control_position(p), geom.control_position(r)) < 1.1) {
                    PairEntry e;
                    e.strength = strength;
                    e.cls = PairClass::residual;
                    m.set(atoms.n_links + p, atoms.n_links + r, e);
                    ucc.push_back(Gate::rotation(
                        PauliString::from_factors({{lay.control_qubit(p), Axis::Z},
                                                   {lay.control_qubit(r), Axis::Z}}),
                        (M_PI / 4) * strength / j));
                }
        REQUIRE_FALSE(ucc.empty());
        auto run = gauge_violation_run(geom, m, j, sched);
        QubitRegister conjugated = embed_links(geom, links_zero_e(geom));
        apply_gates(conjugated, ucc);
        auto u = build_u(geom);
        auto u_dag = seq_dagger(u);
        const double tau = sched.total_time / sched.steps;
        for (int s = 0; s < sched.steps; ++s) {
            auto [le, lb] = sched.couplings((s + 0.5) * tau);
            step_wb_stator(conjugated, geom, lb, tau, u, u_dag);
            step_we(conjugated, geom, le, tau);
        }
        apply_gates(conjugated, seq_dagger(ucc));
        REQUIRE(state_distance(conjugated, run.final_state) <= 1e-10);
    }
    // control-link residuals: strictly positive, monotone gauge error
    {
        double last = 0.0;
        for (double s : {0.05, 0.1, 0.2, 0.3, 0.4}) {
            auto m = ideal;
            int added = 0;
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
            REQUIRE(added > 0);
            auto run = gauge_violation_run(geom, m, j, sched);
            double worst = 0.0;
            for (double e : run.max_errors) worst = std::max(worst, e);
            REQUIRE(worst > last);
            last = worst;
        }
        REQUIRE(last > 0.0);
    }
    guard.passed = true;
}

TEST_CASE("criterion 12: schedule selectivity and collisions") {
    CriterionGuard guard(12, "sideband selectivity");
    {
        GradientSpec grad{1.0, M_SQRT2, 1.0};
        auto schedule = canonical_nn_schedule(grad);
        auto g = build_lattice(4, 4);
        auto m = resonant_pairs(g, grad, schedule, 1e-6 * grad.scale_g);
        for (int i = 0; i < m.n_atoms(); ++i)
            for (int k = i + 1; k < m.n_atoms(); ++k)
                REQUIRE(m.at(i, k).resonant == (m.at(i, k).cls == PairClass::desired_nn));
    }
    {
        GradientSpec grad{1.0, 2.0, 1.0};  // rational q/p
        auto rep = collision_report(build_lattice(4, 4), grad, 0.0, 8);
        REQUIRE_FALSE(rep.collisions.empty());
        REQUIRE(rep.max_safe_size < 8);
        std::printf("[acceptance]   rational gradient: %zu collisions, max safe size %d\n",
                    rep.collisions.size(), rep.max_safe_size);
    }
    guard.passed = true;
}

TEST_CASE("criterion 13: cooperativity budget scaling") {
    CriterionGuard guard(13, "budget T_max exponent");
    // default model knob: per-step gate error b * C^-1 (gate_error_exponent = 1),
    // which makes the second-order optimum scale as C^(2/3)
    std::vector<std::pair<double, double>> curve;
    for (int i = 0; i <= 12; ++i) {
        const double c = 10.0 * std::pow(1000.0, i / 12.0);
        curve.emplace_back(c, error_budget(c, 1.0, 2).t_max);
    }
    const auto fit = fit_slope(curve);
    std::printf("[acceptance]   fitted T_max exponent %.4f (target 2/3)\n", fit.slope);
    REQUIRE(std::abs(fit.slope - 2.0 / 3.0) <= 0.05);
    guard.passed = true;
}
