#ifndef Z2SIM_PROTOCOL_HPP
#define Z2SIM_PROTOCOL_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "z2sim/common.hpp"
#include "z2sim/dense.hpp"
#include "z2sim/gauge_dual.hpp"
#include "z2sim/lattice.hpp"
#include "z2sim/pauli.hpp"
#include "z2sim/statevec.hpp"

namespace z2sim {

// Qubit layout of the full (links + controls) register: link l sits on
// qubit l, the control of plaquette p on qubit n_links + p.
struct FullLayout {
    int n_links = 0;
    int n_plaquettes = 0;

    int link_qubit(int l) const { return l; }
    int control_qubit(int p) const { return n_links + p; }
    int total_qubits() const { return n_links + n_plaquettes; }
    std::uint64_t link_mask() const { return (std::uint64_t{1} << n_links) - 1; }
};

inline FullLayout full_layout(const LatticeGeometry& geom) {
    return {geom.n_links(), geom.n_plaquettes()};
}

// ---------------------------------------------------------------------------
// Gate sequences

enum class GateKind { rotation, pauli, projector, global_phase };

struct Gate {
    GateKind kind = GateKind::rotation;
    PauliString op;
    double angle = 0.0;  // rotation: exp(-i angle op); global_phase: exp(i angle)
    int sign = +1;       // projector: (1 + sign op)/2

    static Gate rotation(PauliString p, double phi) { return {GateKind::rotation, p, phi, +1}; }
    static Gate pauli(PauliString p) { return {GateKind::pauli, p, 0.0, +1}; }
    static Gate projector(PauliString p, int s) { return {GateKind::projector, p, 0.0, s}; }
    static Gate phase(double theta) { return {GateKind::global_phase, {}, theta, +1}; }
};

using GateSeq = std::vector<Gate>;

// Applies the sequence; returns the product of projector probabilities
// (1 when the sequence is unitary).
inline double apply_gates(QubitRegister& reg, const GateSeq& seq) {
    double prob = 1.0;
    for (const Gate& g : seq) {
        switch (g.kind) {
            case GateKind::rotation: apply_pauli_rotation(reg, g.op, g.angle); break;
            case GateKind::pauli: apply_pauli_string(reg, g.op); break;
            case GateKind::projector: prob *= apply_projector(reg, g.op, g.sign); break;
            case GateKind::global_phase: {
                const cplx f = std::polar(1.0, g.angle);
                auto& amp = reg.amplitudes();
                parallel_for(reg.dim(), [&](std::size_t lo, std::size_t hi, std::size_t) {
                    for (std::size_t i = lo; i < hi; ++i) amp[i] *= f;
                });
                break;
            }
        }
    }
    return prob;
}

inline GateSeq seq_dagger(const GateSeq& seq) {
    GateSeq out;
    out.reserve(seq.size());
    for (auto it = seq.rbegin(); it != seq.rend(); ++it) {
        Gate g = *it;
        switch (g.kind) {
            case GateKind::rotation:
            case GateKind::global_phase: g.angle = -g.angle; break;
            case GateKind::pauli:
                if (!g.op.is_hermitian()) g.op.multiply_phase(2);
                break;
            case GateKind::projector:
                throw std::invalid_argument("projectors have no inverse");
        }
        out.push_back(g);
    }
    return out;
}

// Dense matrix of a unitary gate sequence (oracle scale only).
inline CMatrix gate_seq_dense(const GateSeq& seq, int n_qubits) {
    CMatrix m = CMatrix::identity(std::size_t{1} << n_qubits);
    for (const Gate& g : seq) {
        switch (g.kind) {
            case GateKind::rotation: m = rotation_dense(g.op, g.angle, n_qubits) * m; break;
            case GateKind::pauli: m = pauli_dense(g.op, n_qubits) * m; break;
            case GateKind::global_phase: {
                const cplx f = std::polar(1.0, g.angle);
                for (auto& v : m.a) v *= f;
                break;
            }
            case GateKind::projector:
                throw std::invalid_argument("projector inside a unitary sequence");
        }
    }
    return m;
}

// ---------------------------------------------------------------------------
// Stator construction

// Controlled flip |down~><down~| + |up~><up~| (x) sigma_x on (control of p,
// link i), decomposed into three commuting rotations and a global phase:
//
//   e^{i pi/4} exp(-i pi/4 sigma~_z sigma_x) exp(-i pi/4 sigma_x) exp(+i pi/4 sigma~_z)
//
// The sign of the sigma~_z factor is fixed by requiring the product to equal
// the controlled form exactly; with the opposite sign the two control
// branches come out with a relative phase of -1.
inline GateSeq controlled_flip_gate_at(int control_qubit, int link_qubit) {
    GateSeq seq;
    seq.push_back(Gate::rotation(PauliString::single(control_qubit, Axis::Z), -M_PI / 4));
    seq.push_back(Gate::rotation(PauliString::single(link_qubit, Axis::X), M_PI / 4));
    seq.push_back(Gate::rotation(
        PauliString::from_factors({{link_qubit, Axis::X}, {control_qubit, Axis::Z}}), M_PI / 4));
    seq.push_back(Gate::phase(M_PI / 4));
    return seq;
}

inline GateSeq controlled_flip_gate(const LatticeGeometry& geom, int p, int link) {
    geom.check_plaquette(p);
    geom.check_link(link);
    return controlled_flip_gate_at(full_layout(geom).control_qubit(p), link);
}

// Same gate restricted to the control's own plaquette.
inline GateSeq controlled_plaquette_gate(const LatticeGeometry& geom, int p, int link) {
    geom.check_plaquette(p);
    auto pl = plaquette_links(geom, p);
    if (std::find(pl.begin(), pl.end(), link) == pl.end())
        throw std::invalid_argument("link " + std::to_string(link) + " is not on plaquette " +
                                    std::to_string(p));
    return controlled_flip_gate(geom, p, link);
}

// The full entangler U = prod_x prod_{i in p(x)} U_x^(i), realized in four
// global layers:
//   1. per-link sigma_x rotation, weighted by the number of plaquettes the
//      link belongs to (interior links are rotated once per plaquette),
//   2. V~_y(pi/4) on the controls,
//   3. V_I: exp(-i pi/4 sigma_x sigma~_x) on every control-link pair of
//      every plaquette,
//   4. V~_y(pi/4)^dagger.
// The y layers turn the control axis of V_I from x into z, after which the
// product equals the product of the controlled gates above, global phase
// exactly 1.
inline GateSeq build_u(const LatticeGeometry& geom) {
    const FullLayout lay = full_layout(geom);
    if (lay.total_qubits() > QubitRegister::kMaxQubits)
        throw CapacityError("full engine needs " + std::to_string(lay.total_qubits()) +
                            " qubits for " + std::to_string(geom.lx()) + "x" +
                            std::to_string(geom.ly()) +
                            "; use the links-only or dual engine");
    GateSeq seq;
    for (int l = 0; l < geom.n_links(); ++l)
        seq.push_back(Gate::rotation(PauliString::single(l, Axis::X),
                                     geom.link_plaquette_count(l) * M_PI / 4));
    for (int p = 0; p < geom.n_plaquettes(); ++p)
        seq.push_back(Gate::rotation(PauliString::single(lay.control_qubit(p), Axis::Y), M_PI / 4));
    for (int p = 0; p < geom.n_plaquettes(); ++p)
        for (int l : plaquette_links(geom, p))
            seq.push_back(Gate::rotation(
                PauliString::from_factors({{l, Axis::X}, {lay.control_qubit(p), Axis::X}}),
                M_PI / 4));
    for (int p = 0; p < geom.n_plaquettes(); ++p)
        seq.push_back(Gate::rotation(PauliString::single(lay.control_qubit(p), Axis::Y), -M_PI / 4));
    return seq;
}

// Same four layers, with the interaction layer built from an explicit list
// of pair rotations (atom index = qubit index of the full layout).  The
// ideal entangler is recovered by the nearest-neighbour pairs at pi/4.
inline GateSeq build_u_with_pairs(const LatticeGeometry& geom,
                                  const std::vector<std::tuple<int, int, double>>& pair_angles) {
    const FullLayout lay = full_layout(geom);
    GateSeq seq;
    for (int l = 0; l < geom.n_links(); ++l)
        seq.push_back(Gate::rotation(PauliString::single(l, Axis::X),
                                     geom.link_plaquette_count(l) * M_PI / 4));
    for (int p = 0; p < geom.n_plaquettes(); ++p)
        seq.push_back(Gate::rotation(PauliString::single(lay.control_qubit(p), Axis::Y), M_PI / 4));
    for (const auto& [a, b, angle] : pair_angles) {
        if (a == b || a < 0 || b < 0 || a >= lay.total_qubits() || b >= lay.total_qubits())
            throw std::invalid_argument("bad atom pair in interaction layer");
        seq.push_back(Gate::rotation(
            PauliString::from_factors({{a, Axis::X}, {b, Axis::X}}), angle));
    }
    for (int p = 0; p < geom.n_plaquettes(); ++p)
        seq.push_back(Gate::rotation(PauliString::single(lay.control_qubit(p), Axis::Y), -M_PI / 4));
    return seq;
}

// ---------------------------------------------------------------------------
// States

// |0_E> on the links-only register.
inline QubitRegister links_zero_e(const LatticeGeometry& geom) {
    if (geom.n_links() > QubitRegister::kMaxQubits)
        throw CapacityError("links-only engine needs " + std::to_string(geom.n_links()) +
                            " qubits; use the dual (plaquette-spin) engine");
    return QubitRegister(geom.n_links());
}

// |0_B> on the links-only register, built by projecting (1 + B(x))/2 for
// every plaquette onto |0_E>.
inline QubitRegister links_zero_b(const LatticeGeometry& geom) {
    QubitRegister reg = links_zero_e(geom);
    for (int p = 0; p < geom.n_plaquettes(); ++p)
        apply_projector(reg, x_string(plaquette_links(geom, p)), +1);
    return reg;
}

// link_state (x) |in~ ... in~> on the full register.
inline QubitRegister embed_links(const LatticeGeometry& geom, const QubitRegister& link_state) {
    const FullLayout lay = full_layout(geom);
    if (link_state.n_qubits() != lay.n_links)
        throw std::invalid_argument("link state size mismatch");
    QubitRegister full(lay.total_qubits());
    auto& amp = full.amplitudes();
    const auto& lamp = link_state.amplitudes();
    const double w = std::pow(0.5, 0.5 * lay.n_plaquettes);
    const std::uint64_t lmask = lay.link_mask();
    parallel_for(full.dim(), [&](std::size_t lo, std::size_t hi, std::size_t) {
        for (std::size_t b = lo; b < hi; ++b) amp[b] = lamp[b & lmask] * w;
    });
    return full;
}

struct ExtractedLinks {
    QubitRegister links;
    double control_in_fidelity = 0.0;  // <in~|rho_controls|in~>
};

// Projects the controls onto |in~> and returns the normalized link state.
inline ExtractedLinks extract_links(const LatticeGeometry& geom, const QubitRegister& full) {
    const FullLayout lay = full_layout(geom);
    if (full.n_qubits() != lay.total_qubits())
        throw std::invalid_argument("full state size mismatch");
    QubitRegister links(lay.n_links);
    auto& lamp = links.amplitudes();
    std::fill(lamp.begin(), lamp.end(), cplx{0, 0});
    const auto& amp = full.amplitudes();
    const double w = std::pow(0.5, 0.5 * lay.n_plaquettes);
    const std::size_t ncontrol = std::size_t{1} << lay.n_plaquettes;
    parallel_for(links.dim(), [&](std::size_t lo, std::size_t hi, std::size_t) {
        for (std::size_t b = lo; b < hi; ++b) {
            cplx acc{0, 0};
            for (std::size_t cb = 0; cb < ncontrol; ++cb)
                acc += amp[b | (cb << lay.n_links)];
            lamp[b] = acc * w;
        }
    });
    ExtractedLinks out{std::move(links), 0.0};
    out.control_in_fidelity = out.links.norm_sq();
    if (out.control_in_fidelity > 1e-300)
        out.links.scale(1.0 / std::sqrt(out.control_in_fidelity));
    return out;
}

// ---------------------------------------------------------------------------
// Protocol steps.  Conventions: every evolution operator is exp(-i H tau)
// with H as in the model, and V_i(phi) = exp(-i phi sum sigma_i), so
// W_E = V_z(-tau lambda_E) and W_B = U^dagger V~_x(-tau lambda_B) U.

// W_E: global sigma_z rotation on the links (any register that keeps links
// on qubits [0, n_links)).
inline void step_we(QubitRegister& reg, const LatticeGeometry& geom, double lambda_e_mid,
                    double tau) {
    apply_global_z_phase(reg, (std::uint64_t{1} << geom.n_links()) - 1, tau * lambda_e_mid);
}

// W_B, ideal form: exp(+i tau lambda_B sum_x B(x)) as four-body rotations.
inline void step_wb_ideal(QubitRegister& reg, const LatticeGeometry& geom, double lambda_b_mid,
                          double tau) {
    for (int p = 0; p < geom.n_plaquettes(); ++p)
        apply_pauli_rotation(reg, x_string(plaquette_links(geom, p)), -tau * lambda_b_mid);
}

// W_B, stator form: U^dagger V~_x(-tau lambda_B) U on the full register.
inline void step_wb_stator(QubitRegister& reg, const LatticeGeometry& geom, double lambda_b_mid,
                           double tau, const GateSeq& u, const GateSeq& u_dag) {
    const FullLayout lay = full_layout(geom);
    apply_gates(reg, u);
    for (int p = 0; p < geom.n_plaquettes(); ++p)
        apply_pauli_rotation(reg, PauliString::single(lay.control_qubit(p), Axis::X),
                             -tau * lambda_b_mid);
    apply_gates(reg, u_dag);
}

// Max over random link states of || sigma~_x U (|in~> (x) |psi>)
//                                  - U (|in~> (x) B|psi>) ||.
inline double stator_eigenoperator_check(const LatticeGeometry& geom, int p, int trials,
                                         std::uint64_t seed = 99,
                                         const PauliString* b_override = nullptr) {
    const FullLayout lay = full_layout(geom);
    const GateSeq u = build_u(geom);
    const PauliString b_string =
        b_override ? *b_override : x_string(plaquette_links(geom, p));
    const PauliString control_x = PauliString::single(lay.control_qubit(p), Axis::X);
    Rng rng(seed);
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        QubitRegister psi(geom.n_links());
        double nrm = 0.0;
        for (auto& v : psi.amplitudes()) {
            v = rng.next_cgaussian();
            nrm += std::norm(v);
        }
        psi.scale(1.0 / std::sqrt(nrm));

        QubitRegister lhs = embed_links(geom, psi);
        apply_gates(lhs, u);
        apply_pauli_string(lhs, control_x);

        QubitRegister flipped = psi;
        apply_pauli_string(flipped, b_string);
        QubitRegister rhs = embed_links(geom, flipped);
        apply_gates(rhs, u);

        double d2 = 0.0;
        for (std::size_t i = 0; i < lhs.dim(); ++i)
            d2 += std::norm(lhs[i] - rhs[i]);
        worst = std::max(worst, std::sqrt(d2));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Magnetic ground-state preparation by post-selection: project every control
// of U |in~> (x) |0_E> onto |+~>; the links are left in |0_B>.

struct MagneticPreparation {
    QubitRegister full;   // |in~> (x) |0_B>
    double probability;   // joint post-selection probability, 2^-N_p
};

inline MagneticPreparation prepare_magnetic_gs(const LatticeGeometry& geom) {
    const FullLayout lay = full_layout(geom);
    QubitRegister reg = embed_links(geom, links_zero_e(geom));
    apply_gates(reg, build_u(geom));
    double prob = 1.0;
    for (int p = 0; p < geom.n_plaquettes(); ++p)
        prob *= apply_projector(reg, PauliString::single(lay.control_qubit(p), Axis::X), +1);
    return {std::move(reg), prob};
}

// ---------------------------------------------------------------------------
// Loop composition: a set of sub-loops tiling a rectangle multiplies to the
// outer loop (shared edges cancel since sigma_x^2 = 1).

struct LoopComposition {
    LoopSpec outer;
    PauliString loop_string;  // on link qubits
};

inline LoopComposition compose_loops(const LatticeGeometry& geom,
                                     const std::vector<LoopSpec>& loops) {
    if (loops.empty()) throw std::invalid_argument("empty loop composition");
    std::map<int, int> multiplicity;
    PauliString product;
    for (const auto& c : loops) {
        check_loop(geom, c);
        for (int p : loop_enclosed_plaquettes(geom, c)) ++multiplicity[p];
        product = product * x_string(loop_links(geom, c));
    }
    int min_x = geom.lx(), min_y = geom.ly(), max_x = -1, max_y = -1;
    for (const auto& [p, m] : multiplicity) {
        if (m != 1)
            throw std::invalid_argument("overlapping tiling: plaquette " + std::to_string(p) +
                                        " covered " + std::to_string(m) + " times");
        auto [x, y] = geom.plaquette_xy(p);
        min_x = std::min(min_x, x);
        min_y = std::min(min_y, y);
        max_x = std::max(max_x, x);
        max_y = std::max(max_y, y);
    }
    LoopSpec outer{min_x, min_y, max_x - min_x + 1, max_y - min_y + 1};
    if (multiplicity.size() !=
        static_cast<std::size_t>(outer.width) * static_cast<std::size_t>(outer.height))
        throw std::invalid_argument("gapped tiling: covered plaquettes do not fill a rectangle");
    if (!(product == x_string(loop_links(geom, outer))))
        throw NumericalError("composed loop string does not match the outer perimeter");
    return {outer, product};
}

// ---------------------------------------------------------------------------
// Wilson-loop readout through a control.

// Plans the controlled-flip pulses: odd square loops centred on the control
// are grouped into sets of equal control distance; any other rectangle goes
// through its tiling into 1x1 loops, whose shared edges appear twice and
// cancel, leaving exactly the outer perimeter.
inline std::vector<std::vector<int>> wilson_link_sets(const LatticeGeometry& geom,
                                                      const LoopSpec& loop, int control,
                                                      bool allow_composition) {
    if (loop.is_odd_square() && control == loop_center_plaquette(geom, loop))
        return distance_sets(geom, loop, control);
    if (!allow_composition)
        throw std::invalid_argument(
            "only odd square loops have a native center-control measurement; "
            "enable composition for other shapes");
    std::vector<LoopSpec> tiles;
    for (int j = 0; j < loop.height; ++j)
        for (int i = 0; i < loop.width; ++i)
            tiles.push_back({loop.anchor_x + i, loop.anchor_y + j, 1, 1});
    auto comp = compose_loops(geom, tiles);
    std::vector<int> perimeter;
    for (int l = 0; l < geom.n_links(); ++l)
        if ((comp.loop_string.x_mask() >> l) & 1) perimeter.push_back(l);
    return {perimeter};
}

// Entangles the control with every loop link by controlled flips, applied
// set-by-set in order of distance from the control, reads <sigma~_x> on the
// control, then undoes the entangler.
inline double measure_wilson_stator(QubitRegister& reg, const LatticeGeometry& geom,
                                    const LoopSpec& loop, int control = -1,
                                    bool allow_composition = true) {
    check_loop(geom, loop);
    const FullLayout lay = full_layout(geom);
    if (reg.n_qubits() != lay.total_qubits())
        throw std::invalid_argument("stator measurement needs the full register");
    if (control < 0) control = loop_center_plaquette(geom, loop);
    geom.check_plaquette(control);

    GateSeq entangler;
    for (const auto& set : wilson_link_sets(geom, loop, control, allow_composition))
        for (int l : set)
            for (const Gate& g : controlled_flip_gate(geom, control, l))
                entangler.push_back(g);
    apply_gates(reg, entangler);
    const double value =
        expectation_pauli(reg, PauliString::single(lay.control_qubit(control), Axis::X));
    apply_gates(reg, seq_dagger(entangler));
    return value;
}

// Same readout with a links-only state and one measurement ancilla standing
// in for the loop's control, so lattices whose full register would not fit
// remain measurable.  The input state is left untouched.
inline double measure_wilson_single_control(const QubitRegister& links,
                                            const LatticeGeometry& geom, const LoopSpec& loop,
                                            int control = -1, bool allow_composition = true) {
    check_loop(geom, loop);
    if (links.n_qubits() != geom.n_links())
        throw std::invalid_argument("expected a links-only state");
    if (control < 0) control = loop_center_plaquette(geom, loop);
    geom.check_plaquette(control);
    const int ancilla = geom.n_links();

    QubitRegister reg(geom.n_links() + 1);  // throws CapacityError when too large
    auto& amp = reg.amplitudes();
    const auto& lamp = links.amplitudes();
    parallel_for(links.dim(), [&](std::size_t lo, std::size_t hi, std::size_t) {
        for (std::size_t b = lo; b < hi; ++b) {
            amp[b] = lamp[b] * M_SQRT1_2;
            amp[b | (std::uint64_t{1} << ancilla)] = lamp[b] * M_SQRT1_2;
        }
    });
    GateSeq entangler;
    for (const auto& set : wilson_link_sets(geom, loop, control, allow_composition))
        for (int l : set)
            for (const Gate& g : controlled_flip_gate_at(ancilla, l)) entangler.push_back(g);
    apply_gates(reg, entangler);
    return expectation_pauli(reg, PauliString::single(ancilla, Axis::X));
}

// ---------------------------------------------------------------------------
// Adiabatic ramps

enum class EngineKind { full, links, dual };

inline std::string engine_name(EngineKind k) {
    switch (k) {
        case EngineKind::full: return "full";
        case EngineKind::links: return "links";
        case EngineKind::dual: return "dual";
    }
    return "?";
}

enum class Direction { electric_start, magnetic_start };

inline std::string direction_name(Direction d) {
    return d == Direction::electric_start ? "electric" : "magnetic";
}

enum class TimeSampling { midpoint, left };

// Linear ramp of the coupling ratio.  Electric start: lambda_E = 1 and
// lambda_B/lambda_E ramps 0 -> final_ratio; magnetic start: lambda_B = 1 and
// lambda_E/lambda_B ramps 0 -> final_ratio.
struct Schedule {
    Direction direction = Direction::electric_start;
    double total_time = 1.0;
    int steps = 80;
    double final_ratio = 1.0;
    int order = 1;
    TimeSampling sampling = TimeSampling::midpoint;

    void validate() const {
        if (total_time < 0) throw std::invalid_argument("schedule needs total_time >= 0");
        if (steps < 1) throw std::invalid_argument("schedule needs at least one step");
        if (final_ratio < 0) throw std::invalid_argument("final coupling ratio must be >= 0");
        if (order != 1 && order != 2) throw std::invalid_argument("Trotter order must be 1 or 2");
    }

    // couplings at time t
    std::pair<double, double> couplings(double t) const {
        const double ramp = total_time > 0 ? final_ratio * (t / total_time) : 0.0;
        if (direction == Direction::electric_start) return {1.0, ramp};
        return {ramp, 1.0};
    }
};

struct Observables {
    std::vector<LoopSpec> loops;
    bool energy = false;
    bool gauge = false;
};

struct StepRecord {
    int step = 0;
    double time = 0.0;
    double lambda_e = 0.0;
    double lambda_b = 0.0;
    std::vector<double> loop_values;
    double energy = 0.0;
    double gauge_max_error = 0.0;
};

struct AdiabaticResult {
    EngineKind engine;
    std::vector<StepRecord> records;  // last entry is the final state

    const StepRecord& final_record() const { return records.back(); }
};

namespace detail {

inline double dual_energy(const QubitRegister& reg, const DualHamiltonian& h, double le,
                          double lb) {
    const auto& zd = h.z_diagonal();
    const auto& amp = reg.amplitudes();
    double e = parallel_sum(reg.dim(),
                            [&](std::size_t b) { return -le * zd[b] * std::norm(amp[b]); });
    for (int p = 0; p < h.n_spins(); ++p)
        e += -lb * expectation_pauli(reg, PauliString::single(p, Axis::X));
    return e;
}

inline double links_energy(const QubitRegister& reg, const LatticeGeometry& geom, double le,
                           double lb) {
    std::vector<std::uint64_t> link_masks;
    for (int l = 0; l < geom.n_links(); ++l)
        link_masks.push_back(std::uint64_t{1} << l);
    double e = 0.0;
    for (double z : expectation_zmask_batch(reg, link_masks)) e += -le * z;
    for (int p = 0; p < geom.n_plaquettes(); ++p)
        e += -lb * expectation_pauli(reg, x_string(plaquette_links(geom, p)));
    return e;
}

}  // namespace detail

// Runs the Trotterized ramp on the requested engine.  record_every = 0
// records only the final state; k > 0 also records the initial state and
// every k-th step.
inline AdiabaticResult run_adiabatic(EngineKind kind, const LatticeGeometry& geom,
                                     const Schedule& schedule, const Observables& obs,
                                     int record_every = 0) {
    schedule.validate();
    for (const auto& c : obs.loops) check_loop(geom, c);
    const double tau = schedule.total_time / schedule.steps;

    // engine state
    std::optional<QubitRegister> reg;
    std::optional<DualHamiltonian> dual;
    GateSeq u, u_dag;

    if (kind == EngineKind::full) {
        QubitRegister links = schedule.direction == Direction::electric_start
                                  ? links_zero_e(geom)
                                  : links_zero_b(geom);
        reg.emplace(embed_links(geom, links));
        u = build_u(geom);
        u_dag = seq_dagger(u);
    } else if (kind == EngineKind::links) {
        reg.emplace(schedule.direction == Direction::electric_start ? links_zero_e(geom)
                                                                    : links_zero_b(geom));
    } else {
        dual.emplace(geom, 1.0, 1.0);
        if (schedule.direction == Direction::electric_start) {
            reg.emplace(geom.n_plaquettes());  // all dual spins up = |0_E>
        } else {
            std::vector<std::array<cplx, 2>> plus(
                geom.n_plaquettes(),
                std::array<cplx, 2>{cplx{M_SQRT1_2, 0}, cplx{M_SQRT1_2, 0}});
            reg.emplace(init_product_state(plus));  // all along +x = |0_B>
        }
    }

    std::vector<std::uint64_t> star_masks;
    if (obs.gauge && kind != EngineKind::dual)
        for (int s = 0; s < geom.n_sites(); ++s) {
            std::uint64_t m = 0;
            for (int l : star_links(geom, s)) m |= std::uint64_t{1} << l;
            star_masks.push_back(m);
        }

    AdiabaticResult result;
    result.engine = kind;

    auto record = [&](int step, double t, double le, double lb) {
        StepRecord r;
        r.step = step;
        r.time = t;
        r.lambda_e = le;
        r.lambda_b = lb;
        for (const auto& c : obs.loops) {
            if (kind == EngineKind::dual)
                r.loop_values.push_back(wilson_expectation_dual(*reg, geom, c));
            else
                r.loop_values.push_back(expectation_pauli(*reg, x_string(loop_links(geom, c))));
        }
        if (obs.energy)
            r.energy = kind == EngineKind::dual
                           ? detail::dual_energy(*reg, *dual, le, lb)
                           : detail::links_energy(*reg, geom, le, lb);
        if (obs.gauge) {
            if (kind == EngineKind::dual) {
                r.gauge_max_error = 0.0;  // exact by construction
            } else {
                double worst = 0.0;
                for (double v : expectation_zmask_batch(*reg, star_masks))
                    worst = std::max(worst, 1.0 - v);
                r.gauge_max_error = worst;
            }
        }
        result.records.push_back(std::move(r));
    };

    {
        auto [le0, lb0] = schedule.couplings(0.0);
        if (record_every > 0) record(0, 0.0, le0, lb0);
    }

    for (int m = 0; m < schedule.steps; ++m) {
        const double t_sample = schedule.sampling == TimeSampling::midpoint
                                    ? (m + 0.5) * tau
                                    : m * tau;
        auto [le, lb] = schedule.couplings(t_sample);
        if (kind == EngineKind::dual) {
            trotter_step_dual(*reg, *dual, le, lb, tau, schedule.order);
        } else if (schedule.order == 1) {
            if (kind == EngineKind::full)
                step_wb_stator(*reg, geom, lb, tau, u, u_dag);
            else
                step_wb_ideal(*reg, geom, lb, tau);
            step_we(*reg, geom, le, tau);
        } else {
            step_we(*reg, geom, le, tau / 2);
            if (kind == EngineKind::full)
                step_wb_stator(*reg, geom, lb, tau, u, u_dag);
            else
                step_wb_ideal(*reg, geom, lb, tau);
            step_we(*reg, geom, le, tau / 2);
        }
        const bool last = (m == schedule.steps - 1);
        if (last || (record_every > 0 && (m + 1) % record_every == 0))
            record(m + 1, (m + 1) * tau, le, lb);
    }
    return result;
}

// Picks the largest engine that fits, preferring full > links > dual.
inline EngineKind auto_engine(const LatticeGeometry& geom) {
    if (geom.n_links() + geom.n_plaquettes() <= QubitRegister::kMaxQubits)
        return EngineKind::full;
    if (geom.n_links() <= QubitRegister::kMaxQubits) return EngineKind::links;
    return EngineKind::dual;
}

}  // namespace z2sim

#endif
