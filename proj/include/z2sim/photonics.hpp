#ifndef Z2SIM_PHOTONICS_HPP
#define Z2SIM_PHOTONICS_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "z2sim/common.hpp"
#include "z2sim/lattice.hpp"
#include "z2sim/protocol.hpp"

namespace z2sim {

// ---------------------------------------------------------------------------
// Interaction profile

enum class PlatformKind { cavity, photonic_crystal };

struct InteractionModel {
    PlatformKind kind = PlatformKind::cavity;
    double strength_j = 1.0;   // overall spin-spin strength, energy units
    double range_l = 1.0;      // bound-state range in units of a (crystal only)
    double cooperativity = 100.0;
    double nn_distance = 0.5;  // designed control-link distance: plaquette
                               // center to edge midpoint = a/2

    void validate() const {
        if (strength_j <= 0) throw std::invalid_argument("interaction strength J must be > 0");
        if (kind == PlatformKind::photonic_crystal && range_l <= 0)
            throw std::invalid_argument("photonic-crystal range L must be > 0");
        if (cooperativity <= 0) throw std::invalid_argument("cooperativity must be > 0");
    }
};

// |f(r)| before normalization: 1 for a cavity, e^{-r/L}/sqrt(r/L) for the
// crystal bound state.
inline double coupling_profile_raw(const InteractionModel& model, double r) {
    if (model.kind == PlatformKind::cavity) {
        if (r < 0) throw std::invalid_argument("negative distance");
        return 1.0;
    }
    if (r <= 0)
        throw std::invalid_argument("the photonic-crystal profile diverges at r = 0");
    const double x = r / model.range_l;
    return std::exp(-x) / std::sqrt(x);
}

// Normalized so f = 1 at the designed nearest-neighbour distance, which
// makes J the rotation rate of the protocol pulses.
inline double coupling_profile(const InteractionModel& model, double r) {
    if (model.kind == PlatformKind::cavity) return coupling_profile_raw(model, r);
    return coupling_profile_raw(model, r) / coupling_profile_raw(model, model.nn_distance);
}

// ---------------------------------------------------------------------------
// Zeeman gradient and sideband schedule

struct GradientSpec {
    double p = 1.0;
    double q = M_SQRT2;
    double scale_g = 1.0;  // mu_B |grad B| a, frequency units

    void validate() const {
        if (p == 0.0 && q == 0.0) throw std::invalid_argument("gradient direction (p,q) is zero");
        if (scale_g <= 0) throw std::invalid_argument("gradient scale must be > 0");
    }
};

inline double zeeman_shift(const GradientSpec& grad, const Coord& pos) {
    return grad.scale_g * (grad.p * pos.x + grad.q * pos.y);
}

enum class ToneTarget { all, links, controls };

// One modulation tone.  Lattice positions are half-integers, so every
// frequency of interest is (a p + b q) g/2 with integer a, b; tones built by
// canonical_nn_schedule carry that exact representation, which makes the
// resolution df = 0 meaningful.
struct Tone {
    double amplitude = 1.0;
    double detuning = 0.0;  // from the carrier
    ToneTarget target = ToneTarget::all;
    bool has_exact = false;
    long exact_a = 0;  // detuning = (exact_a p + exact_b q) g/2
    long exact_b = 0;

    static Tone exact(double amplitude, long a, long b, ToneTarget target,
                      const GradientSpec& grad) {
        Tone t;
        t.amplitude = amplitude;
        t.detuning = (a * grad.p + b * grad.q) * grad.scale_g * 0.5;
        t.target = target;
        t.has_exact = true;
        t.exact_a = a;
        t.exact_b = b;
        return t;
    }

    bool applies_to(bool is_control) const {
        return target == ToneTarget::all ||
               (is_control ? target == ToneTarget::controls : target == ToneTarget::links);
    }
};

// A schedule is a short sequence of pulse segments.  Every term the drive
// generates is an X-type pair rotation, so the segments commute exactly and
// the interaction layer is their product.
struct SidebandSchedule {
    struct Segment {
        std::vector<Tone> tones;
    };
    std::vector<Segment> segments;
    double resolution_df = 0.0;

    bool empty() const {
        for (const auto& s : segments)
            if (!s.tones.empty()) return false;
        return true;
    }

    void validate() const {
        for (const auto& seg : segments)
            for (std::size_t i = 0; i < seg.tones.size(); ++i)
                for (std::size_t j = i + 1; j < seg.tones.size(); ++j)
                    if (seg.tones[i].target == seg.tones[j].target &&
                        std::abs(seg.tones[i].detuning - seg.tones[j].detuning) <= resolution_df)
                        throw std::invalid_argument(
                            "sideband detunings collide within the resolution");
    }
};

// The drive that activates exactly the four control-link pairs of every
// plaquette.  The links see the carrier and the controls see two sidebands
// matching the horizontal (g p/2) and vertical (g q/2) nearest-neighbour
// Raman conditions.  One tone set can only satisfy one sign of each
// condition without also activating control-control neighbours, so the drive
// is split into two segments: (+g p/2, +g q/2) reaches each plaquette's
// bottom and left links, (-g p/2, -g q/2) the top and right ones.
inline SidebandSchedule canonical_nn_schedule(const GradientSpec& grad, double df = 0.0) {
    grad.validate();
    if (std::abs(grad.p - grad.q) * grad.scale_g * 0.5 <= df)
        throw std::invalid_argument(
            "degenerate gradient: horizontal and vertical conditions are indistinguishable "
            "(p = q within the resolution)");
    SidebandSchedule s;
    s.resolution_df = df;
    for (int sign : {+1, -1}) {
        SidebandSchedule::Segment seg;
        seg.tones.push_back(Tone::exact(1.0, 0, 0, ToneTarget::links, grad));
        seg.tones.push_back(Tone::exact(1.0, sign, 0, ToneTarget::controls, grad));
        seg.tones.push_back(Tone::exact(1.0, 0, sign, ToneTarget::controls, grad));
        s.segments.push_back(std::move(seg));
    }
    s.validate();
    return s;
}

// ---------------------------------------------------------------------------
// Atom table and coupling matrix

// Atom index = qubit index of the full layout: links first, then controls.
struct AtomTable {
    std::vector<Coord> positions;
    std::vector<bool> is_control;
    int n_links = 0;

    int size() const { return static_cast<int>(positions.size()); }
};

inline AtomTable atom_table(const LatticeGeometry& geom) {
    AtomTable t;
    t.n_links = geom.n_links();
    for (int l = 0; l < geom.n_links(); ++l) {
        t.positions.push_back(geom.link_position(l));
        t.is_control.push_back(false);
    }
    for (int p = 0; p < geom.n_plaquettes(); ++p) {
        t.positions.push_back(geom.control_position(p));
        t.is_control.push_back(true);
    }
    return t;
}

enum class PairClass { none, desired_nn, residual };

struct PairEntry {
    double strength = 0.0;      // energy units
    PairClass cls = PairClass::none;
    bool resonant = false;
    double detuning = 0.0;      // minimal |Raman mismatch| over tone pairs
    double distance = 0.0;
};

// Symmetric matrix over atoms; zero diagonal.
class CouplingMatrix {
  public:
    explicit CouplingMatrix(int n_atoms) : n_(n_atoms), entries_(static_cast<std::size_t>(n_atoms) * n_atoms) {}

    int n_atoms() const { return n_; }

    const PairEntry& at(int i, int j) const { return entries_[idx(i, j)]; }

    void set(int i, int j, const PairEntry& e) {
        if (i == j) throw std::invalid_argument("coupling matrix diagonal must stay zero");
        entries_[idx(i, j)] = e;
        entries_[idx(j, i)] = e;
    }

    std::vector<std::tuple<int, int, PairEntry>> nonzero_pairs() const {
        std::vector<std::tuple<int, int, PairEntry>> out;
        for (int i = 0; i < n_; ++i)
            for (int j = i + 1; j < n_; ++j)
                if (entries_[idx(i, j)].strength != 0.0 || entries_[idx(i, j)].resonant)
                    out.emplace_back(i, j, entries_[idx(i, j)]);
        return out;
    }

  private:
    std::size_t idx(int i, int j) const {
        return static_cast<std::size_t>(i) * n_ + j;
    }
    int n_;
    std::vector<PairEntry> entries_;
};

namespace detail {

// Zeeman shift of an atom in exact half-integer units: (a p + b q) g/2 with
// a = 2x, b = 2y.
inline std::pair<long, long> exact_shift(const Coord& pos) {
    return {std::lround(2.0 * pos.x), std::lround(2.0 * pos.y)};
}

// Minimal |(tone_alpha - tone_beta) - (omega_m - omega_n)| over admissible
// tone pairs within any one segment.  Exact-represented tones cancel the
// gradient algebraically, so a true resonance reports exactly zero.
inline double min_raman_mismatch(const SidebandSchedule& schedule, const GradientSpec& grad,
                                 const Coord& pos_m, bool control_m, const Coord& pos_n,
                                 bool control_n) {
    const auto [ma, mb] = exact_shift(pos_m);
    const auto [na, nb] = exact_shift(pos_n);
    const double shift_m = zeeman_shift(grad, pos_m);
    const double shift_n = zeeman_shift(grad, pos_n);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& seg : schedule.segments) {
        for (const Tone& ta : seg.tones) {
            if (!ta.applies_to(control_m)) continue;
            for (const Tone& tb : seg.tones) {
                if (!tb.applies_to(control_n)) continue;
                double delta;
                if (ta.has_exact && tb.has_exact) {
                    const long a = ta.exact_a - tb.exact_a - (ma - na);
                    const long b = ta.exact_b - tb.exact_b - (mb - nb);
                    delta = (a == 0 && b == 0)
                                ? 0.0
                                : std::abs((a * grad.p + b * grad.q) * grad.scale_g * 0.5);
                } else {
                    delta = std::abs((ta.detuning - tb.detuning) - (shift_m - shift_n));
                }
                best = std::min(best, delta);
            }
        }
    }
    return best;
}

inline bool is_desired_nn(const LatticeGeometry& geom, const AtomTable& atoms, int i, int j) {
    if (atoms.is_control[i] == atoms.is_control[j]) return false;
    const int control = atoms.is_control[i] ? i : j;
    const int link = atoms.is_control[i] ? j : i;
    const int p = control - atoms.n_links;
    auto pl = plaquette_links(geom, p);
    return std::find(pl.begin(), pl.end(), link) != pl.end();
}

}  // namespace detail

// Classifies every atom pair as resonant or off-resonant under the schedule;
// strengths are left for effective_interaction to fill in.
inline CouplingMatrix resonant_pairs(const LatticeGeometry& geom, const GradientSpec& grad,
                                     const SidebandSchedule& schedule, double df) {
    grad.validate();
    schedule.validate();
    const AtomTable atoms = atom_table(geom);
    CouplingMatrix m(atoms.size());
    for (int i = 0; i < atoms.size(); ++i)
        for (int j = i + 1; j < atoms.size(); ++j) {
            PairEntry e;
            e.distance = distance(atoms.positions[i], atoms.positions[j]);
            e.detuning = schedule.empty()
                             ? std::numeric_limits<double>::infinity()
                             : detail::min_raman_mismatch(schedule, grad, atoms.positions[i],
                                                          atoms.is_control[i], atoms.positions[j],
                                                          atoms.is_control[j]);
            e.resonant = e.detuning <= df;
            e.cls = detail::is_desired_nn(geom, atoms, i, j) ? PairClass::desired_nn
                                                             : PairClass::residual;
            m.set(i, j, e);
        }
    return m;
}

// The matrix the ideal protocol assumes: strength J on every nearest-
// neighbour control-link pair, nothing anywhere else.
inline CouplingMatrix ideal_nn_coupling(const LatticeGeometry& geom, double j) {
    const AtomTable atoms = atom_table(geom);
    CouplingMatrix m(atoms.size());
    for (int p = 0; p < geom.n_plaquettes(); ++p)
        for (int l : plaquette_links(geom, p)) {
            PairEntry e;
            e.strength = j;
            e.cls = PairClass::desired_nn;
            e.resonant = true;
            e.distance = distance(atoms.positions[atoms.n_links + p], atoms.positions[l]);
            m.set(atoms.n_links + p, l, e);
        }
    return m;
}

// ---------------------------------------------------------------------------
// Collision analysis

struct Collision {
    int atom_a = 0;
    int atom_b = 0;
    double distance = 0.0;
    double pair_frequency = 0.0;  // |omega_m - omega_n|
};

struct CollisionReport {
    double min_gap = std::numeric_limits<double>::infinity();  // off-target clearance
    std::vector<Collision> collisions;                         // within df, on this geometry
    int max_safe_size = 0;  // largest L with a collision-free L x L lattice
};

namespace detail {

inline std::vector<Collision> find_collisions(const LatticeGeometry& geom,
                                              const GradientSpec& grad, double df,
                                              double* min_gap_out) {
    const SidebandSchedule schedule = canonical_nn_schedule(grad, 0.0);
    const AtomTable atoms = atom_table(geom);
    std::vector<Collision> out;
    double min_gap = std::numeric_limits<double>::infinity();
    for (int i = 0; i < atoms.size(); ++i)
        for (int j = i + 1; j < atoms.size(); ++j) {
            const double delta = detail::min_raman_mismatch(
                schedule, grad, atoms.positions[i], atoms.is_control[i], atoms.positions[j],
                atoms.is_control[j]);
            if (detail::is_desired_nn(geom, atoms, i, j)) continue;
            if (delta <= df) {
                out.push_back({i, j, distance(atoms.positions[i], atoms.positions[j]),
                               std::abs(zeeman_shift(grad, atoms.positions[i]) -
                                        zeeman_shift(grad, atoms.positions[j]))});
            } else {
                min_gap = std::min(min_gap, delta);
            }
        }
    if (min_gap_out) *min_gap_out = min_gap;
    return out;
}

}  // namespace detail

// Enumerates all pair-difference frequencies, reports the clearance between
// the nearest-neighbour targets and everything else, the actual collisions
// within df, and the largest L for which an L x L lattice stays clean.
inline CollisionReport collision_report(const LatticeGeometry& geom, const GradientSpec& grad,
                                        double df, int size_cap = 16) {
    grad.validate();
    CollisionReport rep;
    rep.collisions = detail::find_collisions(geom, grad, df, &rep.min_gap);
    rep.max_safe_size = 0;
    for (int L = 1; L <= size_cap; ++L) {
        auto g = build_lattice(L, L);
        if (!detail::find_collisions(g, grad, df, nullptr).empty()) break;
        rep.max_safe_size = L;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Effective coupling matrix

enum class ResidualMode { bare, suppressed };

// Resonant pairs get J f(r).  Off-resonant pairs are dropped once the
// detuning exceeds cutoff * J f(r); below that, bare mode keeps the worst
// case J f(r) while suppressed mode keeps the second-order time-averaged
// estimate (J f)^2 / delta.
inline CouplingMatrix effective_interaction(const InteractionModel& model,
                                            const LatticeGeometry& geom,
                                            const GradientSpec& grad,
                                            const SidebandSchedule& schedule, double df,
                                            ResidualMode mode, double cutoff = 1e3) {
    model.validate();
    CouplingMatrix m = resonant_pairs(geom, grad, schedule, df);
    const int n = m.n_atoms();
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            PairEntry e = m.at(i, j);
            const double bare = model.strength_j * coupling_profile(model, e.distance);
            if (e.resonant) {
                e.strength = bare;
            } else if (!std::isfinite(e.detuning) || e.detuning / bare > cutoff) {
                e.strength = 0.0;
            } else {
                e.strength = mode == ResidualMode::bare ? bare : bare * (bare / e.detuning);
            }
            m.set(i, j, e);
        }
    return m;
}

// ---------------------------------------------------------------------------
// Gauge-violation trajectories (full engine, entangler built from couplings)

struct GaugeViolationRun {
    std::vector<std::vector<double>> site_errors;  // per step, per site: 1 - <A(x)>
    std::vector<double> max_errors;                // per step
    QubitRegister final_state;
};

// Runs the ramp with the entangler's interaction layer rotated through
// (pi/4) * strength / J per coupled pair, resonant pairs landing exactly on
// pi/4.  Off-plan couplings are what break the Gauss law.
inline GaugeViolationRun gauge_violation_run(const LatticeGeometry& geom,
                                             const CouplingMatrix& coupling, double j_reference,
                                             const Schedule& schedule) {
    schedule.validate();
    const FullLayout lay = full_layout(geom);
    if (lay.total_qubits() > QubitRegister::kMaxQubits)
        throw CapacityError("gauge-violation runs need the full register; lattice too large");
    if (coupling.n_atoms() != lay.total_qubits())
        throw std::invalid_argument("coupling matrix size does not match the atom table");

    std::vector<std::tuple<int, int, double>> pair_angles;
    for (const auto& [a, b, e] : coupling.nonzero_pairs())
        if (e.strength != 0.0)
            pair_angles.emplace_back(a, b, (M_PI / 4) * e.strength / j_reference);
    const GateSeq u = build_u_with_pairs(geom, pair_angles);
    const GateSeq u_dag = seq_dagger(u);

    std::vector<std::uint64_t> star_masks;
    for (int s = 0; s < geom.n_sites(); ++s) {
        std::uint64_t msk = 0;
        for (int l : star_links(geom, s)) msk |= std::uint64_t{1} << l;
        star_masks.push_back(msk);
    }

    QubitRegister reg = embed_links(geom, schedule.direction == Direction::electric_start
                                              ? links_zero_e(geom)
                                              : links_zero_b(geom));
    GaugeViolationRun out{{}, {}, QubitRegister(1)};
    const double tau = schedule.total_time / schedule.steps;
    for (int m = 0; m < schedule.steps; ++m) {
        const double t_sample = schedule.sampling == TimeSampling::midpoint ? (m + 0.5) * tau
                                                                            : m * tau;
        auto [le, lb] = schedule.couplings(t_sample);
        step_wb_stator(reg, geom, lb, tau, u, u_dag);
        step_we(reg, geom, le, tau);
        auto gauge = expectation_zmask_batch(reg, star_masks);
        std::vector<double> errs(gauge.size());
        double worst = 0.0;
        for (std::size_t s = 0; s < gauge.size(); ++s) {
            errs[s] = 1.0 - gauge[s];
            worst = std::max(worst, errs[s]);
        }
        out.site_errors.push_back(std::move(errs));
        out.max_errors.push_back(worst);
    }
    out.final_state = std::move(reg);
    return out;
}

// ---------------------------------------------------------------------------
// Cooperativity / Trotter error budget

// The paper-level trade-off: per-step gate error falls with cooperativity,
// Trotter error falls with step count.  The per-step error law is a model
// knob; the default exponent 1 makes the fitted maximum time scale as
// C^{2/3} with second-order splitting.  (The bare 1 - F ~ 1/sqrt(C) gate
// amplitude law corresponds to exponent 1/2 and a C^{1/3} horizon.)
struct BudgetModel {
    double trotter_prefactor = 1.0;   // a: eps_trot = a T^2/M (order 1), a T^3/M^2 (order 2)
    double gate_prefactor = 0.01;     // b: eps_gate = b C^-gamma per step
    double gate_error_exponent = 1.0; // gamma
    double error_cap = 0.1;           // budget for T_max
    long m_cap = 100000000;           // step count cap for the C -> inf limit
};

struct BudgetPoint {
    long optimal_m = 1;
    double eps_min = 0.0;
    double t_max = 0.0;
};

namespace detail {

inline double budget_eps(double t, double c, int order, const BudgetModel& k, long m) {
    const double gate = k.gate_prefactor * std::pow(c, -k.gate_error_exponent);
    const double trot = order == 1 ? k.trotter_prefactor * t * t / m
                                   : k.trotter_prefactor * t * t * t / (static_cast<double>(m) * m);
    return trot + m * gate;
}

inline std::pair<long, double> budget_minimize(double t, double c, int order,
                                               const BudgetModel& k) {
    const double gate = k.gate_prefactor * std::pow(c, -k.gate_error_exponent);
    double m_star;
    if (order == 1)
        m_star = std::sqrt(k.trotter_prefactor * t * t / gate);
    else
        m_star = std::cbrt(2.0 * k.trotter_prefactor * t * t * t / gate);
    long best_m = 1;
    double best = std::numeric_limits<double>::infinity();
    for (double cand : {std::floor(m_star), std::ceil(m_star), 1.0, static_cast<double>(k.m_cap)}) {
        const long m = std::clamp(static_cast<long>(cand), 1L, k.m_cap);
        const double e = budget_eps(t, c, order, k, m);
        if (e < best) {
            best = e;
            best_m = m;
        }
    }
    return {best_m, best};
}

}  // namespace detail

inline BudgetPoint error_budget(double cooperativity, double t_target, int order,
                                const BudgetModel& knobs = {}) {
    if (cooperativity <= 0) throw std::invalid_argument("cooperativity must be > 0");
    if (t_target <= 0) throw std::invalid_argument("target time must be > 0");
    if (order != 1 && order != 2) throw std::invalid_argument("Trotter order must be 1 or 2");
    BudgetPoint out;
    auto [m, eps] = detail::budget_minimize(t_target, cooperativity, order, knobs);
    out.optimal_m = m;
    out.eps_min = eps;

    // T_max: invert eps_min(T) = error_cap; eps_min is increasing in T
    double lo = 0.0, hi = 1.0;
    auto eps_of = [&](double t) { return detail::budget_minimize(t, cooperativity, order, knobs).second; };
    while (eps_of(hi) < knobs.error_cap && hi < 1e18) hi *= 2;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (eps_of(mid) < knobs.error_cap)
            lo = mid;
        else
            hi = mid;
    }
    out.t_max = 0.5 * (lo + hi);
    return out;
}

}  // namespace z2sim

#endif
