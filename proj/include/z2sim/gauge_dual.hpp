#ifndef Z2SIM_GAUGE_DUAL_HPP
#define Z2SIM_GAUGE_DUAL_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "z2sim/common.hpp"
#include "z2sim/dense.hpp"
#include "z2sim/lattice.hpp"
#include "z2sim/pauli.hpp"
#include "z2sim/statevec.hpp"

namespace z2sim {

// Plaquettes bordering a link (1 on the boundary, 2 inside).
inline std::vector<int> link_plaquettes(const LatticeGeometry& geom, int l) {
    auto [sx, sy] = geom.site_xy(geom.link_start_site(l));
    std::vector<int> touching;
    if (geom.link_direction(l) == 1) {
        if (sy < geom.ly()) touching.push_back(geom.plaquette_index(sx, sy));
        if (sy > 0) touching.push_back(geom.plaquette_index(sx, sy - 1));
    } else {
        if (sx < geom.lx()) touching.push_back(geom.plaquette_index(sx, sy));
        if (sx > 0) touching.push_back(geom.plaquette_index(sx - 1, sy));
    }
    return touching;
}

// Plaquette-spin representation of the gauge-invariant sector A(x) = +1.
// One dual spin tau per plaquette:
//   sigma_z(interior link between p, p') <-> tau_z(p) tau_z(p')
//   sigma_z(boundary link of p)          <-> tau_z(p)
//   B(p)                                 <-> tau_x(p)
//   |0_E> (all links up)                 <-> all dual spins up
// yielding  H = -lambda_E [sum tau_z tau_z + sum tau_z] - lambda_B sum tau_x.
class DualHamiltonian {
  public:
    DualHamiltonian(const LatticeGeometry& geom, double lambda_e, double lambda_b)
        : lambda_e_(lambda_e), lambda_b_(lambda_b), n_spins_(geom.n_plaquettes()) {
        if (n_spins_ > 25)
            throw CapacityError("dual engine capped at 25 plaquette spins, got " +
                                std::to_string(n_spins_));
        for (int l = 0; l < geom.n_links(); ++l) {
            const std::vector<int> touching = link_plaquettes(geom, l);
            if (touching.size() == 2)
                interior_pairs_.emplace_back(touching[0], touching[1]);
            else
                boundary_singles_.push_back(touching[0]);
        }
        build_z_diagonal();
    }

    int n_spins() const { return n_spins_; }
    std::size_t dim() const { return std::size_t{1} << n_spins_; }
    double lambda_e() const { return lambda_e_; }
    double lambda_b() const { return lambda_b_; }
    void set_couplings(double le, double lb) {
        lambda_e_ = le;
        lambda_b_ = lb;
    }
    const std::vector<std::pair<int, int>>& interior_pairs() const { return interior_pairs_; }
    const std::vector<int>& boundary_singles() const { return boundary_singles_; }
    const std::vector<double>& z_diagonal() const { return z_diag_; }

    // out = H v, matrix-free
    void apply(const std::vector<double>& v, std::vector<double>& out) const {
        apply_impl(v, out);
    }
    void apply(const std::vector<cplx>& v, std::vector<cplx>& out) const {
        apply_impl(v, out);
    }

    // dense (real symmetric) form, for small dimensions
    std::vector<double> dense() const {
        const std::size_t d = dim();
        std::vector<double> h(d * d, 0.0);
        for (std::size_t b = 0; b < d; ++b) {
            h[b * d + b] = -lambda_e_ * z_diag_[b];
            for (int p = 0; p < n_spins_; ++p)
                h[(b ^ (std::size_t{1} << p)) * d + b] += -lambda_b_;
        }
        return h;
    }

  private:
    template <typename T>
    void apply_impl(const std::vector<T>& v, std::vector<T>& out) const {
        const std::size_t d = dim();
        out.assign(d, T{});
        const double le = lambda_e_, lb = lambda_b_;
        parallel_for(d, [&](std::size_t lo, std::size_t hi, std::size_t) {
            for (std::size_t b = lo; b < hi; ++b) {
                T acc = -le * z_diag_[b] * v[b];
                for (int p = 0; p < n_spins_; ++p) acc += -lb * v[b ^ (std::size_t{1} << p)];
                out[b] = acc;
            }
        });
    }

    void build_z_diagonal() {
        z_diag_.assign(dim(), 0.0);
        parallel_for(dim(), [&](std::size_t lo, std::size_t hi, std::size_t) {
            for (std::size_t b = lo; b < hi; ++b) {
                double z = 0.0;
                for (const auto& [p, q] : interior_pairs_) {
                    const int sp = (b >> p) & 1, sq = (b >> q) & 1;
                    z += (sp == sq) ? 1.0 : -1.0;
                }
                for (int p : boundary_singles_) z += ((b >> p) & 1) ? -1.0 : 1.0;
                z_diag_[b] = z;
            }
        });
    }

    double lambda_e_, lambda_b_;
    int n_spins_;
    std::vector<std::pair<int, int>> interior_pairs_;
    std::vector<int> boundary_singles_;
    std::vector<double> z_diag_;
};

inline DualHamiltonian dual_map(const LatticeGeometry& geom, double lambda_e, double lambda_b) {
    return DualHamiltonian(geom, lambda_e, lambda_b);
}

// ---------------------------------------------------------------------------
// Lanczos with full reorthogonalization; dense fallback for small dimensions.

struct EigenOptions {
    double tolerance = 1e-10;
    int max_iterations = 10000;
    int max_basis = 300;
    std::size_t dense_threshold = 1024;
    std::uint64_t seed = 12345;
};

struct GroundState {
    double energy = 0.0;
    std::vector<double> vector;
    double residual = 0.0;
    int iterations = 0;
};

struct LowestPair {
    double e0 = 0.0;
    double e1 = 0.0;
    std::vector<double> v0;
    double residual = 0.0;
    int iterations = 0;
};

namespace detail {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    return parallel_sum(a.size(), [&](std::size_t i) { return a[i] * b[i]; });
}

inline void axpy(double alpha, const std::vector<double>& x, std::vector<double>& y) {
    parallel_for(y.size(), [&](std::size_t lo, std::size_t hi, std::size_t) {
        for (std::size_t i = lo; i < hi; ++i) y[i] += alpha * x[i];
    });
}

// Lowest n_want Ritz pairs; restarts from the best Ritz vector when the
// basis hits its cap.
inline LowestPair lanczos_lowest(const DualHamiltonian& h, int n_want, const EigenOptions& opt) {
    const std::size_t d = h.dim();
    double zmax = 0.0;
    for (double v : h.z_diagonal()) zmax = std::max(zmax, std::abs(v));
    double hscale = std::abs(h.lambda_e()) * zmax + std::abs(h.lambda_b()) * h.n_spins();
    if (hscale == 0.0) hscale = 1.0;
    const double breakdown = 1e-14 * hscale;

    Rng rng(opt.seed);
    std::vector<double> start(d);
    double nrm = 0.0;
    for (auto& v : start) {
        v = rng.next_gaussian();
        nrm += v * v;
    }
    for (auto& v : start) v /= std::sqrt(nrm);

    int total_iter = 0;
    std::vector<std::vector<double>> basis;
    std::vector<double> alpha, beta;
    std::vector<double> w(d);
    constexpr int kMaxRestarts = 20;

    for (int restart = 0; restart < kMaxRestarts; ++restart) {
        basis.assign(1, start);
        alpha.clear();
        beta.clear();
        bool restarting = false;
        while (!restarting) {
            if (total_iter++ >= opt.max_iterations)
                throw ConvergenceError("Lanczos did not reach residual " +
                                       std::to_string(opt.tolerance) + " within " +
                                       std::to_string(opt.max_iterations) + " iterations");
            const auto& q = basis.back();
            h.apply(q, w);
            if (basis.size() > 1) axpy(-beta.back(), basis[basis.size() - 2], w);
            const double a = dot(q, w);
            alpha.push_back(a);
            axpy(-a, q, w);
            // two rounds of classical Gram-Schmidt against the whole basis
            for (int round = 0; round < 2; ++round)
                for (const auto& b : basis) axpy(-dot(b, w), b, w);
            double b = std::sqrt(dot(w, w));

            const int k = static_cast<int>(alpha.size());
            const bool exhausted = b < breakdown;
            if (k >= n_want && (exhausted || k >= opt.max_basis || k % 5 == 0)) {
                std::vector<double> sub(beta.begin(), beta.end());
                auto t = tridiagonal_eigensolve(alpha, sub);
                double worst = 0.0;  // residual of Ritz pair j = |b * last component|
                for (int j = 0; j < std::min(n_want, k); ++j)
                    worst = std::max(worst, std::abs(b * t.vec(k - 1, j)));
                if (worst <= opt.tolerance * hscale || exhausted) {
                    LowestPair result;
                    result.e0 = t.values[0];
                    result.e1 = (k > 1) ? t.values[1] : t.values[0];
                    result.v0.assign(d, 0.0);
                    for (int i = 0; i < k; ++i) axpy(t.vec(i, 0), basis[i], result.v0);
                    result.residual = worst / hscale;
                    result.iterations = total_iter;
                    return result;
                }
                if (k >= opt.max_basis) {
                    start.assign(d, 0.0);
                    for (int i = 0; i < k; ++i) axpy(t.vec(i, 0), basis[i], start);
                    const double snrm = std::sqrt(dot(start, start));
                    for (auto& v : start) v /= snrm;
                    restarting = true;
                    continue;
                }
            }
            if (exhausted) {
                // invariant subspace before n_want pairs settled: extend with
                // a random orthogonal direction
                for (auto& v : w) v = rng.next_gaussian();
                for (int round = 0; round < 2; ++round)
                    for (const auto& bb : basis) axpy(-dot(bb, w), bb, w);
                b = std::sqrt(dot(w, w));
            }
            beta.push_back(b);
            std::vector<double> next(d);
            parallel_for(d, [&](std::size_t lo, std::size_t hi, std::size_t) {
                for (std::size_t i = lo; i < hi; ++i) next[i] = w[i] / b;
            });
            basis.push_back(std::move(next));
        }
    }
    throw ConvergenceError("Lanczos restart budget exhausted before convergence");
}

}  // namespace detail

inline LowestPair lowest_pair(const DualHamiltonian& h, const EigenOptions& opt = {}) {
    if (h.dim() <= opt.dense_threshold) {
        auto eig = symmetric_eigensolve(h.dense(), static_cast<int>(h.dim()));
        LowestPair out;
        out.e0 = eig.values[0];
        out.e1 = eig.n > 1 ? eig.values[1] : eig.values[0];
        out.v0.resize(h.dim());
        for (std::size_t i = 0; i < h.dim(); ++i) out.v0[i] = eig.vec(static_cast<int>(i), 0);
        out.residual = 0.0;
        return out;
    }
    return detail::lanczos_lowest(h, 2, opt);
}

inline GroundState exact_ground_state(const DualHamiltonian& h, const EigenOptions& opt = {}) {
    auto pair = lowest_pair(h, opt);
    GroundState gs;
    gs.energy = pair.e0;
    gs.vector = std::move(pair.v0);
    gs.residual = pair.residual;
    gs.iterations = pair.iterations;
    // normalize and verify the residual independently
    double nrm = std::sqrt(detail::dot(gs.vector, gs.vector));
    for (auto& v : gs.vector) v /= nrm;
    std::vector<double> hv;
    h.apply(gs.vector, hv);
    double r2 = 0.0;
    for (std::size_t i = 0; i < hv.size(); ++i) {
        const double r = hv[i] - gs.energy * gs.vector[i];
        r2 += r * r;
    }
    gs.residual = std::sqrt(r2);
    return gs;
}

// E1 - E0; values below 1e-10 indicate a (numerically) degenerate ground state.
struct SpectralGap {
    double gap = 0.0;
    bool degenerate = false;
};

inline SpectralGap spectral_gap(const DualHamiltonian& h, const EigenOptions& opt = {}) {
    auto pair = lowest_pair(h, opt);
    SpectralGap out;
    out.gap = pair.e1 - pair.e0;
    out.degenerate = out.gap < 1e-10;
    return out;
}

// ---------------------------------------------------------------------------
// Observables and Trotter steps in the dual representation.

inline std::uint64_t enclosed_mask(const LatticeGeometry& geom, const LoopSpec& loop) {
    std::uint64_t m = 0;
    for (int p : loop_enclosed_plaquettes(geom, loop)) m |= std::uint64_t{1} << p;
    return m;
}

// <prod_{p enclosed} tau_x(p)> on a real dual state
inline double wilson_expectation_dual(const std::vector<double>& state,
                                      const LatticeGeometry& geom, const LoopSpec& loop) {
    const std::uint64_t mask = enclosed_mask(geom, loop);
    return parallel_sum(state.size(), [&](std::size_t b) { return state[b] * state[b ^ mask]; });
}

inline double wilson_expectation_dual(const QubitRegister& state, const LatticeGeometry& geom,
                                      const LoopSpec& loop) {
    std::vector<int> qs;
    for (int p : loop_enclosed_plaquettes(geom, loop)) qs.push_back(p);
    return expectation_pauli(state, x_string(qs));
}

// W_E in dual variables: exp(+i tau lambda_E [sum tau_z tau_z + sum tau_z]),
// a single diagonal pass using the precomputed z structure.
inline void dual_step_we(QubitRegister& reg, const DualHamiltonian& h, double lambda_e_mid,
                         double tau) {
    const auto& zd = h.z_diagonal();
    auto& amp = reg.amplitudes();
    const double theta = tau * lambda_e_mid;
    parallel_for(reg.dim(), [&](std::size_t lo, std::size_t hi, std::size_t) {
        for (std::size_t b = lo; b < hi; ++b) amp[b] *= std::polar(1.0, theta * zd[b]);
    });
}

// W_B in dual variables: exp(+i tau lambda_B sum_p tau_x(p)).
inline void dual_step_wb(QubitRegister& reg, const DualHamiltonian& h, double lambda_b_mid,
                         double tau) {
    for (int p = 0; p < h.n_spins(); ++p)
        apply_pauli_rotation(reg, PauliString::single(p, Axis::X), -tau * lambda_b_mid);
}

// One Trotter step; order 1 is W_E W_B (W_B acts first), order 2 is the
// symmetric splitting W_E(tau/2) W_B(tau) W_E(tau/2).
inline void trotter_step_dual(QubitRegister& reg, const DualHamiltonian& h, double lambda_e,
                              double lambda_b, double tau, int order) {
    if (order == 1) {
        dual_step_wb(reg, h, lambda_b, tau);
        dual_step_we(reg, h, lambda_e, tau);
    } else if (order == 2) {
        dual_step_we(reg, h, lambda_e, tau / 2);
        dual_step_wb(reg, h, lambda_b, tau);
        dual_step_we(reg, h, lambda_e, tau / 2);
    } else {
        throw std::invalid_argument("Trotter order must be 1 or 2");
    }
}

// ---------------------------------------------------------------------------
// Sector isomorphism (used to cross-validate engines).

// Basis index of the link configuration represented by a dual configuration.
inline std::uint64_t dual_to_link_index(const LatticeGeometry& geom, std::uint64_t dual_bits) {
    std::uint64_t link_bits = 0;
    for (int l = 0; l < geom.n_links(); ++l) {
        int bit = 0;
        for (int p : link_plaquettes(geom, l)) bit ^= static_cast<int>((dual_bits >> p) & 1);
        if (bit) link_bits |= std::uint64_t{1} << l;
    }
    return link_bits;
}

// Lifts a dual state to the corresponding link-basis state (A(x) = +1 sector).
inline QubitRegister dual_to_link_state(const LatticeGeometry& geom,
                                        const std::vector<cplx>& dual_amp) {
    QubitRegister out(geom.n_links());
    auto& amp = out.amplitudes();
    std::fill(amp.begin(), amp.end(), cplx{0, 0});
    for (std::size_t b = 0; b < dual_amp.size(); ++b)
        amp[dual_to_link_index(geom, b)] = dual_amp[b];
    return out;
}

// All link-basis states with A(x) = +1 at every site, ascending.
inline std::vector<std::uint64_t> gauge_sector_basis(const LatticeGeometry& geom) {
    std::vector<std::uint64_t> star_masks;
    for (int s = 0; s < geom.n_sites(); ++s) {
        std::uint64_t m = 0;
        for (int l : star_links(geom, s)) m |= std::uint64_t{1} << l;
        star_masks.push_back(m);
    }
    std::vector<std::uint64_t> basis;
    const std::size_t d = std::size_t{1} << geom.n_links();
    for (std::uint64_t b = 0; b < d; ++b) {
        bool ok = true;
        for (std::uint64_t m : star_masks)
            if (parity64(b & m)) {
                ok = false;
                break;
            }
        if (ok) basis.push_back(b);
    }
    return basis;
}

// Dense link-basis Hamiltonian restricted to the A(x) = +1 sector.
inline std::vector<double> sector_hamiltonian_dense(const LatticeGeometry& geom, double lambda_e,
                                                    double lambda_b,
                                                    const std::vector<std::uint64_t>& basis) {
    const int n = static_cast<int>(basis.size());
    std::vector<double> h(static_cast<std::size_t>(n) * n, 0.0);
    std::vector<std::uint64_t> plaq_masks;
    for (int p = 0; p < geom.n_plaquettes(); ++p) {
        std::uint64_t m = 0;
        for (int l : plaquette_links(geom, p)) m |= std::uint64_t{1} << l;
        plaq_masks.push_back(m);
    }
    for (int i = 0; i < n; ++i) {
        const std::uint64_t b = basis[i];
        h[static_cast<std::size_t>(i) * n + i] =
            -lambda_e * (geom.n_links() - 2 * popcount64(b));
        for (std::uint64_t m : plaq_masks) {
            const std::uint64_t flipped = b ^ m;
            const auto it = std::lower_bound(basis.begin(), basis.end(), flipped);
            const int j = static_cast<int>(it - basis.begin());
            h[static_cast<std::size_t>(i) * n + j] += -lambda_b;
        }
    }
    return h;
}

}  // namespace z2sim

#endif
