#ifndef Z2SIM_STATEVEC_HPP
#define Z2SIM_STATEVEC_HPP

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "z2sim/common.hpp"
#include "z2sim/pauli.hpp"

namespace z2sim {

// Dense state vector over 2^n basis states, double precision.
//
// Bit convention (fixed): qubit q occupies bit q of the basis index
// (little-endian).  Bit value 0 is |up> (sigma_z = +1), bit value 1 is
// |down>.  |in> on a control is (|up> + |down>)/sqrt(2).
class QubitRegister {
  public:
    static constexpr int kMaxQubits = 26;

    explicit QubitRegister(int n) : n_(n) {
        if (n < 1) throw std::invalid_argument("register needs at least one qubit");
        if (n > kMaxQubits)
            throw CapacityError("register of " + std::to_string(n) +
                                " qubits exceeds the " + std::to_string(kMaxQubits) +
                                "-qubit state-vector cap; use the dual (plaquette-spin) engine "
                                "for larger lattices");
        amp_.assign(std::size_t{1} << n, cplx{0.0, 0.0});
        amp_[0] = 1.0;
    }

    int n_qubits() const { return n_; }
    std::size_t dim() const { return amp_.size(); }

    cplx& operator[](std::size_t i) { return amp_[i]; }
    const cplx& operator[](std::size_t i) const { return amp_[i]; }
    std::vector<cplx>& amplitudes() { return amp_; }
    const std::vector<cplx>& amplitudes() const { return amp_; }

    double norm_sq() const {
        return parallel_sum(dim(), [this](std::size_t i) { return std::norm(amp_[i]); });
    }

    void scale(double f) {
        parallel_for(dim(), [&](std::size_t lo, std::size_t hi, std::size_t) {
            for (std::size_t i = lo; i < hi; ++i) amp_[i] *= f;
        });
    }

    void check_qubits(const PauliString& p) const {
        if (p.max_qubit() >= n_)
            throw std::out_of_range("Pauli string touches qubit " +
                                    std::to_string(p.max_qubit()) + " of a " +
                                    std::to_string(n_) + "-qubit register");
    }

  private:
    int n_;
    std::vector<cplx> amp_;
};

// Product state from per-qubit amplitude pairs (a|up> + b|down>).
inline QubitRegister init_product_state(const std::vector<std::array<cplx, 2>>& assignments) {
    const int n = static_cast<int>(assignments.size());
    QubitRegister reg(n);
    for (const auto& a : assignments) {
        const double nrm = std::norm(a[0]) + std::norm(a[1]);
        if (std::abs(nrm - 1.0) > 1e-10)
            throw std::invalid_argument("single-qubit state is not normalized");
    }
    auto& amp = reg.amplitudes();
    parallel_for(reg.dim(), [&](std::size_t lo, std::size_t hi, std::size_t) {
        for (std::size_t b = lo; b < hi; ++b) {
            cplx v = 1.0;
            for (int q = 0; q < n; ++q) v *= assignments[q][(b >> q) & 1];
            amp[b] = v;
        }
    });
    return reg;
}

namespace detail {
// Enumerates one representative per pair {b, b ^ x_mask}: the one whose
// lowest set bit of x_mask is 0.
inline std::uint64_t pair_representative(std::uint64_t i, int pivot) {
    const std::uint64_t low = (std::uint64_t{1} << pivot) - 1;
    return ((i & ~low) << 1) | (i & low);
}

// Per-pair coefficient structure of a Pauli string:
//   c(b) = base * (-1)^{parity(b & z_mask)},  c(b ^ xm) = c(b) * flip.
struct PauliCoeff {
    cplx base;
    double flip;  // (-1)^{parity(x_mask & z_mask)}
    explicit PauliCoeff(const PauliString& p) {
        static const cplx table[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
        base = table[(p.phase_quarter() + popcount64(p.y_mask())) & 3];
        flip = parity64(p.x_mask() & p.z_mask()) ? -1.0 : 1.0;
    }
};
}  // namespace detail

// state <- P * state
inline void apply_pauli_string(QubitRegister& reg, const PauliString& p) {
    reg.check_qubits(p);
    auto& amp = reg.amplitudes();
    const std::uint64_t xm = p.x_mask(), zm = p.z_mask();
    const detail::PauliCoeff pc(p);
    if (xm == 0) {
        const cplx plus = pc.base, minus = -pc.base;
        parallel_for(reg.dim(), [&](std::size_t lo, std::size_t hi, std::size_t) {
            for (std::size_t b = lo; b < hi; ++b) amp[b] *= parity64(b & zm) ? minus : plus;
        });
        return;
    }
    const int pivot = __builtin_ctzll(xm);
    parallel_for(reg.dim() / 2, [&](std::size_t lo, std::size_t hi, std::size_t) {
        for (std::size_t i = lo; i < hi; ++i) {
            const std::uint64_t b0 = detail::pair_representative(i, pivot);
            const std::uint64_t b1 = b0 ^ xm;
            const double s0 = parity64(b0 & zm) ? -1.0 : 1.0;
            const cplx c0 = pc.base * s0;         // coefficient at b0
            const cplx c1 = c0 * pc.flip;         // coefficient at b1
            const cplx v0 = amp[b0], v1 = amp[b1];
            amp[b0] = c1 * v1;
            amp[b1] = c0 * v0;
        }
    });
}

// state <- exp(-i phi P) * state, for Hermitian P with P^2 = 1.
inline void apply_pauli_rotation(QubitRegister& reg, const PauliString& p, double phi) {
    reg.check_qubits(p);
    if (!p.is_hermitian())
        throw NumericalError("rotation generator must be Hermitian (phase +-1)");
    auto& amp = reg.amplitudes();
    const double c = std::cos(phi), s = std::sin(phi);
    const std::uint64_t xm = p.x_mask(), zm = p.z_mask();
    const detail::PauliCoeff pc(p);
    if (xm == 0) {
        const double ps = pc.base.real();   // +-1 for Hermitian z-type strings
        const cplx diag_plus{c, -s * ps};   // eigenvalue +ps branch
        const cplx diag_minus{c, s * ps};
        parallel_for(reg.dim(), [&](std::size_t lo, std::size_t hi, std::size_t) {
            for (std::size_t b = lo; b < hi; ++b)
                amp[b] *= parity64(b & zm) ? diag_minus : diag_plus;
        });
        return;
    }
    const int pivot = __builtin_ctzll(xm);
    const cplx mis{0.0, -s};
    if (zm == 0) {
        // pure X-type string: constant coefficient on both pair members
        const cplx f = mis * pc.base;
        parallel_for(reg.dim() / 2, [&](std::size_t lo, std::size_t hi, std::size_t) {
            for (std::size_t i = lo; i < hi; ++i) {
                const std::uint64_t b0 = detail::pair_representative(i, pivot);
                const std::uint64_t b1 = b0 ^ xm;
                const cplx v0 = amp[b0], v1 = amp[b1];
                amp[b0] = c * v0 + f * v1;
                amp[b1] = c * v1 + f * v0;
            }
        });
        return;
    }
    parallel_for(reg.dim() / 2, [&](std::size_t lo, std::size_t hi, std::size_t) {
        for (std::size_t i = lo; i < hi; ++i) {
            const std::uint64_t b0 = detail::pair_representative(i, pivot);
            const std::uint64_t b1 = b0 ^ xm;
            const double s0 = parity64(b0 & zm) ? -1.0 : 1.0;
            const cplx c0 = pc.base * s0;
            const cplx c1 = c0 * pc.flip;
            const cplx v0 = amp[b0], v1 = amp[b1];
            amp[b0] = c * v0 + mis * (c1 * v1);
            amp[b1] = c * v1 + mis * (c0 * v0);
        }
    });
}

// <state| P |state> for Hermitian P.  The imaginary part must vanish; a
// residue above 1e-8 signals a non-Hermitian operator or corrupted state.
inline double expectation_pauli(const QubitRegister& reg, const PauliString& p) {
    reg.check_qubits(p);
    if (!p.is_hermitian()) throw NumericalError("expectation of a non-Hermitian Pauli string");
    const auto& amp = reg.amplitudes();
    const std::uint64_t xm = p.x_mask(), zm = p.z_mask();
    const detail::PauliCoeff pc(p);
    double re = 0.0, im = 0.0;
    if (xm == 0) {
        const double base = pc.base.real();
        re = parallel_sum(reg.dim(), [&](std::size_t b) {
            return std::norm(amp[b]) * (parity64(b & zm) ? -base : base);
        });
    } else {
        const int pivot = __builtin_ctzll(xm);
        double partial_re[kParallelBlocks] = {0.0};
        double partial_im[kParallelBlocks] = {0.0};
        detail::run_blocks(reg.dim() / 2, [&](std::size_t lo, std::size_t hi, std::size_t blk) {
            cplx acc{0, 0};
            for (std::size_t i = lo; i < hi; ++i) {
                const std::uint64_t b0 = detail::pair_representative(i, pivot);
                const std::uint64_t b1 = b0 ^ xm;
                const double s0 = parity64(b0 & zm) ? -1.0 : 1.0;
                const cplx c0 = pc.base * s0;
                acc += std::conj(amp[b0]) * (c0 * pc.flip) * amp[b1] +
                       std::conj(amp[b1]) * c0 * amp[b0];
            }
            partial_re[blk] = acc.real();
            partial_im[blk] = acc.imag();
        });
        for (std::size_t blk = 0; blk < kParallelBlocks; ++blk) {
            re += partial_re[blk];
            im += partial_im[blk];
        }
    }
    if (std::abs(im) > 1e-8)
        throw NumericalError("expectation value has imaginary part " + std::to_string(im));
    return re;
}

// state <- (1 + sign P)/2 |state>, renormalized; returns the squared norm
// before renormalization (the outcome probability).
inline double apply_projector(QubitRegister& reg, const PauliString& p, int sign) {
    reg.check_qubits(p);
    if (sign != 1 && sign != -1) throw std::invalid_argument("projector sign must be +-1");
    if (!p.is_hermitian()) throw NumericalError("projector generator must be Hermitian");
    auto& amp = reg.amplitudes();
    const double sg = static_cast<double>(sign);
    const std::uint64_t xm = p.x_mask(), zm = p.z_mask();
    const detail::PauliCoeff pc(p);
    if (xm == 0) {
        const double base = pc.base.real();
        parallel_for(reg.dim(), [&](std::size_t lo, std::size_t hi, std::size_t) {
            for (std::size_t b = lo; b < hi; ++b)
                amp[b] *= 0.5 * (1.0 + sg * (parity64(b & zm) ? -base : base));
        });
    } else {
        const int pivot = __builtin_ctzll(xm);
        parallel_for(reg.dim() / 2, [&](std::size_t lo, std::size_t hi, std::size_t) {
            for (std::size_t i = lo; i < hi; ++i) {
                const std::uint64_t b0 = detail::pair_representative(i, pivot);
                const std::uint64_t b1 = b0 ^ xm;
                const double s0 = parity64(b0 & zm) ? -1.0 : 1.0;
                const cplx c0 = pc.base * s0;
                const cplx v0 = amp[b0], v1 = amp[b1];
                amp[b0] = 0.5 * (v0 + sg * ((c0 * pc.flip) * v1));
                amp[b1] = 0.5 * (v1 + sg * (c0 * v0));
            }
        });
    }
    const double prob = reg.norm_sq();
    if (prob < 1e-14)
        throw NumericalError("projection onto (1 " + std::string(sign > 0 ? "+" : "-") +
                             " P)/2 annihilates the state");
    reg.scale(1.0 / std::sqrt(prob));
    return prob;
}

// |<s1|s2>|^2, insensitive to global phase.
inline double fidelity(const QubitRegister& a, const QubitRegister& b) {
    if (a.n_qubits() != b.n_qubits())
        throw std::invalid_argument("fidelity of registers with different qubit counts");
    const auto& va = a.amplitudes();
    const auto& vb = b.amplitudes();
    const double re = parallel_sum(a.dim(), [&](std::size_t i) {
        return (std::conj(va[i]) * vb[i]).real();
    });
    const double im = parallel_sum(a.dim(), [&](std::size_t i) {
        return (std::conj(va[i]) * vb[i]).imag();
    });
    return re * re + im * im;
}

// state <- exp(i theta sum_{q in mask} sigma_z^q) * state, one fused pass.
// This is W_E with theta = tau * lambda_E over the link qubits.
inline void apply_global_z_phase(QubitRegister& reg, std::uint64_t mask, double theta) {
    const int m = popcount64(mask);
    if (m == 0) return;
    std::vector<cplx> table(m + 1);
    for (int k = 0; k <= m; ++k) {
        const double zsum = m - 2 * k;
        table[k] = std::polar(1.0, theta * zsum);
    }
    auto& amp = reg.amplitudes();
    parallel_for(reg.dim(), [&](std::size_t lo, std::size_t hi, std::size_t) {
        for (std::size_t b = lo; b < hi; ++b) amp[b] *= table[popcount64(b & mask)];
    });
}

// <prod_{q in mask_j} sigma_z> for every mask in one pass over the state.
// Up to 16 masks take a fast path: the per-index parity pattern of all masks
// comes from two table lookups, and weights are accumulated per pattern, so
// the inner loop does one multiply and one add.
inline std::vector<double> expectation_zmask_batch(const QubitRegister& reg,
                                                   const std::vector<std::uint64_t>& masks) {
    const std::size_t nm = masks.size();
    const auto& amp = reg.amplitudes();
    if (nm >= 1 && nm <= 16 && reg.n_qubits() >= 4) {
        const int lo_bits = std::min(16, reg.n_qubits());
        const std::size_t lo_size = std::size_t{1} << lo_bits;
        const std::size_t hi_size = reg.dim() >> lo_bits;
        const std::uint64_t lo_mask = lo_size - 1;
        std::vector<std::uint16_t> lo_tab(lo_size, 0), hi_tab(hi_size, 0);
        for (std::size_t b = 0; b < lo_size; ++b)
            for (std::size_t j = 0; j < nm; ++j)
                if (parity64(b & masks[j] & lo_mask)) lo_tab[b] |= std::uint16_t(1) << j;
        for (std::size_t b = 0; b < hi_size; ++b)
            for (std::size_t j = 0; j < nm; ++j)
                if (parity64((b << lo_bits) & masks[j])) hi_tab[b] |= std::uint16_t(1) << j;
        const std::size_t npat = std::size_t{1} << nm;
        std::vector<double> pattern_weight(kParallelBlocks * npat, 0.0);
        detail::run_blocks(reg.dim(), [&](std::size_t lo, std::size_t hi, std::size_t blk) {
            double* acc = &pattern_weight[blk * npat];
            for (std::size_t b = lo; b < hi; ++b)
                acc[lo_tab[b & lo_mask] ^ hi_tab[b >> lo_bits]] += std::norm(amp[b]);
        });
        std::vector<double> out(nm, 0.0);
        for (std::size_t blk = 0; blk < kParallelBlocks; ++blk)
            for (std::size_t pat = 0; pat < npat; ++pat) {
                const double w = pattern_weight[blk * npat + pat];
                if (w == 0.0) continue;
                for (std::size_t j = 0; j < nm; ++j)
                    out[j] += ((pat >> j) & 1) ? -w : w;
            }
        return out;
    }
    std::vector<double> partial(kParallelBlocks * nm, 0.0);
    detail::run_blocks(reg.dim(), [&](std::size_t lo, std::size_t hi, std::size_t blk) {
        double* acc = &partial[blk * nm];
        for (std::size_t b = lo; b < hi; ++b) {
            const double w = std::norm(amp[b]);
            for (std::size_t j = 0; j < nm; ++j)
                acc[j] += parity64(b & masks[j]) ? -w : w;
        }
    });
    std::vector<double> out(nm, 0.0);
    for (std::size_t blk = 0; blk < kParallelBlocks; ++blk)
        for (std::size_t j = 0; j < nm; ++j) out[j] += partial[blk * nm + j];
    return out;
}

// Amplitude dump: 16-byte header (magic "Z2SV", version u32, n u32,
// reserved u32), then 2^n complex doubles, little-endian.
inline void dump_amplitudes(const QubitRegister& reg, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    const char magic[4] = {'Z', '2', 'S', 'V'};
    const std::uint32_t version = 1, n = static_cast<std::uint32_t>(reg.n_qubits()), rsv = 0;
    f.write(magic, 4);
    f.write(reinterpret_cast<const char*>(&version), 4);
    f.write(reinterpret_cast<const char*>(&n), 4);
    f.write(reinterpret_cast<const char*>(&rsv), 4);
    f.write(reinterpret_cast<const char*>(reg.amplitudes().data()),
            static_cast<std::streamsize>(reg.dim() * sizeof(cplx)));
    if (!f) throw std::runtime_error("short write to " + path);
}

inline QubitRegister load_amplitudes(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    char magic[4];
    std::uint32_t version = 0, n = 0, rsv = 0;
    f.read(magic, 4);
    f.read(reinterpret_cast<char*>(&version), 4);
    f.read(reinterpret_cast<char*>(&n), 4);
    f.read(reinterpret_cast<char*>(&rsv), 4);
    if (!f || std::memcmp(magic, "Z2SV", 4) != 0)
        throw std::runtime_error(path + " is not an amplitude dump");
    if (version != 1) throw std::runtime_error("unsupported amplitude dump version");
    QubitRegister reg(static_cast<int>(n));
    f.read(reinterpret_cast<char*>(reg.amplitudes().data()),
           static_cast<std::streamsize>(reg.dim() * sizeof(cplx)));
    if (!f) throw std::runtime_error("truncated amplitude dump " + path);
    return reg;
}

}  // namespace z2sim

#endif
