#ifndef Z2SIM_PAULI_HPP
#define Z2SIM_PAULI_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "z2sim/common.hpp"

namespace z2sim {

enum class Axis : std::uint8_t { X, Y, Z };

// Product of single-qubit Pauli factors with a phase in {1, i, -1, -i}.
// Stored in symplectic form: a qubit is in x_mask if its factor contains X
// (X or Y) and in z_mask if it contains Z (Z or Y).  The operator is
//
//   P = i^phase_quarter * prod_{q in Y} Y_q * prod_{q in X} X_q * prod_{q in Z} Z_q
//
// On a basis state |b> (bit q of b set <=> qubit q is |down>):
//   P |b> = i^phase_quarter * i^{|Y|} * (-1)^{popcount(b & z_mask)} |b ^ x_mask>
class PauliString {
  public:
    PauliString() = default;

    static PauliString identity() { return PauliString(); }

    static PauliString single(int qubit, Axis a) {
        PauliString p;
        p.set(qubit, a);
        return p;
    }

    static PauliString from_factors(const std::vector<std::pair<int, Axis>>& factors) {
        PauliString p;
        for (const auto& [q, a] : factors) p.set(q, a);
        return p;
    }

    void set(int qubit, Axis a) {
        if (qubit < 0 || qubit >= 64) throw std::out_of_range("qubit index out of range");
        const std::uint64_t bit = std::uint64_t{1} << qubit;
        if ((x_mask_ | z_mask_) & bit)
            throw std::invalid_argument("qubit " + std::to_string(qubit) +
                                        " already carries a factor");
        if (a == Axis::X || a == Axis::Y) x_mask_ |= bit;
        if (a == Axis::Z || a == Axis::Y) z_mask_ |= bit;
    }

    std::uint64_t x_mask() const { return x_mask_; }
    std::uint64_t z_mask() const { return z_mask_; }
    std::uint64_t y_mask() const { return x_mask_ & z_mask_; }
    std::uint64_t support() const { return x_mask_ | z_mask_; }
    int phase_quarter() const { return phase_quarter_; }

    bool is_identity() const { return support() == 0 && phase_quarter_ == 0; }
    int max_qubit() const {
        const std::uint64_t s = support();
        return s == 0 ? -1 : 63 - __builtin_clzll(s);
    }

    cplx phase() const {
        static const cplx table[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
        return table[phase_quarter_];
    }

    // Hermitian iff the phase is real (the canonical factors are Hermitian).
    bool is_hermitian() const { return phase_quarter_ % 2 == 0; }

    PauliString& multiply_phase(int quarters) {
        phase_quarter_ = ((phase_quarter_ + quarters) % 4 + 4) % 4;
        return *this;
    }

    // Coefficient in P|b> = coeff(b) |b ^ x_mask>.
    cplx basis_coefficient(std::uint64_t b) const {
        const int k = (phase_quarter_ + popcount64(y_mask())) & 3;
        static const cplx table[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
        cplx c = table[k];
        if (parity64(b & z_mask_)) c = -c;
        return c;
    }

    // Operator product this * rhs (this applied after rhs).
    PauliString operator*(const PauliString& rhs) const {
        // Convert both to i^m X^x Z^z normal form, commute Z^z1 past X^x2.
        const int m1 = (phase_quarter_ + popcount64(y_mask())) & 3;
        const int m2 = (rhs.phase_quarter_ + popcount64(rhs.y_mask())) & 3;
        int m = (m1 + m2) & 3;
        if (parity64(z_mask_ & rhs.x_mask_)) m = (m + 2) & 3;
        PauliString out;
        out.x_mask_ = x_mask_ ^ rhs.x_mask_;
        out.z_mask_ = z_mask_ ^ rhs.z_mask_;
        out.phase_quarter_ = ((m - popcount64(out.y_mask())) % 4 + 4) % 4;
        return out;
    }

    bool operator==(const PauliString& rhs) const {
        return x_mask_ == rhs.x_mask_ && z_mask_ == rhs.z_mask_ &&
               phase_quarter_ == rhs.phase_quarter_;
    }

    bool commutes_with(const PauliString& rhs) const {
        return (parity64(x_mask_ & rhs.z_mask_) ^ parity64(z_mask_ & rhs.x_mask_)) == 0;
    }

  private:
    std::uint64_t x_mask_ = 0;
    std::uint64_t z_mask_ = 0;
    int phase_quarter_ = 0;  // i^phase_quarter
};

// All-X string over a set of qubits (plaquette operators, Wilson loops).
template <typename Container>
PauliString x_string(const Container& qubits) {
    PauliString p;
    for (int q : qubits) p.set(q, Axis::X);
    return p;
}

// All-Z string over a set of qubits (Gauss-law stars, electric terms).
template <typename Container>
PauliString z_string(const Container& qubits) {
    PauliString p;
    for (int q : qubits) p.set(q, Axis::Z);
    return p;
}

inline PauliString x_string(std::initializer_list<int> qubits) {
    return x_string<std::initializer_list<int>>(qubits);
}
inline PauliString z_string(std::initializer_list<int> qubits) {
    return z_string<std::initializer_list<int>>(qubits);
}

}  // namespace z2sim

#endif
