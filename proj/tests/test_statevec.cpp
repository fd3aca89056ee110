#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>

#include "oracles.hpp"
#include "z2sim/statevec.hpp"

using namespace z2sim;

namespace {
const std::array<cplx, 2> kUp{cplx{1, 0}, cplx{0, 0}};
const std::array<cplx, 2> kDown{cplx{0, 0}, cplx{1, 0}};
const std::array<cplx, 2> kPlus{cplx{M_SQRT1_2, 0}, cplx{M_SQRT1_2, 0}};
}  // namespace

TEST_CASE("product state initialization") {
    SUBCASE("all up") {
        auto reg = init_product_state({kUp, kUp, kUp});
        CHECK(std::abs(reg[0] - cplx{1, 0}) < 1e-15);
        for (std::size_t i = 1; i < reg.dim(); ++i) CHECK(std::abs(reg[i]) == 0.0);
    }
    SUBCASE("single plus") {
        auto reg = init_product_state({kPlus});
        CHECK(std::abs(reg[0] - M_SQRT1_2) < 1e-15);
        CHECK(std::abs(reg[1] - M_SQRT1_2) < 1e-15);
    }
    SUBCASE("mixed assignment: qubit 0 = |+>, qubit 1 = |up>") {
        auto reg = init_product_state({kPlus, kUp});
        CHECK(std::abs(reg[0] - M_SQRT1_2) < 1e-15);
        CHECK(std::abs(reg[1] - M_SQRT1_2) < 1e-15);
        CHECK(std::abs(reg[2]) == 0.0);
        CHECK(std::abs(reg[3]) == 0.0);
    }
    SUBCASE("non-normalized input rejected") {
        CHECK_THROWS_AS(init_product_state({{cplx{0.9, 0}, cplx{0.1, 0}}}),
                        std::invalid_argument);
    }
}

TEST_CASE("pauli application") {
    SUBCASE("sigma_x flips") {
        auto reg = init_product_state({kUp});
        apply_pauli_string(reg, PauliString::single(0, Axis::X));
        CHECK(std::abs(reg[1] - cplx{1, 0}) < 1e-15);
    }
    SUBCASE("sigma_z on |down> gives -1") {
        auto reg = init_product_state({kDown});
        apply_pauli_string(reg, PauliString::single(0, Axis::Z));
        CHECK(std::abs(reg[1] - cplx{-1, 0}) < 1e-15);
    }
    SUBCASE("X Z X string on a random 4-qubit state matches the dense oracle") {
        Rng rng(7);
        auto reg = oracle::random_state(4, rng);
        auto p = PauliString::from_factors({{0, Axis::X}, {1, Axis::Z}, {2, Axis::X}});
        auto expect = oracle::pauli_string_dense(p, 4).apply(reg.amplitudes());
        apply_pauli_string(reg, p);
        CHECK(oracle::max_abs_diff(reg.amplitudes(), expect) < 1e-12);
    }
    SUBCASE("random strings against the oracle, n up to 6") {
        Rng rng(11);
        for (int trial = 0; trial < 40; ++trial) {
            const int n = 2 + static_cast<int>(rng.next_u64() % 5);
            auto reg = oracle::random_state(n, rng);
            PauliString p;
            for (int q = 0; q < n; ++q) {
                switch (rng.next_u64() % 4) {
                    case 1: p.set(q, Axis::X); break;
                    case 2: p.set(q, Axis::Y); break;
                    case 3: p.set(q, Axis::Z); break;
                    default: break;
                }
            }
            auto expect = oracle::pauli_string_dense(p, n).apply(reg.amplitudes());
            apply_pauli_string(reg, p);
            CHECK(oracle::max_abs_diff(reg.amplitudes(), expect) < 1e-12);
        }
    }
    SUBCASE("out-of-range qubit rejected") {
        auto reg = init_product_state({kUp, kUp});
        CHECK_THROWS_AS(apply_pauli_string(reg, PauliString::single(5, Axis::X)),
                        std::out_of_range);
    }
}

TEST_CASE("pauli rotations") {
    SUBCASE("z rotation on an eigenstate is a pure phase") {
        auto reg = init_product_state({kUp});
        apply_pauli_rotation(reg, PauliString::single(0, Axis::Z), 0.37);
        CHECK(std::abs(reg[0] - std::polar(1.0, -0.37)) < 1e-15);
    }
    SUBCASE("x rotation by pi/2 maps |up> to -i|down>") {
        auto reg = init_product_state({kUp});
        apply_pauli_rotation(reg, PauliString::single(0, Axis::X), M_PI_2);
        CHECK(std::abs(reg[0]) < 1e-15);
        CHECK(std::abs(reg[1] - cplx{0, -1}) < 1e-15);
    }
    SUBCASE("three-qubit XXX rotation matches the series exponential") {
        Rng rng(13);
        auto reg = oracle::random_state(3, rng);
        auto p = x_string({0, 1, 2});
        auto expect = oracle::rotation_dense_series(p, 0.3, 3).apply(reg.amplitudes());
        apply_pauli_rotation(reg, p, 0.3);
        CHECK(oracle::max_abs_diff(reg.amplitudes(), expect) < 1e-12);
    }
    SUBCASE("random rotations against the series oracle") {
        Rng rng(17);
        for (int trial = 0; trial < 25; ++trial) {
            const int n = 1 + static_cast<int>(rng.next_u64() % 4);
            auto reg = oracle::random_state(n, rng);
            PauliString p;
            bool empty = true;
            for (int q = 0; q < n; ++q) {
                switch (rng.next_u64() % 4) {
                    case 1: p.set(q, Axis::X); empty = false; break;
                    case 2: p.set(q, Axis::Y); empty = false; break;
                    case 3: p.set(q, Axis::Z); empty = false; break;
                    default: break;
                }
            }
            if (empty) p.set(0, Axis::Z);
            const double phi = 4.0 * rng.next_double() - 2.0;
            auto expect = oracle::rotation_dense_series(p, phi, n).apply(reg.amplitudes());
            apply_pauli_rotation(reg, p, phi);
            CHECK(oracle::max_abs_diff(reg.amplitudes(), expect) < 1e-12);
            CHECK(std::abs(reg.norm_sq() - 1.0) < 1e-12);
        }
    }
    SUBCASE("rotation composition") {
        Rng rng(19);
        auto reg1 = oracle::random_state(4, rng);
        auto reg2 = reg1;
        auto p = PauliString::from_factors({{0, Axis::X}, {2, Axis::Y}});
        apply_pauli_rotation(reg1, p, 0.4);
        apply_pauli_rotation(reg1, p, 0.9);
        apply_pauli_rotation(reg2, p, 1.3);
        CHECK(oracle::max_abs_diff(reg1.amplitudes(), reg2.amplitudes()) < 1e-12);
    }
    SUBCASE("disjoint-support rotations commute") {
        Rng rng(23);
        auto reg1 = oracle::random_state(4, rng);
        auto reg2 = reg1;
        auto a = x_string({0, 1});
        auto b = z_string({2, 3});
        apply_pauli_rotation(reg1, a, 0.5);
        apply_pauli_rotation(reg1, b, 0.8);
        apply_pauli_rotation(reg2, b, 0.8);
        apply_pauli_rotation(reg2, a, 0.5);
        CHECK(oracle::max_abs_diff(reg1.amplitudes(), reg2.amplitudes()) < 1e-12);
    }
    SUBCASE("non-Hermitian generator rejected") {
        auto reg = init_product_state({kUp});
        auto p = PauliString::single(0, Axis::X);
        p.multiply_phase(1);
        CHECK_THROWS_AS(apply_pauli_rotation(reg, p, 0.1), NumericalError);
    }
}

TEST_CASE("expectations") {
    SUBCASE("trivial expectations") {
        auto up = init_product_state({kUp});
        CHECK(expectation_pauli(up, PauliString::single(0, Axis::Z)) == doctest::Approx(1.0));
        auto plus = init_product_state({kPlus});
        CHECK(expectation_pauli(plus, PauliString::single(0, Axis::Z)) ==
              doctest::Approx(0.0).epsilon(1e-14));
        CHECK(expectation_pauli(plus, PauliString::single(0, Axis::X)) == doctest::Approx(1.0));
    }
    SUBCASE("random states against the dense quadratic form") {
        Rng rng(29);
        for (int trial = 0; trial < 25; ++trial) {
            const int n = 2 + static_cast<int>(rng.next_u64() % 4);
            auto reg = oracle::random_state(n, rng);
            PauliString p;
            for (int q = 0; q < n; ++q)
                if (rng.next_u64() % 2) p.set(q, rng.next_u64() % 2 ? Axis::X : Axis::Z);
            auto pv = oracle::pauli_string_dense(p, n).apply(reg.amplitudes());
            cplx acc{0, 0};
            for (std::size_t i = 0; i < pv.size(); ++i)
                acc += std::conj(reg.amplitudes()[i]) * pv[i];
            CHECK(expectation_pauli(reg, p) == doctest::Approx(acc.real()).epsilon(1e-12));
        }
    }
}

TEST_CASE("projectors") {
    SUBCASE("(1+X)/2 on |up> gives |+> with probability 1/2") {
        auto reg = init_product_state({kUp});
        const double prob = apply_projector(reg, PauliString::single(0, Axis::X), +1);
        CHECK(prob == doctest::Approx(0.5));
        CHECK(std::abs(reg[0] - M_SQRT1_2) < 1e-14);
        CHECK(std::abs(reg[1] - M_SQRT1_2) < 1e-14);
    }
    SUBCASE("(1+Z)/2 on |up> is the identity with probability 1") {
        auto reg = init_product_state({kUp});
        const double prob = apply_projector(reg, PauliString::single(0, Axis::Z), +1);
        CHECK(prob == doctest::Approx(1.0));
        CHECK(std::abs(reg[0] - cplx{1, 0}) < 1e-14);
    }
    SUBCASE("sequential commuting projectors follow the product rule") {
        Rng rng(31);
        auto reg = oracle::random_state(4, rng);
        auto dense_state = reg.amplitudes();
        auto p1 = x_string({0, 1});
        auto p2 = x_string({2, 3});
        const double q1 = apply_projector(reg, p1, +1);
        const double q2 = apply_projector(reg, p2, -1);

        auto d1 = oracle::pauli_string_dense(p1, 4).apply(dense_state);
        for (std::size_t i = 0; i < d1.size(); ++i) d1[i] = 0.5 * (dense_state[i] + d1[i]);
        auto d2 = oracle::pauli_string_dense(p2, 4).apply(d1);
        for (std::size_t i = 0; i < d2.size(); ++i) d2[i] = 0.5 * (d1[i] - d2[i]);
        double joint = 0.0;
        for (const auto& v : d2) joint += std::norm(v);
        CHECK(q1 * q2 == doctest::Approx(joint).epsilon(1e-12));
    }
    SUBCASE("projection onto the null space is an error") {
        auto reg = init_product_state({kUp});
        CHECK_THROWS_AS(apply_projector(reg, PauliString::single(0, Axis::Z), -1),
                        NumericalError);
    }
}

TEST_CASE("fidelity") {
    Rng rng(37);
    auto a = oracle::random_state(3, rng);
    SUBCASE("identical states") { CHECK(fidelity(a, a) == doctest::Approx(1.0)); }
    SUBCASE("orthogonal basis states") {
        auto u = init_product_state({kUp, kUp});
        auto d = init_product_state({kDown, kUp});
        CHECK(fidelity(u, d) == doctest::Approx(0.0));
    }
    SUBCASE("global phase insensitivity") {
        auto b = a;
        for (auto& v : b.amplitudes()) v *= std::polar(1.0, 1.234);
        CHECK(fidelity(a, b) == doctest::Approx(1.0).epsilon(1e-13));
    }
    SUBCASE("size mismatch") {
        auto b = init_product_state({kUp});
        CHECK_THROWS_AS(fidelity(a, b), std::invalid_argument);
    }
}

TEST_CASE("norm is preserved by long gate sequences") {
    Rng rng(41);
    auto reg = oracle::random_state(5, rng);
    for (int step = 0; step < 200; ++step) {
        PauliString p;
        for (int q = 0; q < 5; ++q)
            if (rng.next_u64() % 2) p.set(q, static_cast<Axis>(rng.next_u64() % 3));
        if (p.support() == 0) continue;
        if (rng.next_u64() % 2)
            apply_pauli_rotation(reg, p, rng.next_double());
        else
            apply_pauli_string(reg, p);
    }
    CHECK(std::abs(reg.norm_sq() - 1.0) < 1e-10);
}

TEST_CASE("fused z helpers agree with the generic path") {
    Rng rng(43);
    auto reg = oracle::random_state(5, rng);
    SUBCASE("global z phase") {
        auto expect = reg;
        for (int q : {0, 2, 3})
            apply_pauli_rotation(expect, PauliString::single(q, Axis::Z), -0.7);
        apply_global_z_phase(reg, 0b01101, 0.7);
        CHECK(oracle::max_abs_diff(reg.amplitudes(), expect.amplitudes()) < 1e-13);
    }
    SUBCASE("batched z-string expectations") {
        std::vector<std::uint64_t> masks = {0b1, 0b110, 0b10101};
        auto batch = expectation_zmask_batch(reg, masks);
        for (std::size_t j = 0; j < masks.size(); ++j) {
            std::vector<int> qs;
            for (int q = 0; q < 5; ++q)
                if ((masks[j] >> q) & 1) qs.push_back(q);
            CHECK(batch[j] == doctest::Approx(expectation_pauli(reg, z_string(qs))).epsilon(1e-12));
        }
    }
}

TEST_CASE("amplitude dump round trip") {
    Rng rng(47);
    auto reg = oracle::random_state(4, rng);
    const std::string path = "statevec_dump_test.z2sv";
    dump_amplitudes(reg, path);
    auto back = load_amplitudes(path);
    CHECK(back.n_qubits() == 4);
    CHECK(oracle::max_abs_diff(reg.amplitudes(), back.amplitudes()) == 0.0);
    std::remove(path.c_str());
}

TEST_CASE("capacity cap names the dual engine") {
    try {
        QubitRegister reg(27);
        FAIL("expected CapacityError");
    } catch (const CapacityError& e) {
        CHECK(std::string(e.what()).find("dual") != std::string::npos);
    }
}
