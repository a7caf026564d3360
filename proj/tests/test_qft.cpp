#include <doctest.h>

#include <cmath>

#include "hubqc/qft.hpp"

using namespace hubqc;

TEST_CASE("dft matrix entries") {
    Matrix f = dft_matrix(2);
    // 4x4 entries are i^{jk} / 2
    for (int j = 0; j < 4; ++j) {
        for (int k = 0; k < 4; ++k) {
            cplx expect = std::polar(0.5, kPi / 2.0 * double((j * k) % 4));
            CHECK(std::abs(f(j, k) - expect) <= kTolExact);
        }
    }
    CHECK(f.is_unitary());
}

TEST_CASE("generic gate-list expansion reproduces the transform") {
    for (int n = 1; n <= 4; ++n) {
        QftSpec spec;
        spec.wires = n;
        Matrix assembled = assemble_unitary(qft_gate_ops(spec), n);
        CHECK(assembled.distance(dft_matrix(n)) <= kTolTable);
    }
    QftSpec no_swap;
    no_swap.wires = 2;
    no_swap.include_swap = false;
    Matrix assembled = assemble_unitary(qft_gate_ops(no_swap), 2);
    // missing swap = transform with reversed output wires
    Matrix swapped(4);
    Matrix f = dft_matrix(2);
    int perm[4] = {0, 2, 1, 3};
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
            swapped(perm[r], c) = f(r, c);
        }
    }
    CHECK(assembled.distance(swapped) <= kTolTable);
}

TEST_CASE("protocol circuit for the two-qubit transform") {
    QftSpec spec;
    Matrix u = build_qft(spec).unitary();
    CHECK(u.distance(dft_matrix(2)) <= kTolTable);

    QftSpec no_swap;
    no_swap.include_swap = false;
    CircuitDescription c = build_qft(no_swap);
    CHECK(c.gates.size() + 3 == build_qft(spec).gates.size());

    QftSpec three;
    three.wires = 3;
    CHECK_THROWS_AS(build_qft(three), Error);
}

TEST_CASE("controlled-S block satisfies the paper constraints") {
    ControlledDecomp cd = controlled_u_decomp(gates::s(), kPi / 2.0, 0.0, 0.0, kPi / 4.0);
    CHECK((cd.a * cd.b * cd.c).distance(Matrix::identity(2)) <= kTolExact);
    Matrix rebuilt = (cd.a * gates::x() * cd.b * gates::x() * cd.c) * std::polar(1.0, cd.alpha);
    CHECK(rebuilt.distance(gates::s()) <= kTolExact);
}

TEST_CASE("blind qft on basis inputs") {
    QftSpec spec;
    SUBCASE("zero state maps to the uniform superposition") {
        SessionReport report = run_blind_qft(spec, {0, 0}, 606);
        CHECK(report.verdict.accept);
        StateVector out = StateVector::from_amplitudes(report.output_amplitudes);
        StateVector uniform = StateVector::from_amplitudes({0.5, 0.5, 0.5, 0.5});
        CHECK(fidelity(out, uniform) >= 1.0 - kTolFidelity);
    }
    SUBCASE("|01> picks up the fourth-root phases") {
        SessionReport report = run_blind_qft(spec, {0, 1}, 607);
        CHECK(report.verdict.accept);
        StateVector out = StateVector::from_amplitudes(report.output_amplitudes);
        StateVector expect = StateVector::from_amplitudes(
            {cplx(0.5, 0.0), cplx(0.0, 0.5), cplx(-0.5, 0.0), cplx(0.0, -0.5)});
        CHECK(fidelity(out, expect) >= 1.0 - kTolFidelity);
    }
}
