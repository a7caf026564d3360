#include <doctest.h>

#include <cmath>

#include "hubqc/decomp.hpp"
#include "hubqc/rng.hpp"

using namespace hubqc;

namespace {
const GateName kGates[] = {GateName::H, GateName::S, GateName::Z, GateName::T, GateName::X, GateName::Y};
const AxisOrder kOrders[] = {AxisOrder::ZYZ, AxisOrder::ZXZ, AxisOrder::YXY};
} // namespace

TEST_CASE("all 18 table entries reconstruct their gates, phase included") {
    for (AxisOrder order : kOrders) {
        for (GateName gate : kGates) {
            DecompParams p = decomp_table(gate, order);
            Matrix rebuilt = compose(order, p);
            CHECK(rebuilt.is_unitary());
            CHECK(rebuilt.distance(gate_matrix(gate)) <= kTolTable);
        }
    }
}

TEST_CASE("selected table entries match their printed parameters") {
    DecompParams t_zyz = decomp_table(GateName::T, AxisOrder::ZYZ);
    CHECK(t_zyz.phase_eighths == 1);
    CHECK(t_zyz.alpha_quarters == 0);
    CHECK(t_zyz.beta_quarters == 0);
    CHECK(t_zyz.gamma_quarters == 1);

    DecompParams y_yxy = decomp_table(GateName::Y, AxisOrder::YXY);
    CHECK(y_yxy.phase_eighths == 4);
    CHECK(y_yxy.beta_quarters == 0);
    CHECK(std::abs(y_yxy.alpha_quarters + y_yxy.gamma_quarters) == 4);

    DecompParams s_yxy = decomp_table(GateName::S, AxisOrder::YXY);
    CHECK(s_yxy.phase_eighths == 2);
    CHECK(s_yxy.alpha_quarters == -2);
    CHECK(s_yxy.beta_quarters == 2);
    CHECK(s_yxy.gamma_quarters == 2);

    Matrix h_zyz = compose(AxisOrder::ZYZ, {4, 0, 2, 4});
    CHECK(h_zyz.distance(gate_matrix(GateName::H)) <= kTolTable);
    Matrix h_zxz = compose(AxisOrder::ZXZ, {4, 2, 2, 2});
    CHECK(h_zxz.distance(gate_matrix(GateName::H)) <= kTolTable);
}

TEST_CASE("z-x-z Y entry factor order") {
    // The half-turn factors anticommute, so their order matters: x-then-z
    // lands on -Y, while the stored z-then-x placement gives +Y.
    Matrix printed_order = compose(AxisOrder::ZXZ, {4, 0, 4, 4});
    CHECK(printed_order.distance(gate_matrix(GateName::Y) * cplx(-1.0, 0.0)) <= kTolExact);
    Matrix stored = compose(AxisOrder::ZXZ, decomp_table(GateName::Y, AxisOrder::ZXZ));
    CHECK(stored.distance(gate_matrix(GateName::Y)) <= kTolExact);
}

TEST_CASE("compose basics") {
    CHECK(compose(AxisOrder::ZYZ, {0, 0, 0, 0}).distance(Matrix::identity(2)) <= kTolExact);
    // identity splits arbitrarily across the two same-axis slots
    CHECK(compose(AxisOrder::ZYZ, {0, 3, 0, -3}).distance(Matrix::identity(2)) <= kTolExact);
}

TEST_CASE("pauli propagation rules as matrix identities") {
    Rng rng(31);
    Matrix paulis[] = {gates::x(), gates::z()};
    for (Axis axis : {Axis::X, Axis::Y, Axis::Z}) {
        for (Pauli p : {Pauli::X, Pauli::Z}) {
            const Matrix& pm = paulis[p == Pauli::X ? 0 : 1];
            for (int i = 0; i < 100; ++i) {
                double beta = (rng.uniform() - 0.5) * 4.0 * kPi;
                PropagatedRotation pr = propagate_pauli(axis, beta, p);
                CHECK(pr.pauli == p);
                Matrix lhs = rotation(axis, beta) * pm;
                Matrix rhs = pm * rotation(axis, pr.angle);
                CHECK(lhs.distance(rhs) <= kTolExact);
            }
        }
    }
    CHECK(propagate_sign(Axis::Z, Pauli::X) == -1);
    CHECK(propagate_sign(Axis::Z, Pauli::Z) == 1);
    CHECK(propagate_sign(Axis::X, Pauli::X) == 1);
    CHECK(propagate_sign(Axis::Y, Pauli::X) == -1);
}

TEST_CASE("padded rotations split into a half-turn factor") {
    for (Axis axis : {Axis::X, Axis::Y, Axis::Z}) {
        for (int k : kAngleSetS) {
            double nu = k * kPi / 4.0;
            Matrix lhs = rotation(axis, nu + kPi);
            Matrix rhs = half_turn_factor(axis) * rotation(axis, nu);
            CHECK(lhs.distance(rhs) <= kTolExact);
        }
    }
}

TEST_CASE("controlled-S decomposition") {
    ControlledDecomp cd = controlled_u_decomp(gate_matrix(GateName::S), kPi / 2.0, 0.0, 0.0, kPi / 4.0);
    CHECK((cd.a * cd.b * cd.c).distance(Matrix::identity(2)) <= kTolExact);

    Matrix rebuilt = (cd.a * gates::x() * cd.b * gates::x() * cd.c) * std::polar(1.0, cd.alpha);
    CHECK(rebuilt.distance(gate_matrix(GateName::S)) <= kTolExact);

    Matrix expanded = assemble_unitary(expand_controlled(cd, 0, 1), 2);
    Matrix cs = gates::controlled(gates::s());
    CHECK(expanded.distance(cs) <= kTolTable);
}

TEST_CASE("controlled phase gates G_k") {
    // G_k = diag(1, e^{2 pi i / 2^k}) with alpha = pi/2^k, gamma = 0,
    // beta + delta = 2 pi / 2^k.
    for (int k = 2; k <= 4; ++k) {
        double alpha = kPi / std::pow(2.0, k);
        Matrix g(2, {1, 0, 0, std::polar(1.0, 2.0 * alpha)});
        ControlledDecomp cd = controlled_u_decomp(g, alpha, 0.0, alpha, alpha);
        Matrix expanded = assemble_unitary(expand_controlled(cd, 0, 1), 2);
        CHECK(expanded.distance(gates::controlled(g)) <= kTolTable);
    }
    // direct matrix assembly oracle for controlled-G_3
    double a3 = kPi / 8.0;
    ControlledDecomp cd3 = controlled_u_decomp(Matrix(2, {1, 0, 0, std::polar(1.0, kPi / 4.0)}), a3, 0.0, a3, a3);
    Matrix m = assemble_unitary(expand_controlled(cd3, 0, 1), 2);
    Matrix expect = Matrix::identity(4);
    expect(3, 3) = std::polar(1.0, kPi / 4.0);
    CHECK(m.distance(expect) <= kTolTable);
}

TEST_CASE("controlled identity collapses to an empty circuit") {
    ControlledDecomp cd = controlled_u_decomp(Matrix::identity(2), 0.0, 0.0, 0.0, 0.0);
    CHECK(expand_controlled(cd, 0, 1).empty());
}

TEST_CASE("controlled_u_decomp rejects mismatched parameters") {
    CHECK_THROWS_AS(controlled_u_decomp(gate_matrix(GateName::S), 1.0, 0.3, 0.0, kPi / 4.0), Error);
}

TEST_CASE("assemble_unitary handles cnot wiring") {
    Matrix cn01 = assemble_unitary({GateOp::cnot(0, 1)}, 2);
    CHECK(cn01.distance(gates::cnot()) <= kTolExact);

    // flipped orientation: control on the low wire
    Matrix cn10 = assemble_unitary({GateOp::cnot(1, 0)}, 2);
    Matrix expect(4);
    expect(0, 0) = expect(3, 1) = expect(2, 2) = expect(1, 3) = 1.0;
    CHECK(cn10.distance(expect) <= kTolExact);
}
