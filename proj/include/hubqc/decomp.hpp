#pragma once

#include <vector>

#include "hubqc/angles.hpp"
#include "hubqc/gates.hpp"

namespace hubqc {

enum class AxisOrder { ZYZ, ZXZ, YXY };
enum class GateName { H, S, Z, T, X, Y };
enum class Pauli { X, Z };

// Euler-style parameters: U = e^{i theta} R_a(alpha) R_b(beta) R_c(gamma)
// for the order's axes. The global phase is an exact multiple of pi/8 and
// the rotation angles exact signed multiples of pi/4; rotations have period
// 4*pi, so the signed values are kept rather than reduced mod 2*pi.
struct DecompParams {
    int phase_eighths = 0; // theta = phase_eighths * pi/8
    int alpha_quarters = 0;
    int beta_quarters = 0;
    int gamma_quarters = 0;
};

std::array<Axis, 3> axes_of(AxisOrder order);

Matrix compose(AxisOrder order, const DecompParams& p);

// The literal table constants for gates H, S, Z, T, X, Y in the three axis
// orders; every entry reconstructs its gate matrix, global phase included.
DecompParams decomp_table(GateName gate, AxisOrder order);

Matrix gate_matrix(GateName gate);

// Commuting a Pauli from the right to the left of a rotation:
// R_x(b)X = XR_x(b), R_x(b)Z = ZR_x(-b), R_y(b)X = XR_y(-b),
// R_y(b)Z = ZR_y(-b), R_z(b)X = XR_z(-b), R_z(b)Z = ZR_z(b).
struct PropagatedRotation {
    Pauli pauli;
    double angle;
};
PropagatedRotation propagate_pauli(Axis axis, double beta, Pauli p);

// Sign the commuted angle picks up: +1 or -1.
int propagate_sign(Axis axis, Pauli p);

// Half-turn factor split off a padded rotation:
// R_x(v + pi) = (-iX) R_x(v), R_y(v + pi) = (XZ) R_y(v), R_z(v + pi) = (-iZ) R_z(v).
Matrix half_turn_factor(Axis axis);

// Controlled-U = e^{i alpha} A X B X C with A B C = I, built from
// A = Rz(beta) Ry(gamma/2), B = Ry(-gamma/2) Rz(-(delta+beta)/2),
// C = Rz((delta-beta)/2) for U = e^{i alpha} Rz(beta) Ry(gamma) Rz(delta).
struct ControlledDecomp {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    double delta = 0.0;
    Matrix a, b, c;
};

ControlledDecomp controlled_u_decomp(const Matrix& target, double beta, double gamma, double delta, double alpha);

// A flat gate list over logical wires, rich enough for matrix-level
// assembly of the QFT blocks (angles are radians, not grid-restricted).
struct GateOp {
    enum class Kind { Rotation, Phase, Hadamard, Cnot };
    Kind kind = Kind::Rotation;
    Axis axis = Axis::Z;
    double angle = 0.0;
    int wire = 0;
    int control = 0;
    int target = 0;

    static GateOp rot(int wire, Axis axis, double angle) { return {Kind::Rotation, axis, angle, wire, 0, 0}; }
    static GateOp phase(int wire, double angle) { return {Kind::Phase, Axis::Z, angle, wire, 0, 0}; }
    static GateOp hadamard(int wire) { return {Kind::Hadamard, Axis::Z, 0.0, wire, 0, 0}; }
    static GateOp cnot(int control, int target) { return {Kind::Cnot, Axis::Z, 0.0, 0, control, target}; }
};

std::vector<GateOp> expand_controlled(const ControlledDecomp& cd, int control, int target);

// Dense unitary of a gate list (oracle-sized wire counts only).
Matrix assemble_unitary(const std::vector<GateOp>& ops, int num_wires);

} // namespace hubqc
