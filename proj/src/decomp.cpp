#include "hubqc/decomp.hpp"

#include <cmath>

namespace hubqc {

std::array<Axis, 3> axes_of(AxisOrder order) {
    switch (order) {
    case AxisOrder::ZYZ:
        return {Axis::Z, Axis::Y, Axis::Z};
    case AxisOrder::ZXZ:
        return {Axis::Z, Axis::X, Axis::Z};
    case AxisOrder::YXY:
        return {Axis::Y, Axis::X, Axis::Y};
    }
    throw Error("axes_of: bad order");
}

Matrix compose(AxisOrder order, const DecompParams& p) {
    auto ax = axes_of(order);
    double q = kPi / 4.0;
    Matrix m = rotation(ax[0], p.alpha_quarters * q) * rotation(ax[1], p.beta_quarters * q) *
               rotation(ax[2], p.gamma_quarters * q);
    return m * std::polar(1.0, p.phase_eighths * kPi / 8.0);
}

// Transcribed constants. Angles are quarters of pi (signed), phases eighths
// of pi. The z-x-z Y entry is printed with the half-turn factors in the
// order R_x(pi) R_z(pi), which evaluates to -Y; the z-then-x placement
// below reproduces Y exactly (see the factor-order test).
DecompParams decomp_table(GateName gate, AxisOrder order) {
    switch (order) {
    case AxisOrder::ZYZ:
        switch (gate) {
        case GateName::H:
            return {4, 0, 2, 4};
        case GateName::S:
            return {2, 0, 0, 2};
        case GateName::Z:
            return {4, 0, 0, 4};
        case GateName::X:
            return {4, 0, 4, 4};
        case GateName::T:
            return {1, 0, 0, 1};
        case GateName::Y:
            return {4, 0, 4, 0};
        }
        break;
    case AxisOrder::ZXZ:
        switch (gate) {
        case GateName::S:
            return {2, 0, 0, 2};
        case GateName::Z:
            return {4, 0, 0, 4};
        case GateName::T:
            return {1, 0, 0, 1};
        case GateName::X:
            return {4, 0, 4, 0};
        case GateName::Y:
            return {4, 4, 4, 0};
        case GateName::H:
            return {4, 2, 2, 2};
        }
        break;
    case AxisOrder::YXY:
        switch (gate) {
        case GateName::S:
            return {2, -2, 2, 2};
        case GateName::H:
            return {4, 0, 4, 2};
        case GateName::Z:
            return {4, -2, 4, 2};
        case GateName::X:
            return {4, 0, 4, 0};
        case GateName::T:
            return {1, -2, 1, 2};
        case GateName::Y:
            return {4, 0, 0, 4};
        }
        break;
    }
    throw Error("decomp_table: bad gate/order");
}

Matrix gate_matrix(GateName gate) {
    switch (gate) {
    case GateName::H:
        return gates::h();
    case GateName::S:
        return gates::s();
    case GateName::Z:
        return gates::z();
    case GateName::T:
        return gates::t();
    case GateName::X:
        return gates::x();
    case GateName::Y:
        return gates::y();
    }
    throw Error("gate_matrix: bad gate");
}

int propagate_sign(Axis axis, Pauli p) {
    if (axis == Axis::X && p == Pauli::X) {
        return 1;
    }
    if (axis == Axis::Z && p == Pauli::Z) {
        return 1;
    }
    return -1;
}

PropagatedRotation propagate_pauli(Axis axis, double beta, Pauli p) {
    return {p, propagate_sign(axis, p) * beta};
}

Matrix half_turn_factor(Axis axis) {
    switch (axis) {
    case Axis::X:
        return gates::x() * cplx(0.0, -1.0);
    case Axis::Y:
        return gates::x() * gates::z();
    case Axis::Z:
        return gates::z() * cplx(0.0, -1.0);
    }
    throw Error("half_turn_factor: bad axis");
}

ControlledDecomp controlled_u_decomp(const Matrix& target, double beta, double gamma, double delta, double alpha) {
    require(target.dim() == 2, "controlled_u_decomp: expects a 2x2 target");
    Matrix rebuilt =
        (rotation(Axis::Z, beta) * rotation(Axis::Y, gamma) * rotation(Axis::Z, delta)) * std::polar(1.0, alpha);
    require(rebuilt.distance(target) <= kTolTable, "controlled_u_decomp: parameters do not reproduce the target");

    ControlledDecomp cd;
    cd.alpha = alpha;
    cd.beta = beta;
    cd.gamma = gamma;
    cd.delta = delta;
    cd.a = rotation(Axis::Z, beta) * rotation(Axis::Y, gamma / 2.0);
    cd.b = rotation(Axis::Y, -gamma / 2.0) * rotation(Axis::Z, -(delta + beta) / 2.0);
    cd.c = rotation(Axis::Z, (delta - beta) / 2.0);

    require((cd.a * cd.b * cd.c).distance(Matrix::identity(2)) <= kTolExact, "controlled_u_decomp: ABC != I");
    Matrix abc = cd.a * gates::x() * cd.b * gates::x() * cd.c;
    require((abc * std::polar(1.0, alpha)).distance(target) <= kTolExact,
            "controlled_u_decomp: e^{ia} A X B X C != target");
    return cd;
}

namespace {

void push_rot(std::vector<GateOp>& ops, int wire, Axis axis, double angle) {
    if (angle != 0.0) {
        ops.push_back(GateOp::rot(wire, axis, angle));
    }
}

} // namespace

std::vector<GateOp> expand_controlled(const ControlledDecomp& cd, int control, int target) {
    std::vector<GateOp> ops;
    // C
    push_rot(ops, target, Axis::Z, (cd.delta - cd.beta) / 2.0);
    bool entangle = cd.gamma != 0.0 || cd.delta != 0.0 || cd.beta != 0.0;
    if (entangle) {
        ops.push_back(GateOp::cnot(control, target));
    }
    // B
    push_rot(ops, target, Axis::Z, -(cd.delta + cd.beta) / 2.0);
    push_rot(ops, target, Axis::Y, -cd.gamma / 2.0);
    if (entangle) {
        ops.push_back(GateOp::cnot(control, target));
    }
    // A
    push_rot(ops, target, Axis::Y, cd.gamma / 2.0);
    push_rot(ops, target, Axis::Z, cd.beta);
    if (cd.alpha != 0.0) {
        ops.push_back(GateOp::phase(control, cd.alpha));
    }
    return ops;
}

Matrix assemble_unitary(const std::vector<GateOp>& ops, int num_wires) {
    require(num_wires >= 1 && num_wires <= 10, "assemble_unitary: wire count outside oracle range");
    std::size_t dim = std::size_t(1) << num_wires;
    Matrix u = Matrix::identity(dim);

    auto embed1 = [&](const Matrix& g, int wire) {
        Matrix full = Matrix::identity(1);
        for (int w = 0; w < num_wires; ++w) {
            full = full.kron(w == wire ? g : Matrix::identity(2));
        }
        return full;
    };

    for (const GateOp& op : ops) {
        Matrix step = Matrix::identity(dim);
        switch (op.kind) {
        case GateOp::Kind::Rotation:
            step = embed1(rotation(op.axis, op.angle), op.wire);
            break;
        case GateOp::Kind::Phase:
            step = embed1(gates::p(op.angle), op.wire);
            break;
        case GateOp::Kind::Hadamard:
            step = embed1(gates::h(), op.wire);
            break;
        case GateOp::Kind::Cnot: {
            std::size_t cb = std::size_t(1) << (num_wires - 1 - op.control);
            std::size_t tb = std::size_t(1) << (num_wires - 1 - op.target);
            step = Matrix(dim);
            for (std::size_t i = 0; i < dim; ++i) {
                std::size_t j = (i & cb) ? (i ^ tb) : i;
                step(j, i) = 1.0;
            }
            break;
        }
        }
        u = step * u;
    }
    return u;
}

} // namespace hubqc
