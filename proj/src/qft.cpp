#include "hubqc/qft.hpp"

#include <cmath>

namespace hubqc {

Matrix dft_matrix(int wires) {
    require(wires >= 1 && wires <= 10, "dft_matrix: size outside oracle range");
    std::size_t n = std::size_t(1) << wires;
    Matrix f(n);
    double scale = 1.0 / std::sqrt(double(n));
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < n; ++k) {
            f(j, k) = std::polar(scale, 2.0 * kPi * double(j * k % n) / double(n));
        }
    }
    return f;
}

namespace {

ControlledDecomp controlled_g_decomp(int k) {
    // G_k = diag(1, e^{2 pi i / 2^k}); alpha = pi/2^k, gamma = 0 and
    // beta + delta = 2 pi / 2^k, split evenly
    double alpha = kPi / std::pow(2.0, k);
    Matrix g(2, {1, 0, 0, std::polar(1.0, 2.0 * alpha)});
    return controlled_u_decomp(g, alpha, 0.0, alpha, alpha);
}

} // namespace

std::vector<GateOp> qft_gate_ops(const QftSpec& spec) {
    require(spec.wires >= 1 && spec.wires <= 8, "qft_gate_ops: unsupported size");
    std::vector<GateOp> ops;
    for (int i = 0; i < spec.wires; ++i) {
        ops.push_back(GateOp::hadamard(i));
        for (int j = i + 1; j < spec.wires; ++j) {
            int k = j - i + 1;
            for (const GateOp& op : expand_controlled(controlled_g_decomp(k), j, i)) {
                ops.push_back(op);
            }
        }
    }
    if (spec.include_swap) {
        for (int i = 0; i < spec.wires / 2; ++i) {
            int a = i;
            int b = spec.wires - 1 - i;
            ops.push_back(GateOp::cnot(a, b));
            ops.push_back(GateOp::cnot(b, a));
            ops.push_back(GateOp::cnot(a, b));
        }
    }
    return ops;
}

CircuitDescription build_qft(const QftSpec& spec) {
    require(spec.wires >= 2, "build_qft: needs at least two wires");
    require(spec.wires == 2,
            "build_qft: controlled-G_k factors for three or more wires need rotations off the pi/4 grid; "
            "only the two-qubit transform runs under the protocol");

    CircuitDescription c;
    c.wires = 2;
    c.gates.push_back(CircuitGate::single(CircuitGate::Kind::H, 0));
    // controlled-S on (control 1, target 0): C, CNOT, B, CNOT, A, phase
    c.gates.push_back(CircuitGate::rz(0, 7)); // C  = Rz(-pi/4)
    c.gates.push_back(CircuitGate::cnot(1, 0));
    c.gates.push_back(CircuitGate::rz(0, 7)); // B  = Rz(-pi/4)
    c.gates.push_back(CircuitGate::cnot(1, 0));
    c.gates.push_back(CircuitGate::rz(0, 2)); // A  = Rz(pi/2)
    c.gates.push_back(CircuitGate::single(CircuitGate::Kind::T, 1)); // P(pi/4) on the control
    c.gates.push_back(CircuitGate::single(CircuitGate::Kind::H, 1));
    if (spec.include_swap) {
        c.gates.push_back(CircuitGate::cnot(0, 1));
        c.gates.push_back(CircuitGate::cnot(1, 0));
        c.gates.push_back(CircuitGate::cnot(0, 1));
    }
    return c;
}

SessionReport run_blind_qft(const QftSpec& spec, const std::vector<int>& input_bits, std::uint64_t seed) {
    CircuitDescription circuit = build_qft(spec);
    SessionConfig config;
    config.input_bits = input_bits;
    return run_session(circuit, AdversaryPolicy{}, seed, config);
}

} // namespace hubqc
