#pragma once

#include "hubqc/protocol.hpp"

namespace hubqc {

struct QftSpec {
    int wires = 2;
    bool include_swap = true;
};

// The discrete Fourier transform matrix: entries omega^{jk} / sqrt(N) with
// omega = e^{2 pi i / N}. The oracle every compiled circuit is held to.
Matrix dft_matrix(int wires);

// Generic gate-list expansion of the QFT (H layers, controlled phase gates
// via e^{i a} A X B X C and swap chains). Matrix-level only: controlled-G_k
// pieces use pi/2^k rotations that leave the protocol's angle grid at k >= 3.
std::vector<GateOp> qft_gate_ops(const QftSpec& spec);

// Protocol circuit for the two-qubit QFT (H, controlled-S as rotations and
// two CNOTs, optional swap as three CNOTs). Larger sizes are rejected: their
// controlled-G_k factors need angles off the pi/4 grid.
CircuitDescription build_qft(const QftSpec& spec);

SessionReport run_blind_qft(const QftSpec& spec, const std::vector<int>& input_bits, std::uint64_t seed);

} // namespace hubqc
