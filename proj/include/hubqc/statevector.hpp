#pragma once

#include <vector>

#include "hubqc/gates.hpp"
#include "hubqc/matrix.hpp"
#include "hubqc/rng.hpp"

namespace hubqc {

// Maximum register width. HUBQC_MAX_QUBITS in the environment overrides the
// built-in cap of 22; the unit-by-unit execution strategy keeps real usage
// at ten qubits or fewer.
int max_qubits();

// Dense state vector over n qubits. Qubit 0 is the most significant bit of
// the basis-state index. Operations return new values or mutate an
// exclusively-owned register; measurement removes the measured qubit and
// re-indexes the remaining ones.
class StateVector {
  public:
    StateVector() = default;

    // |0...0> on n qubits.
    static StateVector zero(int num_qubits);
    static StateVector from_amplitudes(std::vector<cplx> amps);

    // Single-qubit preparations.
    static StateVector basis1(int bit);
    // (|0> + e^{i omega} |1>)/sqrt(2), negative branch for sign = 1.
    static StateVector plus(double omega, int sign = 0);

    int num_qubits() const { return num_qubits_; }
    std::size_t dim() const { return amps_.size(); }
    const std::vector<cplx>& amplitudes() const { return amps_; }
    cplx amplitude(std::size_t i) const { return amps_[i]; }

    double norm_sq() const;

    void apply_single(int qubit, const Matrix& u);
    void apply_two(int q1, int q2, const Matrix& u4);
    void apply_cz(int q1, int q2);

    // Projects the qubit onto the planar-basis outcome (0 <-> "+") without
    // sampling; returns the branch probability and leaves the register
    // collapsed and renormalized with the qubit removed. A zero-probability
    // branch leaves the register unusable; callers must check.
    double project_planar(int qubit, double delta, int outcome);
    double project_z(int qubit, int outcome);

    // Born-rule sampling wrappers around the projections.
    int measure_planar(int qubit, double delta, Rng& rng);
    int measure_z(int qubit, Rng& rng);

    // Tensor product with a fresh qubit appended at the highest index.
    void extend_with(const StateVector& fresh);

    // |<a|b>|^2, insensitive to global phase.
    friend double fidelity(const StateVector& a, const StateVector& b);

    // Reduced density matrix of one qubit (needed by trap-isolation checks).
    Matrix reduced_density(int qubit) const;

  private:
    void check_qubit(int qubit) const;

    int num_qubits_ = 0;
    std::vector<cplx> amps_;
};

double fidelity(const StateVector& a, const StateVector& b);

// Single-qubit density matrix utilities for the blindness checks.
Matrix ensemble_density(const std::vector<std::pair<StateVector, double>>& ensemble);

} // namespace hubqc
