#pragma once

#include <array>
#include <optional>
#include <vector>

#include "hubqc/angles.hpp"
#include "hubqc/rng.hpp"
#include "hubqc/statevector.hpp"

namespace hubqc {

// One adaptive planar measurement of the CNOT pattern. The angle sent to
// the server is
//   delta = (-1)^{sX} * omega + sZ * pi + kappa + r * pi
// with sX/sZ the dependency-set outcome parities, omega the measured
// qubit's preparation angle and r the one-time-pad bit.
struct MeasurementCommand {
    int slot = 0; // position in the measurement order
    int wire = 0; // 0 = control row, 1 = target row
    GridAngle omega;
    GridAngle kappa;
    int pad = 0;
    std::vector<int> x_deps;
    std::vector<int> z_deps;
};

GridAngle adaptive_angle(const MeasurementCommand& cmd, const std::vector<int>& outcomes);

// Pauli byproduct powers pending on a logical wire.
struct ByproductRecord {
    int x = 0;
    int z = 0;
};

// Full pending frame of a wire: the register holds
//   X^x Z^z P(rho) |intended>,   rho = (-1)^x * prep + residue,
// where prep is the raw preparation angle of the qubit the wire currently
// occupies and residue the absorbed diagonal correction. x never changes
// while prep or residue is pending, so the signed merge stays valid.
struct WireFrame {
    int x = 0;
    int z = 0;
    GridAngle prep;
    GridAngle residue;

    ByproductRecord record() const { return {x, z}; }
    GridAngle rho() const { return GridAngle(x ? -prep.k() : prep.k()) + residue; }
};

// The six-command angle template for one eight-qubit unit, measurement
// order a1 a2 b1 b2 c1 c2. kappa_shift carries absorbed corrections on the
// input commands without losing the base template.
struct CnotPattern {
    std::array<MeasurementCommand, 6> commands;
    std::array<int, 6> kappa_shift{}; // quarter-pi units added to kappa
    // completion after the measurements: H on the control output,
    // R_z(-pi/2) on the target output (a +pi/2 pending residue)
    static constexpr int kControlWire = 0;
    static constexpr int kTargetWire = 1;
};

// Builds the pattern template and gates it behind a simulation check; a
// template that fails to reproduce CNOT refuses to construct.
const CnotPattern& derive_cnot_pattern();

// Shifts the wire's input-command angle by +pi/2, absorbing the pending
// R_z(-pi/2) output correction of the previous unit into the next
// measurement basis. Only valid when another unit consumes the outputs.
CnotPattern absorb_correction(const CnotPattern& pattern, int wire);

// Fresh-qubit preparation angles and pad bits for one unit execution.
// preps order: b1 b2 c1 c2 out1 out2.
struct CnotUnitInstance {
    std::array<GridAngle, 6> preps;
    std::array<int, 6> pads;

    static CnotUnitInstance random(Rng& rng);
    static CnotUnitInstance bare(); // all-zero angles and pads
};

struct UnitExecution {
    std::array<int, 6> outcomes{};
    std::array<GridAngle, 6> deltas{};
    double branch_probability = 1.0; // product of forced-branch probabilities
};

// Client-side command calculus for one unit: produces the adaptive angle of
// each slot and folds outcomes back into the wire frames. The register (or
// the remote server) is driven separately; this class never touches state.
class UnitCalculus {
  public:
    UnitCalculus(const CnotPattern& pattern, const CnotUnitInstance& inst, std::array<WireFrame, 2>& frames);

    int current_slot() const { return slot_; }
    bool done() const { return slot_ == 6; }
    int wire_of_current() const;

    // Angle for the current slot's measurement; applies the vertical-link
    // byproduct mixing when the slot crosses a CZ column.
    GridAngle next_delta();
    void feed_outcome(int s);

  private:
    const CnotPattern& pattern_;
    const CnotUnitInstance& inst_;
    std::array<WireFrame, 2>& frames_;
    std::vector<int> outcomes_;
    GridAngle pending_delta_;
    int slot_ = 0;
    bool delta_ready_ = false;
};

// Executes one CNOT unit on the register: injects the six ancillas, applies
// the unit's CZ edges, measures the six commands adaptively and leaves the
// logical wires on the two fresh output qubits (register indices unchanged
// in wire_qubits). Outcomes are sampled from rng, or forced branch-by-branch
// when `forced` is given (branch_probability reports the forced weight).
UnitExecution run_cnot_unit(StateVector& reg, std::array<int, 2>& wire_qubits,
                            std::array<WireFrame, 2>& frames, const CnotPattern& pattern,
                            const CnotUnitInstance& inst, Rng* rng,
                            const std::array<int, 6>* forced = nullptr);

// Applies the control-output H correction in place (after cancelling the
// wire's pending diagonal), swapping the byproduct powers through H.
void apply_control_h_correction(StateVector& reg, int qubit, WireFrame& frame);

// Final Step-style output corrections for both wires: byproduct Paulis,
// diagonal cancellation, H on the control and R_z(-pi/2) on the target
// (the latter via the +pi/2 residue the unit leaves). Frames reset.
void correct_unit_outputs(StateVector& reg, const std::array<int, 2>& wire_qubits,
                          std::array<WireFrame, 2>& frames);

std::string pattern_to_json(const CnotPattern& pattern);

} // namespace hubqc
