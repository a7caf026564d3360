#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hubqc/cluster.hpp"
#include "hubqc/decomp.hpp"
#include "hubqc/mbqc.hpp"

namespace hubqc {

// ---------------------------------------------------------------------------
// Circuits

struct CircuitGate {
    enum class Kind { H, S, T, X, Y, Z, Rz, Cnot };
    Kind kind = Kind::H;
    int wire = 0;
    int rz_k = 0; // Rz angle as a multiple of pi/4
    int control = 0;
    int target = 0;

    static CircuitGate single(Kind kind, int wire) { return {kind, wire, 0, 0, 0}; }
    static CircuitGate rz(int wire, int k) { return {Kind::Rz, wire, k, 0, 0}; }
    static CircuitGate cnot(int control, int target) { return {Kind::Cnot, 0, 0, control, target}; }
};

struct CircuitDescription {
    int wires = 0;
    std::vector<CircuitGate> gates;

    std::string to_json() const;
    static CircuitDescription from_json(const std::string& text);

    // Direct gate-matrix product; the protocol-independent oracle.
    Matrix unitary() const;
};

// ---------------------------------------------------------------------------
// Plan

struct RotationStep {
    enum class Purpose { Gate, CorrectionH };
    int wire = 0;
    Axis axis = Axis::Z;
    GridAngle nu; // true angle, a member of the set S
    int pad = 0;
    Purpose purpose = Purpose::Gate;
};

// Cancels a wire's pending diagonal (preparation pad and absorbed residue)
// with one encrypted z-rotation; doubles as the R_z(-pi/2) output correction
// when the pending residue came from a CNOT target.
struct NormalizeStep {
    int wire = 0;
    int pad = 0;
    bool is_rz_correction = false;
};

struct CnotStep {
    int control = 0;
    int target = 0;
    int unit_index = 0;
    CnotUnitInstance inst;                       // effective preps (bridge flips folded) and pads
    std::array<GridAngle, 6> raw_preps;          // states actually sent in Step 1
    std::array<int, 2> shifts{};                 // absorbed kappa shifts per wire
    std::vector<std::pair<int, int>> bridges;    // (trap id, ancilla slot 0..5)
};

struct DecoyRotateStep {
    int trap = 0;       // trap index within the plan
    GridAngle xi;       // full grid angle, tracked into mu_eff
};

struct TrapMeasureStep {
    int trap = 0;
    GridAngle delta;    // mu_eff + pad*pi, fixed at compile time
};

using PlanStep = std::variant<RotationStep, NormalizeStep, CnotStep, DecoyRotateStep, TrapMeasureStep>;

struct TrapInfo {
    QubitRole role;
    int pad = 0;            // planar measurement pad
    GridAngle mu_eff;       // preparation angle plus decoy shifts
    int block = 0;
};

struct HybridPlan {
    int wires = 0;
    int num_units = 0;
    std::vector<PlanStep> steps;
    std::vector<TrapInfo> traps;
    std::vector<std::pair<int, int>> upfront_trap_edges; // trap-index pairs
    std::vector<std::pair<int, int>> input_bridges;      // (trap index, wire)
    std::vector<int> initial_frame_z;                    // per wire, from |1> bridges
    TrapChecks checks;                                   // pads folded in; ids are trap indices
    AxisOrder order = AxisOrder::ZYZ;
};

// ---------------------------------------------------------------------------
// Messages

struct Message {
    enum class Type { Prepare, Entangle, Rotate, Measure, MeasureResult, ReturnOutputs, Outputs, Verdict };
    Type type = Type::Prepare;
    // Prepare: opaque single-qubit amplitude pairs
    std::vector<std::array<double, 4>> states;
    // Entangle
    std::vector<std::pair<int, int>> pairs;
    // Rotate / Measure
    int qubit = 0;
    Axis axis = Axis::Z;
    GridAngle angle;
    // MeasureResult
    int outcome = 0;
    // ReturnOutputs / Outputs
    std::vector<int> qubits;
    std::vector<std::pair<std::vector<int>, std::vector<std::array<double, 2>>>> factors;
    // Verdict
    bool accept = false;
};

std::string message_to_json(const Message& msg);

struct TranscriptEntry {
    bool client_to_server = true;
    Message msg;
};

// ---------------------------------------------------------------------------
// Adversary

struct PauliAttack {
    int qubit = 0;
    int x = 0;
    int z = 0; // X, Z or XZ
};

struct AdversaryPolicy {
    std::vector<PauliAttack> attacks; // empty = honest

    bool honest() const { return attacks.empty(); }
    // "X@3,Z@7,XZ@2"
    static AdversaryPolicy parse(const std::string& spec);
    std::string to_string() const;
};

// ---------------------------------------------------------------------------
// Server

// Holds the simulated quantum side as a list of tensor factors; CZ against a
// computational-basis single-qubit factor reduces to a tracked Z, keeping
// trap qubits out of the main register.
class Server {
  public:
    Server(Rng rng, AdversaryPolicy adversary) : rng_(rng), adversary_(std::move(adversary)) {}

    Message handle(const Message& msg); // returns the reply (or an ack-free echo for one-way messages)

  private:
    struct Factor {
        std::vector<int> ids;
        StateVector state;
    };

    int find_factor(int id) const;
    void maybe_attack(int id);
    void entangle(int a, int b);
    int measure(int id, GridAngle delta);

    std::vector<Factor> factors_;
    Rng rng_;
    AdversaryPolicy adversary_;
    bool prepared_ = false;
};

// ---------------------------------------------------------------------------
// Operations

// xi = nu + r*pi; rejects true angles outside the set S.
GridAngle encrypt_rotation(GridAngle nu, int r);

// Pauli recorded on the wire when a padded rotation runs: X for the x axis,
// XZ for the y axis, Z for the z axis (phases dropped).
ByproductRecord decrypt_byproduct(Axis axis, int r);

HybridPlan compile_circuit(const CircuitDescription& circuit, AxisOrder order, int trap_count, Rng& rng);

// Step 1 message: every single-qubit state of the session in server-id
// order, as opaque amplitudes.
Message client_prepare(const HybridPlan& plan, const std::vector<int>& input_bits);

struct TrapOutcomeRow {
    int trap = 0;
    std::string kind;
    int observed = 0;
    bool checked = false;
    std::optional<int> expected;
};

struct Verdict {
    bool accept = false;
    bool unverified = false; // no traps configured
    std::vector<int> failed;
};

// Accept when at most max_failures checks deviate; zero tolerance is the
// conservative default.
Verdict client_verify(const std::map<int, int>& trap_results, const TrapChecks& checks, int max_failures = 0);

struct SessionConfig {
    AxisOrder order = AxisOrder::ZYZ;
    int trap_count = -1; // -1: one trap per computational qubit
    int trap_error_tolerance = 0;
    std::vector<int> input_bits;
};

struct SessionReport {
    std::uint64_t seed = 0;
    CircuitDescription circuit;
    AdversaryPolicy adversary;
    SessionConfig config;
    int trap_count = 0;
    std::vector<TranscriptEntry> transcript;
    Verdict verdict;
    std::vector<TrapOutcomeRow> trap_rows;
    std::vector<cplx> output_amplitudes; // client side, byproducts removed
    double fidelity_vs_direct = 0.0;

    std::string to_json() const;
};

SessionReport run_session(const CircuitDescription& circuit, const AdversaryPolicy& adversary, std::uint64_t seed,
                          const SessionConfig& config = {});

// Number of computational qubits a compiled session touches (wires plus six
// ancillas per CNOT unit); the default trap budget matches it.
int computational_qubit_count(const CircuitDescription& circuit);

} // namespace hubqc
