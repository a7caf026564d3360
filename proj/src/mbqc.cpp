#include "hubqc/mbqc.hpp"

#include <cmath>

#include <json.hpp>

#include "hubqc/gates.hpp"

namespace hubqc {

GridAngle adaptive_angle(const MeasurementCommand& cmd, const std::vector<int>& outcomes) {
    int sx = 0;
    for (int d : cmd.x_deps) {
        require(d >= 0 && d < static_cast<int>(outcomes.size()), "adaptive_angle: unresolved dependency");
        sx ^= outcomes[d] & 1;
    }
    int sz = 0;
    for (int d : cmd.z_deps) {
        require(d >= 0 && d < static_cast<int>(outcomes.size()), "adaptive_angle: unresolved dependency");
        sz ^= outcomes[d] & 1;
    }
    int k = (sx ? -cmd.omega.k() : cmd.omega.k()) + 4 * sz + cmd.kappa.k() + 4 * cmd.pad;
    return GridAngle(k);
}

namespace {

// Base template, quarter-pi units: between the unit's two CZ columns the
// control row passes through untouched (H H = I) while the target row picks
// up H P(-pi/2) H; the last column completes the identity
//   (Rz(pi/2) (x) Rx(pi/2)) CZ (I (x) Rx(-pi/2)) CZ = CNOT
// up to the H / R_z(-pi/2) output corrections.
constexpr int kKappa[6] = {0, 0, 0, 2, 6, 2}; // a1 a2 b1 b2 c1 c2
constexpr int kWireOf[6] = {0, 1, 0, 1, 0, 1};

CnotPattern build_template() {
    CnotPattern p;
    for (int i = 0; i < 6; ++i) {
        p.commands[i].slot = i;
        p.commands[i].wire = kWireOf[i];
        p.commands[i].kappa = GridAngle(kKappa[i]);
    }
    // outcome flow: the c measurements see the first-column outcome on
    // their own row and the middle outcome of the opposite row through the
    // second vertical link
    p.commands[4].z_deps = {0, 3};
    p.commands[5].z_deps = {1, 2};
    return p;
}

// Next qubit of a wire after measuring slot i: a -> b -> c -> out.
int next_ancilla_of_slot(int slot) {
    // ancilla order in the instance/register: b1 b2 c1 c2 o1 o2
    switch (slot) {
    case 0:
        return 0; // a1 -> b1
    case 1:
        return 1; // a2 -> b2
    case 2:
        return 2; // b1 -> c1
    case 3:
        return 3; // b2 -> c2
    case 4:
        return 4; // c1 -> o1
    case 5:
        return 5; // c2 -> o2
    }
    throw Error("next_ancilla_of_slot: bad slot");
}

void validate_pattern(const CnotPattern& pattern);

} // namespace

const CnotPattern& derive_cnot_pattern() {
    static const CnotPattern pattern = [] {
        CnotPattern p = build_template();
        validate_pattern(p);
        return p;
    }();
    return pattern;
}

CnotPattern absorb_correction(const CnotPattern& pattern, int wire) {
    require(wire == 0 || wire == 1, "absorb_correction: bad wire");
    CnotPattern out = pattern;
    out.kappa_shift[wire] += 2; // input command of that row (slots 0 and 1)
    return out;
}

CnotUnitInstance CnotUnitInstance::random(Rng& rng) {
    CnotUnitInstance inst;
    for (int i = 0; i < 6; ++i) {
        inst.preps[i] = GridAngle(static_cast<int>(rng.below(8)));
        inst.pads[i] = rng.bit();
    }
    return inst;
}

CnotUnitInstance CnotUnitInstance::bare() { return CnotUnitInstance{}; }

UnitCalculus::UnitCalculus(const CnotPattern& pattern, const CnotUnitInstance& inst, std::array<WireFrame, 2>& frames)
    : pattern_(pattern), inst_(inst), frames_(frames) {
    for (int w = 0; w < 2; ++w) {
        require(frames_[w].residue.k() == pattern_.kappa_shift[w] % 8,
                "UnitCalculus: pending residue does not match the absorbed shift");
    }
}

int UnitCalculus::wire_of_current() const {
    require(slot_ < 6, "UnitCalculus: unit already finished");
    return pattern_.commands[slot_].wire;
}

GridAngle UnitCalculus::next_delta() {
    require(slot_ < 6 && !delta_ready_, "UnitCalculus: outcome pending or unit finished");
    auto mix = [this] {
        int x0 = frames_[0].x;
        int x1 = frames_[1].x;
        frames_[0].z ^= x1;
        frames_[1].z ^= x0;
    };
    if (slot_ == 0) {
        mix(); // first-column CZ
    }
    if (slot_ == 4) {
        mix(); // third-column CZ, crossed after both middle measurements
    }
    MeasurementCommand cmd = pattern_.commands[slot_];
    cmd.omega = frames_[cmd.wire].prep;
    cmd.kappa = GridAngle(cmd.kappa.k() + pattern_.kappa_shift[slot_]);
    cmd.pad = inst_.pads[slot_];
    pending_delta_ = adaptive_angle(cmd, outcomes_);
    delta_ready_ = true;

    // residual half-turn between the sent basis and the intended gate;
    // anything other than a multiple of pi means the basis left the plane
    WireFrame& fr = frames_[cmd.wire];
    int v = ((fr.x ? -1 : 1) * (fr.prep.k() - pending_delta_.k()) + cmd.kappa.k()) % 8;
    v = (v + 8) % 8;
    require(v % 4 == 0, "UnitCalculus: measurement basis is off the intended plane");
    return pending_delta_;
}

void UnitCalculus::feed_outcome(int s) {
    require(delta_ready_, "UnitCalculus: no measurement in flight");
    WireFrame& fr = frames_[pattern_.commands[slot_].wire];
    int kappa = pattern_.commands[slot_].kappa.k() + pattern_.kappa_shift[slot_];
    int v = ((fr.x ? -1 : 1) * (fr.prep.k() - pending_delta_.k()) + kappa) % 8;
    v = (v + 8) % 8;
    int j = (v / 4) & 1;

    int new_x = (s & 1) ^ fr.z ^ j;
    fr.z = fr.x;
    fr.x = new_x;
    int next = next_ancilla_of_slot(slot_);
    fr.prep = inst_.preps[next];
    fr.residue = GridAngle(0);

    outcomes_.push_back(s & 1);
    delta_ready_ = false;
    ++slot_;
    if (slot_ == 6) {
        // the target output is one R_z(-pi/2) short of the CNOT completion
        frames_[1].residue = GridAngle(2);
    }
}

UnitExecution run_cnot_unit(StateVector& reg, std::array<int, 2>& wire_qubits, std::array<WireFrame, 2>& frames,
                            const CnotPattern& pattern, const CnotUnitInstance& inst, Rng* rng,
                            const std::array<int, 6>* forced) {
    require(rng != nullptr || forced != nullptr, "run_cnot_unit: needs an outcome source");

    int base = reg.num_qubits();
    for (int i = 0; i < 6; ++i) {
        reg.extend_with(StateVector::plus(inst.preps[i].radians()));
    }
    // register indices: wires at wire_qubits, ancillas b1 b2 c1 c2 o1 o2
    std::array<int, 6> anc = {base, base + 1, base + 2, base + 3, base + 4, base + 5};

    // unit edges: row chains plus the two vertical links
    reg.apply_cz(wire_qubits[0], wire_qubits[1]); // first column
    reg.apply_cz(wire_qubits[0], anc[0]);
    reg.apply_cz(anc[0], anc[2]);
    reg.apply_cz(anc[2], anc[4]);
    reg.apply_cz(wire_qubits[1], anc[1]);
    reg.apply_cz(anc[1], anc[3]);
    reg.apply_cz(anc[3], anc[5]);
    reg.apply_cz(anc[2], anc[3]); // third column

    UnitExecution exec;
    UnitCalculus calc(pattern, inst, frames);
    auto remove_index = [](std::array<int, 2>& wires, std::array<int, 6>& ancillas, int removed) {
        for (int& q : wires) {
            if (q > removed) {
                --q;
            }
        }
        for (int& q : ancillas) {
            if (q > removed) {
                --q;
            }
        }
    };

    for (int i = 0; i < 6; ++i) {
        int w = calc.wire_of_current();
        GridAngle delta = calc.next_delta();
        exec.deltas[i] = delta;

        int target = wire_qubits[w];
        int s;
        if (forced != nullptr) {
            s = (*forced)[i];
            double p = reg.project_planar(target, delta.radians(), s);
            exec.branch_probability *= p;
            if (p < 1e-12) {
                exec.branch_probability = 0.0;
                exec.outcomes[i] = s;
                return exec;
            }
        } else {
            s = reg.measure_planar(target, delta.radians(), *rng);
        }
        exec.outcomes[i] = s;
        calc.feed_outcome(s);

        remove_index(wire_qubits, anc, target);
        wire_qubits[w] = anc[next_ancilla_of_slot(i)];
    }
    return exec;
}

void apply_control_h_correction(StateVector& reg, int qubit, WireFrame& frame) {
    // The kill rotation is applied outside the pending Paulis, so its angle
    // picks up the (-1)^x sign when commuted down to the diagonal.
    GridAngle kill = GridAngle((frame.x ? 1 : -1) * frame.rho().k());
    if (kill.k() != 0) {
        reg.apply_single(qubit, gates::p(kill.radians()));
    }
    reg.apply_single(qubit, gates::h());
    std::swap(frame.x, frame.z);
    frame.prep = GridAngle(0);
    frame.residue = GridAngle(0);
}

void correct_unit_outputs(StateVector& reg, const std::array<int, 2>& wire_qubits, std::array<WireFrame, 2>& frames) {
    for (int w = 0; w < 2; ++w) {
        WireFrame& fr = frames[w];
        int q = wire_qubits[w];
        if (fr.x) {
            reg.apply_single(q, gates::x());
        }
        if (fr.z) {
            reg.apply_single(q, gates::z());
        }
        GridAngle rho = fr.rho();
        if (rho.k() != 0) {
            reg.apply_single(q, gates::p(-rho.radians()));
        }
        if (w == CnotPattern::kControlWire) {
            reg.apply_single(q, gates::h());
        }
        fr = WireFrame{};
    }
}

namespace {

void validate_pattern(const CnotPattern& pattern) {
    Rng rng(0xC0FFEE);
    Matrix cnot = gates::cnot();
    for (int trial = 0; trial < 24; ++trial) {
        StateVector input = [&] {
            if (trial < 4) {
                StateVector s = StateVector::basis1((trial >> 1) & 1);
                s.extend_with(StateVector::basis1(trial & 1));
                return s;
            }
            std::vector<cplx> amps(4);
            double norm = 0.0;
            for (auto& a : amps) {
                a = cplx(rng.uniform() - 0.5, rng.uniform() - 0.5);
                norm += std::norm(a);
            }
            for (auto& a : amps) {
                a /= std::sqrt(norm);
            }
            return StateVector::from_amplitudes(std::move(amps));
        }();

        StateVector reg = input;
        std::array<int, 2> wires = {0, 1};
        std::array<WireFrame, 2> frames{};
        CnotUnitInstance inst = trial == 0 ? CnotUnitInstance::bare() : CnotUnitInstance::random(rng);
        run_cnot_unit(reg, wires, frames, pattern, inst, &rng);
        correct_unit_outputs(reg, wires, frames);

        StateVector expect = input;
        expect.apply_two(0, 1, cnot);
        require(fidelity(reg, expect) >= 1.0 - kTolFidelity,
                "derive_cnot_pattern: template failed its CNOT simulation gate");
    }
}

} // namespace

std::string pattern_to_json(const CnotPattern& pattern) {
    nlohmann::json j;
    j["order"] = {"a1", "a2", "b1", "b2", "c1", "c2"};
    nlohmann::json cmds = nlohmann::json::array();
    for (int i = 0; i < 6; ++i) {
        const MeasurementCommand& c = pattern.commands[i];
        nlohmann::json jc;
        jc["slot"] = c.slot;
        jc["wire"] = c.wire;
        jc["kappa_k"] = c.kappa.k();
        jc["kappa_shift_k"] = pattern.kappa_shift[i];
        jc["x_deps"] = c.x_deps;
        jc["z_deps"] = c.z_deps;
        cmds.push_back(jc);
    }
    j["commands"] = cmds;
    j["output_corrections"] = {{"control", "H"}, {"target", "Rz(-pi/2)"}};
    return j.dump();
}

} // namespace hubqc
