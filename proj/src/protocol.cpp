#include "hubqc/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

namespace hubqc {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Circuits

namespace {

const char* gate_name(CircuitGate::Kind kind) {
    switch (kind) {
    case CircuitGate::Kind::H:
        return "H";
    case CircuitGate::Kind::S:
        return "S";
    case CircuitGate::Kind::T:
        return "T";
    case CircuitGate::Kind::X:
        return "X";
    case CircuitGate::Kind::Y:
        return "Y";
    case CircuitGate::Kind::Z:
        return "Z";
    case CircuitGate::Kind::Rz:
        return "RZ";
    case CircuitGate::Kind::Cnot:
        return "CNOT";
    }
    return "?";
}

Matrix embed_single(const Matrix& g, int wire, int wires) {
    Matrix full = Matrix::identity(1);
    for (int w = 0; w < wires; ++w) {
        full = full.kron(w == wire ? g : Matrix::identity(2));
    }
    return full;
}

Matrix embed_cnot(int control, int target, int wires) {
    std::size_t dim = std::size_t(1) << wires;
    std::size_t cb = std::size_t(1) << (wires - 1 - control);
    std::size_t tb = std::size_t(1) << (wires - 1 - target);
    Matrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        std::size_t jj = (i & cb) ? (i ^ tb) : i;
        m(jj, i) = 1.0;
    }
    return m;
}

} // namespace

std::string CircuitDescription::to_json() const {
    json j;
    j["wires"] = wires;
    json gs = json::array();
    for (const CircuitGate& g : gates) {
        json jg;
        jg["g"] = gate_name(g.kind);
        if (g.kind == CircuitGate::Kind::Cnot) {
            jg["c"] = g.control;
            jg["t"] = g.target;
        } else {
            jg["w"] = g.wire;
            if (g.kind == CircuitGate::Kind::Rz) {
                jg["k"] = g.rz_k;
            }
        }
        gs.push_back(jg);
    }
    j["gates"] = gs;
    return j.dump();
}

CircuitDescription CircuitDescription::from_json(const std::string& text) {
    json j = json::parse(text);
    CircuitDescription c;
    c.wires = j.at("wires").get<int>();
    require(c.wires >= 1, "circuit: needs at least one wire");
    for (const auto& jg : j.at("gates")) {
        std::string name = jg.at("g").get<std::string>();
        CircuitGate g;
        if (name == "CNOT") {
            g = CircuitGate::cnot(jg.at("c").get<int>(), jg.at("t").get<int>());
            require(g.control != g.target, "circuit: CNOT control equals target");
            require(g.control >= 0 && g.control < c.wires && g.target >= 0 && g.target < c.wires,
                    "circuit: CNOT wire out of range");
        } else {
            int wire = jg.at("w").get<int>();
            require(wire >= 0 && wire < c.wires, "circuit: wire out of range");
            if (name == "RZ") {
                g = CircuitGate::rz(wire, jg.at("k").get<int>());
            } else if (name == "H") {
                g = CircuitGate::single(CircuitGate::Kind::H, wire);
            } else if (name == "S") {
                g = CircuitGate::single(CircuitGate::Kind::S, wire);
            } else if (name == "T") {
                g = CircuitGate::single(CircuitGate::Kind::T, wire);
            } else if (name == "X") {
                g = CircuitGate::single(CircuitGate::Kind::X, wire);
            } else if (name == "Y") {
                g = CircuitGate::single(CircuitGate::Kind::Y, wire);
            } else if (name == "Z") {
                g = CircuitGate::single(CircuitGate::Kind::Z, wire);
            } else {
                throw Error("circuit: unsupported gate " + name);
            }
        }
        c.gates.push_back(g);
    }
    return c;
}

Matrix CircuitDescription::unitary() const {
    require(wires >= 1 && wires <= 10, "circuit unitary: wire count outside oracle range");
    Matrix u = Matrix::identity(std::size_t(1) << wires);
    for (const CircuitGate& g : gates) {
        Matrix step = Matrix::identity(u.dim());
        switch (g.kind) {
        case CircuitGate::Kind::H:
            step = embed_single(gates::h(), g.wire, wires);
            break;
        case CircuitGate::Kind::S:
            step = embed_single(gates::s(), g.wire, wires);
            break;
        case CircuitGate::Kind::T:
            step = embed_single(gates::t(), g.wire, wires);
            break;
        case CircuitGate::Kind::X:
            step = embed_single(gates::x(), g.wire, wires);
            break;
        case CircuitGate::Kind::Y:
            step = embed_single(gates::y(), g.wire, wires);
            break;
        case CircuitGate::Kind::Z:
            step = embed_single(gates::z(), g.wire, wires);
            break;
        case CircuitGate::Kind::Rz:
            step = embed_single(rotation(Axis::Z, g.rz_k * kPi / 4.0), g.wire, wires);
            break;
        case CircuitGate::Kind::Cnot:
            step = embed_cnot(g.control, g.target, wires);
            break;
        }
        u = step * u;
    }
    return u;
}

int computational_qubit_count(const CircuitDescription& circuit) {
    int units = 0;
    for (const CircuitGate& g : circuit.gates) {
        if (g.kind == CircuitGate::Kind::Cnot) {
            ++units;
        }
    }
    return circuit.wires + 6 * units;
}

// ---------------------------------------------------------------------------
// Messages

namespace {

const char* axis_name(Axis a) { return a == Axis::X ? "x" : (a == Axis::Y ? "y" : "z"); }

} // namespace

std::string message_to_json(const Message& msg) {
    json j;
    switch (msg.type) {
    case Message::Type::Prepare: {
        j["type"] = "prepare";
        json states = json::array();
        for (const auto& s : msg.states) {
            states.push_back({s[0], s[1], s[2], s[3]});
        }
        j["states"] = states;
        break;
    }
    case Message::Type::Entangle: {
        j["type"] = "entangle";
        json pairs = json::array();
        for (const auto& [a, b] : msg.pairs) {
            pairs.push_back({a, b});
        }
        j["pairs"] = pairs;
        break;
    }
    case Message::Type::Rotate:
        j["type"] = "rotate";
        j["q"] = msg.qubit;
        j["axis"] = axis_name(msg.axis);
        j["xi_k"] = msg.angle.k();
        break;
    case Message::Type::Measure:
        j["type"] = "measure";
        j["q"] = msg.qubit;
        j["delta_k"] = msg.angle.k();
        break;
    case Message::Type::MeasureResult:
        j["type"] = "result";
        j["s"] = msg.outcome;
        break;
    case Message::Type::ReturnOutputs:
        j["type"] = "return_outputs";
        j["qubits"] = msg.qubits;
        break;
    case Message::Type::Outputs: {
        j["type"] = "outputs";
        json factors = json::array();
        for (const auto& [ids, amps] : msg.factors) {
            json f;
            f["qubits"] = ids;
            json ja = json::array();
            for (const auto& a : amps) {
                ja.push_back({a[0], a[1]});
            }
            f["amps"] = ja;
            factors.push_back(f);
        }
        j["factors"] = factors;
        break;
    }
    case Message::Type::Verdict:
        j["type"] = "verdict";
        j["accept"] = msg.accept;
        break;
    }
    return j.dump();
}

// ---------------------------------------------------------------------------
// Adversary

AdversaryPolicy AdversaryPolicy::parse(const std::string& spec) {
    AdversaryPolicy policy;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) {
            continue;
        }
        auto at = item.find('@');
        require(at != std::string::npos, "adversary: expected PAULI@qubit, got " + item);
        std::string pauli = item.substr(0, at);
        int qubit = std::stoi(item.substr(at + 1));
        PauliAttack attack;
        attack.qubit = qubit;
        if (pauli == "X") {
            attack.x = 1;
        } else if (pauli == "Z") {
            attack.z = 1;
        } else if (pauli == "XZ" || pauli == "ZX") {
            attack.x = attack.z = 1;
        } else {
            throw Error("adversary: unknown Pauli " + pauli);
        }
        policy.attacks.push_back(attack);
    }
    return policy;
}

std::string AdversaryPolicy::to_string() const {
    if (honest()) {
        return "honest";
    }
    std::string out;
    for (const PauliAttack& a : attacks) {
        if (!out.empty()) {
            out += ",";
        }
        out += a.x && a.z ? "XZ" : (a.x ? "X" : "Z");
        out += "@" + std::to_string(a.qubit);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Server

int Server::find_factor(int id) const {
    for (int f = 0; f < static_cast<int>(factors_.size()); ++f) {
        for (int q : factors_[f].ids) {
            if (q == id) {
                return f;
            }
        }
    }
    throw Error("server: unknown or already consumed qubit " + std::to_string(id));
}

void Server::maybe_attack(int id) {
    for (const PauliAttack& a : adversary_.attacks) {
        if (a.qubit != id) {
            continue;
        }
        Factor& f = factors_[find_factor(id)];
        int local = static_cast<int>(std::find(f.ids.begin(), f.ids.end(), id) - f.ids.begin());
        if (a.x) {
            f.state.apply_single(local, gates::x());
        }
        if (a.z) {
            f.state.apply_single(local, gates::z());
        }
    }
}

namespace {

// 0 or 1 when the single-qubit factor is exactly a computational basis
// state, -1 otherwise.
int z_basis_value(const StateVector& s) {
    if (s.num_qubits() != 1) {
        return -1;
    }
    if (std::norm(s.amplitude(1)) < 1e-24) {
        return 0;
    }
    if (std::norm(s.amplitude(0)) < 1e-24) {
        return 1;
    }
    return -1;
}

} // namespace

void Server::entangle(int a, int b) {
    require(a != b, "server: CZ needs two distinct qubits");
    int fa = find_factor(a);
    int fb = find_factor(b);
    if (fa == fb) {
        Factor& f = factors_[fa];
        int la = static_cast<int>(std::find(f.ids.begin(), f.ids.end(), a) - f.ids.begin());
        int lb = static_cast<int>(std::find(f.ids.begin(), f.ids.end(), b) - f.ids.begin());
        f.state.apply_cz(la, lb);
        return;
    }
    // CZ against a computational-basis qubit never entangles; apply the
    // conditional Z directly and keep the factors separate.
    int va = z_basis_value(factors_[fa].state);
    int vb = z_basis_value(factors_[fb].state);
    if (va >= 0 && vb >= 0) {
        return; // global phase only
    }
    if (va >= 0 || vb >= 0) {
        if ((va >= 0 ? va : vb) == 1) {
            int other = va >= 0 ? fb : fa;
            int other_id = va >= 0 ? b : a;
            Factor& f = factors_[other];
            int local = static_cast<int>(std::find(f.ids.begin(), f.ids.end(), other_id) - f.ids.begin());
            f.state.apply_single(local, gates::z());
        }
        return;
    }
    Factor merged;
    merged.ids = factors_[fa].ids;
    merged.state = factors_[fa].state;
    merged.state.extend_with(factors_[fb].state);
    merged.ids.insert(merged.ids.end(), factors_[fb].ids.begin(), factors_[fb].ids.end());
    factors_.erase(factors_.begin() + std::max(fa, fb));
    factors_.erase(factors_.begin() + std::min(fa, fb));
    int la = static_cast<int>(std::find(merged.ids.begin(), merged.ids.end(), a) - merged.ids.begin());
    int lb = static_cast<int>(std::find(merged.ids.begin(), merged.ids.end(), b) - merged.ids.begin());
    merged.state.apply_cz(la, lb);
    factors_.push_back(std::move(merged));
}

int Server::measure(int id, GridAngle delta) {
    maybe_attack(id);
    int fi = find_factor(id);
    Factor& f = factors_[fi];
    int local = static_cast<int>(std::find(f.ids.begin(), f.ids.end(), id) - f.ids.begin());
    int outcome = f.state.measure_planar(local, delta.radians(), rng_);
    f.ids.erase(f.ids.begin() + local);
    if (f.ids.empty()) {
        factors_.erase(factors_.begin() + fi);
    }
    return outcome;
}

Message Server::handle(const Message& msg) {
    Message reply;
    reply.type = Message::Type::MeasureResult;
    reply.outcome = 0;
    switch (msg.type) {
    case Message::Type::Prepare: {
        require(!prepared_, "server: duplicate prepare");
        prepared_ = true;
        int id = 0;
        for (const auto& s : msg.states) {
            Factor f;
            f.ids = {id++};
            f.state = StateVector::from_amplitudes({cplx(s[0], s[1]), cplx(s[2], s[3])});
            factors_.push_back(std::move(f));
        }
        return reply;
    }
    case Message::Type::Entangle:
        require(prepared_, "server: entangle before prepare");
        for (const auto& [a, b] : msg.pairs) {
            entangle(a, b);
        }
        return reply;
    case Message::Type::Rotate: {
        Factor& f = factors_[find_factor(msg.qubit)];
        int local = static_cast<int>(std::find(f.ids.begin(), f.ids.end(), msg.qubit) - f.ids.begin());
        f.state.apply_single(local, rotation(msg.axis, msg.angle.radians()));
        return reply;
    }
    case Message::Type::Measure:
        reply.outcome = measure(msg.qubit, msg.angle);
        return reply;
    case Message::Type::ReturnOutputs: {
        reply.type = Message::Type::Outputs;
        for (int id : msg.qubits) {
            maybe_attack(id);
        }
        std::vector<int> seen;
        for (int id : msg.qubits) {
            if (std::find(seen.begin(), seen.end(), id) != seen.end()) {
                continue;
            }
            const Factor& f = factors_[find_factor(id)];
            for (int q : f.ids) {
                require(std::find(msg.qubits.begin(), msg.qubits.end(), q) != msg.qubits.end(),
                        "server: requested outputs still entangled with unreturned qubits");
                seen.push_back(q);
            }
            std::vector<std::array<double, 2>> amps;
            for (const cplx& a : f.state.amplitudes()) {
                amps.push_back({a.real(), a.imag()});
            }
            reply.factors.emplace_back(f.ids, std::move(amps));
        }
        return reply;
    }
    case Message::Type::Verdict:
        return reply;
    default:
        throw Error("server: unexpected message");
    }
}

// ---------------------------------------------------------------------------
// Operations

GridAngle encrypt_rotation(GridAngle nu, int r) {
    require(in_angle_set_s(nu), "encrypt_rotation: true angle outside the set S");
    GridAngle xi = nu.padded(r & 1);
    require(in_angle_set_s(xi), "encrypt_rotation: pad left the set S");
    return xi;
}

ByproductRecord decrypt_byproduct(Axis axis, int r) {
    if (!(r & 1)) {
        return {0, 0};
    }
    switch (axis) {
    case Axis::X:
        return {1, 0};
    case Axis::Y:
        return {1, 1};
    case Axis::Z:
        return {0, 1};
    }
    throw Error("decrypt_byproduct: bad axis");
}

// ---------------------------------------------------------------------------
// Compilation

namespace {

struct StaticWire {
    bool prepped = false; // sitting on an |+_omega> prepared qubit
    int residue = 0;      // pending diagonal, quarter-pi units
};

void emit_normalize_if_needed(std::vector<PlanStep>& steps, std::vector<StaticWire>& wires, int w, Rng& rng) {
    if (wires[w].prepped || wires[w].residue != 0) {
        NormalizeStep n;
        n.wire = w;
        n.pad = rng.bit();
        n.is_rz_correction = wires[w].residue != 0;
        steps.push_back(n);
        wires[w].prepped = false;
        wires[w].residue = 0;
    }
}

void emit_rotation(std::vector<PlanStep>& steps, std::vector<StaticWire>& wires, int w, Axis axis, GridAngle nu,
                   Rng& rng, RotationStep::Purpose purpose) {
    if (axis != Axis::Z) {
        emit_normalize_if_needed(steps, wires, w, rng);
    }
    RotationStep r;
    r.wire = w;
    r.axis = axis;
    r.nu = nu;
    r.pad = rng.bit();
    r.purpose = purpose;
    encrypt_rotation(nu, r.pad); // plan-level S membership
    steps.push_back(r);
}

void emit_single_gate(std::vector<PlanStep>& steps, std::vector<StaticWire>& wires, const CircuitGate& g,
                      AxisOrder order, Rng& rng) {
    if (g.kind == CircuitGate::Kind::Rz) {
        int k = ((g.rz_k % 8) + 8) % 8;
        if (k == 0) {
            return;
        }
        if (in_angle_set_s(GridAngle(k))) {
            emit_rotation(steps, wires, g.wire, Axis::Z, GridAngle(k), rng, RotationStep::Purpose::Gate);
        } else {
            // 3pi/4 and 7pi/4 split into two members of S by angle additivity
            emit_rotation(steps, wires, g.wire, Axis::Z, GridAngle(1), rng, RotationStep::Purpose::Gate);
            emit_rotation(steps, wires, g.wire, Axis::Z, GridAngle(k - 1), rng, RotationStep::Purpose::Gate);
        }
        return;
    }
    GateName name;
    switch (g.kind) {
    case CircuitGate::Kind::H:
        name = GateName::H;
        break;
    case CircuitGate::Kind::S:
        name = GateName::S;
        break;
    case CircuitGate::Kind::T:
        name = GateName::T;
        break;
    case CircuitGate::Kind::X:
        name = GateName::X;
        break;
    case CircuitGate::Kind::Y:
        name = GateName::Y;
        break;
    case CircuitGate::Kind::Z:
        name = GateName::Z;
        break;
    default:
        throw Error("compile: unsupported gate");
    }
    DecompParams p = decomp_table(name, order);
    auto axes = axes_of(order);
    // rightmost factor acts first
    const std::pair<Axis, int> factors[3] = {
        {axes[2], p.gamma_quarters}, {axes[1], p.beta_quarters}, {axes[0], p.alpha_quarters}};
    for (const auto& [axis, quarters] : factors) {
        if (((quarters % 8) + 8) % 8 != 0) {
            emit_rotation(steps, wires, g.wire, axis, GridAngle(quarters), rng, RotationStep::Purpose::Gate);
        }
    }
}

// The H output correction compiled to its z-x-z rotation chain; the leading
// normalize removes the output qubit's preparation pad first.
void emit_h_correction(std::vector<PlanStep>& steps, std::vector<StaticWire>& wires, int w, Rng& rng) {
    emit_normalize_if_needed(steps, wires, w, rng);
    for (Axis axis : {Axis::Z, Axis::X, Axis::Z}) {
        emit_rotation(steps, wires, w, axis, GridAngle(2), rng, RotationStep::Purpose::CorrectionH);
    }
}

struct TrapBlock {
    std::vector<QubitRole> roles;
    std::vector<std::pair<int, int>> inner; // local indices
    std::vector<int> bridge_locals;         // local TrapZ indices carrying a bridge
    int attach_unit = -1;                   // latest unit among bridges, -1 = inputs only
};

} // namespace

HybridPlan compile_circuit(const CircuitDescription& circuit, AxisOrder order, int trap_count, Rng& rng) {
    require(circuit.wires >= 1, "compile: empty circuit");
    HybridPlan plan;
    plan.wires = circuit.wires;
    plan.order = order;
    plan.initial_frame_z.assign(circuit.wires, 0);

    std::vector<StaticWire> wires(circuit.wires);
    std::vector<PlanStep> steps;
    std::vector<int> unit_end_step;

    for (const CircuitGate& g : circuit.gates) {
        if (g.kind != CircuitGate::Kind::Cnot) {
            emit_single_gate(steps, wires, g, order, rng);
            continue;
        }
        CnotStep step;
        step.control = g.control;
        step.target = g.target;
        step.unit_index = plan.num_units++;
        step.shifts = {wires[g.control].residue, wires[g.target].residue};
        for (int i = 0; i < 6; ++i) {
            step.inst.preps[i] = GridAngle(static_cast<int>(rng.below(8)));
            step.inst.pads[i] = rng.bit();
        }
        step.raw_preps = step.inst.preps;
        wires[g.control].residue = 0;
        wires[g.target].residue = 0;
        steps.push_back(step);
        // outputs land on freshly prepared qubits; the target owes R_z(-pi/2)
        wires[g.control].prepped = true;
        wires[g.target].prepped = true;
        wires[g.target].residue = 2;
        emit_h_correction(steps, wires, g.control, rng);
        unit_end_step.push_back(static_cast<int>(steps.size()));
    }
    for (int w = 0; w < circuit.wires; ++w) {
        emit_normalize_if_needed(steps, wires, w, rng);
    }

    // --- trap decorations -------------------------------------------------
    std::vector<TrapBlock> blocks;
    int remaining = trap_count;
    require(remaining >= 0, "compile: negative trap count");
    while (remaining > 0) {
        int traps;
        if (remaining >= 5 && rng.below(3) == 0) {
            traps = 5;
        } else if (remaining >= 3 && rng.below(2) == 0) {
            traps = 3;
        } else {
            traps = 1;
        }
        TrapBlock block;
        if (traps == 1) {
            block.roles = {QubitRole::trap_z(rng.bit())};
            block.bridge_locals = {0};
        } else {
            int planars = traps == 3 ? 1 : 3;
            block.roles.push_back(QubitRole::trap_z(rng.bit()));
            for (int i = 0; i < planars; ++i) {
                block.roles.push_back(QubitRole::trap_planar(GridAngle(static_cast<int>(rng.below(8)))));
                block.inner.emplace_back(i, i + 1);
            }
            block.roles.push_back(QubitRole::trap_z(rng.bit()));
            block.inner.emplace_back(planars, planars + 1);
            block.bridge_locals = {0, planars + 1};
        }
        blocks.push_back(std::move(block));
        remaining -= traps;
    }

    int trap_base = 0;
    std::vector<std::vector<std::pair<int, int>>> unit_bridges(plan.num_units);
    std::vector<int> block_first_trap;
    for (TrapBlock& block : blocks) {
        block_first_trap.push_back(trap_base);
        for (const QubitRole& role : block.roles) {
            TrapInfo info;
            info.role = role;
            info.block = static_cast<int>(block_first_trap.size()) - 1;
            if (role.kind == QubitRole::Kind::TrapPlanar) {
                info.pad = rng.bit();
                info.mu_eff = role.angle;
            }
            plan.traps.push_back(info);
        }
        for (const auto& [a, b] : block.inner) {
            plan.upfront_trap_edges.emplace_back(trap_base + a, trap_base + b);
        }
        for (int local : block.bridge_locals) {
            int trap_idx = trap_base + local;
            int bit = block.roles[local].bit;
            int options = circuit.wires + 6 * plan.num_units;
            int pick = static_cast<int>(rng.below(options));
            if (pick < circuit.wires) {
                plan.input_bridges.emplace_back(trap_idx, pick);
                plan.initial_frame_z[pick] ^= bit;
            } else {
                int unit = (pick - circuit.wires) / 6;
                int slot = (pick - circuit.wires) % 6;
                unit_bridges[unit].emplace_back(trap_idx, slot);
                block.attach_unit = std::max(block.attach_unit, unit);
            }
        }
        trap_base += static_cast<int>(block.roles.size());
    }

    // fold |1> bridge flips into the affected preparation angles
    for (PlanStep& s : steps) {
        if (auto* cs = std::get_if<CnotStep>(&s)) {
            for (const auto& [trap_idx, slot] : unit_bridges[cs->unit_index]) {
                cs->bridges.emplace_back(trap_idx, slot);
                if (plan.traps[trap_idx].role.bit) {
                    cs->inst.preps[slot] = cs->inst.preps[slot] + GridAngle::pi();
                }
            }
        }
    }

    // decoy rotations and trap measurements, scheduled once a block is
    // fully attached
    std::vector<std::vector<PlanStep>> at_unit(plan.num_units);
    std::vector<PlanStep> at_end;
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
        std::vector<PlanStep>& dest = blocks[bi].attach_unit >= 0 ? at_unit[blocks[bi].attach_unit] : at_end;
        for (int local = 0; local < static_cast<int>(blocks[bi].roles.size()); ++local) {
            int trap_idx = block_first_trap[bi] + local;
            TrapInfo& info = plan.traps[trap_idx];
            if (info.role.kind != QubitRole::Kind::TrapPlanar) {
                continue;
            }
            if (rng.bit()) {
                DecoyRotateStep decoy;
                decoy.trap = trap_idx;
                decoy.xi = GridAngle(static_cast<int>(rng.below(8)));
                info.mu_eff = info.mu_eff + decoy.xi;
                dest.push_back(decoy);
            }
            TrapMeasureStep tm;
            tm.trap = trap_idx;
            tm.delta = info.mu_eff.padded(info.pad);
            dest.push_back(tm);
        }
    }

    std::vector<PlanStep> final_steps;
    int unit_seen = 0;
    for (int i = 0; i < static_cast<int>(steps.size()); ++i) {
        final_steps.push_back(steps[i]);
        if (unit_seen < plan.num_units && i + 1 == unit_end_step[unit_seen]) {
            for (PlanStep& s : at_unit[unit_seen]) {
                final_steps.push_back(std::move(s));
            }
            ++unit_seen;
        }
    }
    for (PlanStep& s : at_end) {
        final_steps.push_back(std::move(s));
    }
    plan.steps = std::move(final_steps);

    // --- expectation structure over trap indices --------------------------
    for (int t = 0; t < static_cast<int>(plan.traps.size()); ++t) {
        if (plan.traps[t].role.kind == QubitRole::Kind::TrapZ) {
            plan.checks.expected_bits[t] = plan.traps[t].role.bit;
        }
    }
    std::vector<TrapComponent> comps;
    {
        int n = static_cast<int>(plan.traps.size());
        std::vector<int> comp_of(n, -1);
        for (int start = 0; start < n; ++start) {
            if (plan.traps[start].role.kind != QubitRole::Kind::TrapPlanar || comp_of[start] != -1) {
                continue;
            }
            TrapComponent comp;
            std::vector<int> stack = {start};
            comp_of[start] = 1;
            while (!stack.empty()) {
                int q = stack.back();
                stack.pop_back();
                comp.planar_ids.push_back(q);
                for (const auto& [a, b] : plan.upfront_trap_edges) {
                    int other = a == q ? b : (b == q ? a : -1);
                    if (other >= 0 && plan.traps[other].role.kind == QubitRole::Kind::TrapPlanar &&
                        comp_of[other] == -1) {
                        comp_of[other] = 1;
                        stack.push_back(other);
                    }
                }
            }
            std::sort(comp.planar_ids.begin(), comp.planar_ids.end());
            for (int q : comp.planar_ids) {
                int flips = 0;
                for (const auto& [a, b] : plan.upfront_trap_edges) {
                    int other = a == q ? b : (b == q ? a : -1);
                    if (other >= 0 && plan.traps[other].role.kind == QubitRole::Kind::TrapZ) {
                        flips ^= plan.traps[other].role.bit;
                    }
                }
                comp.z_flips.push_back(flips);
            }
            for (std::size_t i = 0; i < comp.planar_ids.size(); ++i) {
                for (std::size_t jj = i + 1; jj < comp.planar_ids.size(); ++jj) {
                    for (const auto& [a, b] : plan.upfront_trap_edges) {
                        if ((a == comp.planar_ids[i] && b == comp.planar_ids[jj]) ||
                            (b == comp.planar_ids[i] && a == comp.planar_ids[jj])) {
                            comp.internal_edges.emplace_back(static_cast<int>(i), static_cast<int>(jj));
                        }
                    }
                }
            }
            comps.push_back(std::move(comp));
        }
    }
    for (const TrapComponent& comp : comps) {
        std::vector<GridAngle> mus;
        for (int t : comp.planar_ids) {
            mus.push_back(plan.traps[t].mu_eff);
        }
        auto branches = enumerate_planar_branches(mus, comp.z_flips, comp.internal_edges);
        int k = static_cast<int>(comp.planar_ids.size());
        auto pad = [&](int t) { return plan.traps[t].pad; };
        std::vector<bool> deterministic(k, true);
        std::vector<int> value(k);
        for (int i = 0; i < k; ++i) {
            value[i] = branches.front().second[i];
            for (const auto& [p, bits] : branches) {
                if (bits[i] != value[i]) {
                    deterministic[i] = false;
                }
            }
        }
        std::vector<bool> covered(k, false);
        for (int i = 0; i < k; ++i) {
            if (deterministic[i]) {
                plan.checks.expected_bits[comp.planar_ids[i]] = value[i] ^ pad(comp.planar_ids[i]);
                covered[i] = true;
            }
        }
        for (int i = 0; i < k; ++i) {
            for (int jj = i + 1; jj < k; ++jj) {
                if (deterministic[i] || deterministic[jj]) {
                    continue;
                }
                int parity = branches.front().second[i] ^ branches.front().second[jj];
                bool fixed = true;
                for (const auto& [p, bits] : branches) {
                    if ((bits[i] ^ bits[jj]) != parity) {
                        fixed = false;
                    }
                }
                if (fixed) {
                    plan.checks.parities.push_back({comp.planar_ids[i], comp.planar_ids[jj],
                                                    parity ^ pad(comp.planar_ids[i]) ^ pad(comp.planar_ids[jj])});
                    covered[i] = covered[jj] = true;
                }
            }
        }
        for (int i = 0; i < k; ++i) {
            if (!covered[i]) {
                plan.checks.unchecked.push_back(comp.planar_ids[i]);
            }
        }
    }
    return plan;
}

// ---------------------------------------------------------------------------
// Client-side session driver

namespace {

std::array<double, 4> state_descriptor(const StateVector& s) {
    return {s.amplitude(0).real(), s.amplitude(0).imag(), s.amplitude(1).real(), s.amplitude(1).imag()};
}

int flip_bit(const WireFrame& fr, Axis axis) {
    switch (axis) {
    case Axis::Z:
        return fr.x;
    case Axis::X:
        return fr.z;
    case Axis::Y:
        return fr.x ^ fr.z;
    }
    return 0;
}

// New position p holds the qubit previously at perm[p].
StateVector reorder_qubits(const StateVector& s, const std::vector<int>& perm) {
    int n = s.num_qubits();
    std::vector<cplx> amps(s.dim());
    for (std::size_t idx = 0; idx < s.dim(); ++idx) {
        std::size_t src = 0;
        for (int p = 0; p < n; ++p) {
            if ((idx >> (n - 1 - p)) & 1) {
                src |= std::size_t(1) << (n - 1 - perm[p]);
            }
        }
        amps[idx] = s.amplitude(src);
    }
    return StateVector::from_amplitudes(std::move(amps));
}

} // namespace

Message client_prepare(const HybridPlan& plan, const std::vector<int>& input_bits) {
    Message msg;
    msg.type = Message::Type::Prepare;
    for (int w = 0; w < plan.wires; ++w) {
        int bit = w < static_cast<int>(input_bits.size()) ? input_bits[w] : 0;
        msg.states.push_back(state_descriptor(StateVector::basis1(bit)));
    }
    std::vector<const CnotStep*> units(plan.num_units, nullptr);
    for (const PlanStep& s : plan.steps) {
        if (const auto* cs = std::get_if<CnotStep>(&s)) {
            units[cs->unit_index] = cs;
        }
    }
    for (const CnotStep* cs : units) {
        require(cs != nullptr, "client_prepare: missing unit step");
        for (int i = 0; i < 6; ++i) {
            msg.states.push_back(state_descriptor(StateVector::plus(cs->raw_preps[i].radians())));
        }
    }
    for (const TrapInfo& info : plan.traps) {
        if (info.role.kind == QubitRole::Kind::TrapZ) {
            msg.states.push_back(state_descriptor(StateVector::basis1(info.role.bit)));
        } else {
            msg.states.push_back(state_descriptor(StateVector::plus(info.role.angle.radians())));
        }
    }
    return msg;
}

Verdict client_verify(const std::map<int, int>& trap_results, const TrapChecks& checks, int max_failures) {
    Verdict v;
    v.unverified = checks.expected_bits.empty() && checks.parities.empty();
    int failures = 0;
    for (const auto& [trap, expected] : checks.expected_bits) {
        auto it = trap_results.find(trap);
        if (it == trap_results.end() || it->second != expected) {
            ++failures;
            v.failed.push_back(trap);
        }
    }
    for (const auto& par : checks.parities) {
        auto ia = trap_results.find(par[0]);
        auto ib = trap_results.find(par[1]);
        if (ia == trap_results.end() || ib == trap_results.end() || ((ia->second ^ ib->second) != par[2])) {
            ++failures;
            v.failed.push_back(par[0]);
            v.failed.push_back(par[1]);
        }
    }
    v.accept = failures <= max_failures;
    std::sort(v.failed.begin(), v.failed.end());
    v.failed.erase(std::unique(v.failed.begin(), v.failed.end()), v.failed.end());
    return v;
}

SessionReport run_session(const CircuitDescription& circuit, const AdversaryPolicy& adversary, std::uint64_t seed,
                          const SessionConfig& config) {
    SessionReport report;
    report.seed = seed;
    report.circuit = circuit;
    report.adversary = adversary;
    report.config = config;

    Rng master(seed);
    Rng rng_compile = master.split(1);
    Rng rng_server = master.split(2);

    int trap_count = config.trap_count >= 0 ? config.trap_count : computational_qubit_count(circuit);
    report.trap_count = trap_count;
    HybridPlan plan = compile_circuit(circuit, config.order, trap_count, rng_compile);

    int total_qubits = computational_qubit_count(circuit) + static_cast<int>(plan.traps.size());
    for (const PauliAttack& a : adversary.attacks) {
        require(a.qubit >= 0 && a.qubit < total_qubits, "run_session: attack targets a qubit outside the session");
    }

    Server server(rng_server, adversary);
    std::vector<TranscriptEntry> transcript;
    auto send = [&](const Message& msg) {
        transcript.push_back({true, msg});
        Message reply = server.handle(msg);
        if (reply.type == Message::Type::Outputs ||
            (reply.type == Message::Type::MeasureResult && msg.type == Message::Type::Measure)) {
            transcript.push_back({false, reply});
        }
        return reply;
    };

    // Step 1: preparation
    int trap_id_base = plan.wires + 6 * plan.num_units;
    send(client_prepare(plan, config.input_bits));

    // Step 2: trap-block edges and input bridges
    {
        Message ent;
        ent.type = Message::Type::Entangle;
        for (const auto& [a, b] : plan.upfront_trap_edges) {
            ent.pairs.emplace_back(trap_id_base + a, trap_id_base + b);
        }
        for (const auto& [trap, wire] : plan.input_bridges) {
            ent.pairs.emplace_back(trap_id_base + trap, wire);
        }
        if (!ent.pairs.empty()) {
            send(ent);
        }
    }

    // Step 3: plan execution
    std::vector<WireFrame> frames(plan.wires);
    for (int w = 0; w < plan.wires; ++w) {
        frames[w].z = plan.initial_frame_z[w];
    }
    std::vector<int> wire_qubit(plan.wires);
    for (int w = 0; w < plan.wires; ++w) {
        wire_qubit[w] = w;
    }
    std::map<int, int> trap_results;

    for (const PlanStep& step : plan.steps) {
        if (const auto* rs = std::get_if<RotationStep>(&step)) {
            WireFrame& fr = frames[rs->wire];
            if (rs->axis != Axis::Z) {
                require(fr.prep.k() == 0 && fr.residue.k() == 0, "run_session: x/y rotation with a pending diagonal");
            }
            int f = flip_bit(fr, rs->axis);
            GridAngle effective = f ? -rs->nu : rs->nu;
            Message rot;
            rot.type = Message::Type::Rotate;
            rot.qubit = wire_qubit[rs->wire];
            rot.axis = rs->axis;
            rot.angle = effective.padded(rs->pad);
            send(rot);
            ByproductRecord rec = decrypt_byproduct(rs->axis, rs->pad);
            fr.x ^= rec.x;
            fr.z ^= rec.z;
        } else if (const auto* ns = std::get_if<NormalizeStep>(&step)) {
            // kill angle theta solves (-1)^x theta + rho = 0 for the wire's
            // pending diagonal rho = (-1)^x prep + residue
            WireFrame& fr = frames[ns->wire];
            int kill = -fr.prep.k() - (fr.x ? -1 : 1) * fr.residue.k();
            Message rot;
            rot.type = Message::Type::Rotate;
            rot.qubit = wire_qubit[ns->wire];
            rot.axis = Axis::Z;
            rot.angle = GridAngle(kill).padded(ns->pad);
            send(rot);
            fr.prep = GridAngle(0);
            fr.residue = GridAngle(0);
            fr.z ^= ns->pad;
        } else if (const auto* cs = std::get_if<CnotStep>(&step)) {
            int base = circuit.wires + 6 * cs->unit_index;
            std::array<int, 6> anc = {base, base + 1, base + 2, base + 3, base + 4, base + 5};
            Message ent;
            ent.type = Message::Type::Entangle;
            ent.pairs.emplace_back(wire_qubit[cs->control], wire_qubit[cs->target]);
            ent.pairs.emplace_back(wire_qubit[cs->control], anc[0]);
            ent.pairs.emplace_back(anc[0], anc[2]);
            ent.pairs.emplace_back(anc[2], anc[4]);
            ent.pairs.emplace_back(wire_qubit[cs->target], anc[1]);
            ent.pairs.emplace_back(anc[1], anc[3]);
            ent.pairs.emplace_back(anc[3], anc[5]);
            ent.pairs.emplace_back(anc[2], anc[3]);
            for (const auto& [trap, slot] : cs->bridges) {
                ent.pairs.emplace_back(trap_id_base + trap, anc[slot]);
            }
            send(ent);

            CnotPattern pattern = derive_cnot_pattern();
            pattern.kappa_shift[0] = cs->shifts[0];
            pattern.kappa_shift[1] = cs->shifts[1];
            std::array<WireFrame, 2> uf = {frames[cs->control], frames[cs->target]};
            UnitCalculus calc(pattern, cs->inst, uf);
            std::array<int, 2> wq = {wire_qubit[cs->control], wire_qubit[cs->target]};
            // wire advance along its row after each slot: a -> b -> c -> out
            const int next_of_slot[6] = {0, 1, 2, 3, 4, 5};
            for (int slot = 0; slot < 6; ++slot) {
                int w = calc.wire_of_current();
                GridAngle delta = calc.next_delta();
                Message meas;
                meas.type = Message::Type::Measure;
                meas.qubit = wq[w];
                meas.angle = delta;
                Message reply = send(meas);
                calc.feed_outcome(reply.outcome);
                wq[w] = anc[next_of_slot[slot]];
            }
            frames[cs->control] = uf[0];
            frames[cs->target] = uf[1];
            wire_qubit[cs->control] = wq[0];
            wire_qubit[cs->target] = wq[1];
        } else if (const auto* ds = std::get_if<DecoyRotateStep>(&step)) {
            Message rot;
            rot.type = Message::Type::Rotate;
            rot.qubit = trap_id_base + ds->trap;
            rot.axis = Axis::Z;
            rot.angle = ds->xi;
            send(rot);
        } else if (const auto* ts = std::get_if<TrapMeasureStep>(&step)) {
            Message meas;
            meas.type = Message::Type::Measure;
            meas.qubit = trap_id_base + ts->trap;
            meas.angle = ts->delta;
            Message reply = send(meas);
            trap_results[ts->trap] = reply.outcome;
        }
    }

    // Step 4: return, verification, decryption
    Message ret;
    ret.type = Message::Type::ReturnOutputs;
    for (int w = 0; w < plan.wires; ++w) {
        ret.qubits.push_back(wire_qubit[w]);
    }
    for (int t = 0; t < static_cast<int>(plan.traps.size()); ++t) {
        if (plan.traps[t].role.kind == QubitRole::Kind::TrapZ) {
            ret.qubits.push_back(trap_id_base + t);
        }
    }
    Message payload = send(ret);

    for (const auto& [ids, amps] : payload.factors) {
        if (ids.size() != 1 || ids[0] < trap_id_base) {
            continue;
        }
        int trap = ids[0] - trap_id_base;
        double p1 = amps[1][0] * amps[1][0] + amps[1][1] * amps[1][1];
        trap_results[trap] = p1 > 0.5 ? 1 : 0;
    }

    report.verdict = client_verify(trap_results, plan.checks, config.trap_error_tolerance);
    Message verdict_msg;
    verdict_msg.type = Message::Type::Verdict;
    verdict_msg.accept = report.verdict.accept;
    send(verdict_msg);

    for (int t = 0; t < static_cast<int>(plan.traps.size()); ++t) {
        TrapOutcomeRow row;
        row.trap = t;
        row.kind = plan.traps[t].role.kind == QubitRole::Kind::TrapZ ? "z" : "planar";
        auto it = trap_results.find(t);
        row.observed = it == trap_results.end() ? -1 : it->second;
        auto eb = plan.checks.expected_bits.find(t);
        if (eb != plan.checks.expected_bits.end()) {
            row.checked = true;
            row.expected = eb->second;
        }
        report.trap_rows.push_back(row);
    }

    {
        StateVector assembled;
        std::vector<int> id_order;
        bool first = true;
        for (const auto& [ids, amps] : payload.factors) {
            if (ids.size() == 1 && ids[0] >= trap_id_base) {
                continue;
            }
            std::vector<cplx> camps;
            for (const auto& a : amps) {
                camps.emplace_back(a[0], a[1]);
            }
            StateVector state = StateVector::from_amplitudes(std::move(camps));
            if (first) {
                assembled = std::move(state);
                first = false;
            } else {
                assembled.extend_with(state);
            }
            id_order.insert(id_order.end(), ids.begin(), ids.end());
        }
        require(!first, "run_session: no output factors returned");
        std::vector<int> perm(plan.wires);
        for (int w = 0; w < plan.wires; ++w) {
            auto it = std::find(id_order.begin(), id_order.end(), wire_qubit[w]);
            require(it != id_order.end(), "run_session: wire output missing from payload");
            perm[w] = static_cast<int>(it - id_order.begin());
        }
        StateVector output = reorder_qubits(assembled, perm);
        for (int w = 0; w < plan.wires; ++w) {
            require(frames[w].prep.k() == 0 && frames[w].residue.k() == 0,
                    "run_session: wire finished with a pending diagonal");
            if (frames[w].x) {
                output.apply_single(w, gates::x());
            }
            if (frames[w].z) {
                output.apply_single(w, gates::z());
            }
        }
        report.output_amplitudes = output.amplitudes();

        std::size_t index = 0;
        for (int w = 0; w < plan.wires; ++w) {
            int bit = w < static_cast<int>(config.input_bits.size()) ? config.input_bits[w] : 0;
            if (bit) {
                index |= std::size_t(1) << (plan.wires - 1 - w);
            }
        }
        Matrix u = circuit.unitary();
        std::vector<cplx> amps(u.dim());
        for (std::size_t r = 0; r < u.dim(); ++r) {
            amps[r] = u(r, index);
        }
        report.fidelity_vs_direct = fidelity(output, StateVector::from_amplitudes(std::move(amps)));
    }

    report.transcript = std::move(transcript);
    return report;
}

// ---------------------------------------------------------------------------
// Report serialization

std::string SessionReport::to_json() const {
    json j;
    j["version"] = 1;
    j["seed"] = seed;
    j["circuit"] = json::parse(circuit.to_json());
    j["pattern"] = json::parse(pattern_to_json(derive_cnot_pattern()));
    j["adversary"] = adversary.to_string();
    j["config"]["order"] = config.order == AxisOrder::ZYZ ? "zyz" : (config.order == AxisOrder::ZXZ ? "zxz" : "yxy");
    j["config"]["trap_count"] = trap_count;
    j["config"]["input_bits"] = config.input_bits;
    json msgs = json::array();
    for (const TranscriptEntry& entry : transcript) {
        json m;
        m["dir"] = entry.client_to_server ? "c2s" : "s2c";
        m["msg"] = json::parse(message_to_json(entry.msg));
        msgs.push_back(m);
    }
    j["messages"] = msgs;
    j["verdict"]["accept"] = verdict.accept;
    j["verdict"]["unverified"] = verdict.unverified;
    j["verdict"]["failed_traps"] = verdict.failed;
    json traps = json::array();
    for (const TrapOutcomeRow& row : trap_rows) {
        json r;
        r["trap"] = row.trap;
        r["kind"] = row.kind;
        r["observed"] = row.observed;
        r["checked"] = row.checked;
        if (row.expected) {
            r["expected"] = *row.expected;
        }
        traps.push_back(r);
    }
    j["traps"] = traps;
    json amps = json::array();
    for (const cplx& a : output_amplitudes) {
        amps.push_back({a.real(), a.imag()});
    }
    j["output"]["amps"] = amps;
    j["output"]["fidelity_vs_direct"] = fidelity_vs_direct;
    j["notes"] = "decoy traffic on trap regions uses z-rotations and planar measurements only; "
                 "decoy eight-qubit units are not emitted";
    return j.dump();
}

} // namespace hubqc
