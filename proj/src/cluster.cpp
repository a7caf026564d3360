#include "hubqc/cluster.hpp"

#include <algorithm>
#include <json.hpp>

namespace hubqc {

std::vector<Edge> build_cluster_edges(int m, int n) {
    require(m >= 1 && n >= 1, "build_cluster_edges: dimensions too small");
    auto id = [n](int a, int b) { return (a - 1) * n + (b - 1); };
    std::vector<Edge> edges;

    // rule 3: horizontal chains along every row
    for (int a = 1; a <= m; ++a) {
        for (int b = 1; b < n; ++b) {
            edges.push_back({id(a, b), id(a, b + 1)});
        }
    }
    // rules 1 and 2: vertical link pairs, staggered by row parity
    for (int a = 1; a < m; ++a) {
        int rem = (a % 2 == 1) ? 1 : 4;
        for (int b = 1; b <= n; ++b) {
            if (b % 6 == rem) {
                edges.push_back({id(a, b), id(a + 1, b)});
                if (b + 2 <= n) {
                    edges.push_back({id(a, b + 2), id(a + 1, b + 2)});
                }
            }
        }
    }
    for (Edge& e : edges) {
        if (e.a > e.b) {
            std::swap(e.a, e.b);
        }
    }
    std::sort(edges.begin(), edges.end(), [](const Edge& x, const Edge& y) {
        return std::pair(x.a, x.b) < std::pair(y.a, y.b);
    });
    return edges;
}

ClusterLayout::ClusterLayout(int rows, int cols) : rows_(rows), cols_(cols) {
    require(rows >= 1 && cols >= 1, "ClusterLayout: dimensions too small");
    roles_.resize(std::size_t(rows) * cols);
    positions_.resize(roles_.size());
    for (int a = 1; a <= rows; ++a) {
        for (int b = 1; b <= cols; ++b) {
            positions_[(a - 1) * cols + (b - 1)] = {a, b};
        }
    }
}

int ClusterLayout::grid_id(int row, int col) const {
    require(row >= 1 && row <= rows_ && col >= 1 && col <= cols_, "grid_id: outside the computational grid");
    return (row - 1) * cols_ + (col - 1);
}

std::vector<int> ClusterLayout::neighbors(int id) const {
    std::vector<int> out;
    for (const Edge& e : edges_) {
        if (e.a == id) {
            out.push_back(e.b);
        } else if (e.b == id) {
            out.push_back(e.a);
        }
    }
    return out;
}

std::vector<int> ClusterLayout::trap_ids() const {
    std::vector<int> out;
    for (int i = 0; i < num_qubits(); ++i) {
        if (roles_[i].kind != QubitRole::Kind::Computational) {
            out.push_back(i);
        }
    }
    return out;
}

std::vector<int> ClusterLayout::computational_ids() const {
    std::vector<int> out;
    for (int i = 0; i < num_qubits(); ++i) {
        if (roles_[i].kind == QubitRole::Kind::Computational) {
            out.push_back(i);
        }
    }
    return out;
}

int ClusterLayout::add_qubit(const QubitRole& role, GridPos pos) {
    roles_.push_back(role);
    positions_.push_back(pos);
    return num_qubits() - 1;
}

void ClusterLayout::add_edge(int a, int b) {
    require(a != b && a >= 0 && b >= 0 && a < num_qubits() && b < num_qubits(), "add_edge: bad qubit ids");
    if (a > b) {
        std::swap(a, b);
    }
    edges_.push_back({a, b});
}

void ClusterLayout::validate() const {
    using Kind = QubitRole::Kind;
    for (const Edge& e : edges_) {
        Kind ka = roles_[e.a].kind;
        Kind kb = roles_[e.b].kind;
        bool planar_comp = (ka == Kind::TrapPlanar && kb == Kind::Computational) ||
                           (kb == Kind::TrapPlanar && ka == Kind::Computational);
        require(!planar_comp, "validate: planar trap wired directly to a computational qubit");
    }
    for (const TrapComponent& comp : trap_components(*this)) {
        require(comp.planar_ids.size() <= 3, "validate: planar trap component larger than three qubits");
    }
}

ClusterLayout make_grid_layout(int m, int n) {
    ClusterLayout layout(m, n);
    for (const Edge& e : build_cluster_edges(m, n)) {
        layout.add_edge(e.a, e.b);
    }
    return layout;
}

std::vector<EightQubitUnit> carve_units(const ClusterLayout& layout) {
    int m = layout.grid_rows();
    int n = layout.grid_cols();
    std::vector<EightQubitUnit> units;
    for (int a = 1; a < m; ++a) {
        int rem = (a % 2 == 1) ? 1 : 4;
        for (int b = 1; b + 3 <= n; ++b) {
            if (b % 6 != rem) {
                continue;
            }
            EightQubitUnit u;
            u.top_row = a;
            u.first_col = b;
            for (int r = 0; r < 2; ++r) {
                u.inputs[r] = layout.grid_id(a + r, b);
                u.measured[r] = {layout.grid_id(a + r, b), layout.grid_id(a + r, b + 1), layout.grid_id(a + r, b + 2)};
                u.outputs[r] = layout.grid_id(a + r, b + 3);
            }
            units.push_back(u);
        }
    }
    std::sort(units.begin(), units.end(), [](const EightQubitUnit& x, const EightQubitUnit& y) {
        return std::pair(x.first_col, x.top_row) < std::pair(y.first_col, y.top_row);
    });
    return units;
}

namespace {

struct TrapRowState {
    int row;        // 0 or m+1
    int bridge_row; // 1 or m
    std::vector<bool> used;
};

// Block widths: lone TrapZ = 1, fenced singleton = 3, fenced 3-chain = 5.
int block_width(int traps) { return traps == 1 ? 1 : (traps == 3 ? 3 : 5); }

bool try_place_block(ClusterLayout& layout, TrapRowState& rowstate, Rng& rng, int traps) {
    int width = block_width(traps);
    int n = static_cast<int>(rowstate.used.size());
    std::vector<int> starts;
    for (int c = 0; c + width <= n; ++c) {
        bool free = true;
        for (int k = 0; k < width; ++k) {
            free = free && !rowstate.used[c + k];
        }
        if (free) {
            starts.push_back(c);
        }
    }
    if (starts.empty()) {
        return false;
    }
    int c0 = starts[rng.below(starts.size())];
    for (int k = 0; k < width; ++k) {
        rowstate.used[c0 + k] = true;
    }

    auto bridge = [&](int trap_id, int col) {
        layout.add_edge(trap_id, layout.grid_id(rowstate.bridge_row, col));
    };
    int col1 = c0 + 1; // 1-based column of the block start
    GridPos pos{rowstate.row, col1};

    if (traps == 1) {
        int z = layout.add_qubit(QubitRole::trap_z(rng.bit()), pos);
        bridge(z, col1);
        return true;
    }
    int planars = traps == 3 ? 1 : 3;
    int z_left = layout.add_qubit(QubitRole::trap_z(rng.bit()), pos);
    bridge(z_left, col1);
    int prev = z_left;
    for (int k = 0; k < planars; ++k) {
        int p = layout.add_qubit(QubitRole::trap_planar(GridAngle(static_cast<int>(rng.below(8)))),
                                 {rowstate.row, col1 + 1 + k});
        layout.add_edge(prev, p);
        prev = p;
    }
    int z_right = layout.add_qubit(QubitRole::trap_z(rng.bit()), {rowstate.row, col1 + width - 1});
    layout.add_edge(prev, z_right);
    bridge(z_right, col1 + width - 1);
    return true;
}

} // namespace

void place_traps(ClusterLayout& layout, Rng& rng, int trap_count) {
    require(trap_count >= 0, "place_traps: negative trap count");
    if (trap_count == 0) {
        return;
    }
    int m = layout.grid_rows();
    int n = layout.grid_cols();
    std::vector<TrapRowState> rows = {{0, 1, std::vector<bool>(n, false)},
                                      {m + 1, m, std::vector<bool>(n, false)}};

    int remaining = trap_count;
    int retries = 100;
    while (remaining > 0) {
        int traps;
        if (remaining >= 5 && rng.below(3) == 0) {
            traps = 5;
        } else if (remaining >= 3 && rng.below(2) == 0) {
            traps = 3;
        } else {
            traps = 1;
        }
        TrapRowState& rowstate = rows[rng.below(rows.size())];
        if (try_place_block(layout, rowstate, rng, traps)) {
            remaining -= traps;
        } else if (--retries == 0) {
            throw Error("place_traps: could not fit the requested trap count around the grid");
        }
    }
    layout.validate();
}

std::vector<TrapComponent> trap_components(const ClusterLayout& layout) {
    using Kind = QubitRole::Kind;
    int n = layout.num_qubits();
    std::vector<int> comp_of(n, -1);
    std::vector<TrapComponent> comps;

    for (int start = 0; start < n; ++start) {
        if (layout.role(start).kind != Kind::TrapPlanar || comp_of[start] != -1) {
            continue;
        }
        TrapComponent comp;
        std::vector<int> stack = {start};
        comp_of[start] = static_cast<int>(comps.size());
        while (!stack.empty()) {
            int q = stack.back();
            stack.pop_back();
            comp.planar_ids.push_back(q);
            for (int nb : layout.neighbors(q)) {
                if (layout.role(nb).kind == Kind::TrapPlanar && comp_of[nb] == -1) {
                    comp_of[nb] = comp_of[q];
                    stack.push_back(nb);
                }
            }
        }
        std::sort(comp.planar_ids.begin(), comp.planar_ids.end());
        for (int q : comp.planar_ids) {
            int flips = 0;
            for (int nb : layout.neighbors(q)) {
                if (layout.role(nb).kind == Kind::TrapZ) {
                    flips ^= layout.role(nb).bit;
                }
            }
            comp.z_flips.push_back(flips);
        }
        for (std::size_t i = 0; i < comp.planar_ids.size(); ++i) {
            for (std::size_t j = i + 1; j < comp.planar_ids.size(); ++j) {
                for (int nb : layout.neighbors(comp.planar_ids[i])) {
                    if (nb == comp.planar_ids[j]) {
                        comp.internal_edges.emplace_back(static_cast<int>(i), static_cast<int>(j));
                    }
                }
            }
        }
        comps.push_back(std::move(comp));
    }
    return comps;
}

std::vector<std::pair<double, std::vector<int>>>
enumerate_planar_branches(const std::vector<GridAngle>& mus, const std::vector<int>& z_flips,
                          const std::vector<std::pair<int, int>>& edges, const std::vector<Matrix>& pre_measure_ops) {
    int k = static_cast<int>(mus.size());
    require(k >= 1 && k <= 4, "enumerate_planar_branches: component too large");

    StateVector state = StateVector::plus(mus[0].radians());
    for (int i = 1; i < k; ++i) {
        state.extend_with(StateVector::plus(mus[i].radians()));
    }
    for (const auto& [a, b] : edges) {
        state.apply_cz(a, b);
    }
    for (int i = 0; i < k; ++i) {
        if (z_flips[i]) {
            state.apply_single(i, gates::z());
        }
    }
    for (int i = 0; i < static_cast<int>(pre_measure_ops.size()); ++i) {
        if (pre_measure_ops[i].dim() == 2) {
            state.apply_single(i, pre_measure_ops[i]);
        }
    }

    std::vector<std::pair<double, std::vector<int>>> branches;
    std::vector<int> outcomes(k, 0);
    // depth-first over outcome tuples; qubit 0 is measured first each level
    auto recurse = [&](auto&& self, const StateVector& s, int depth, double prob) -> void {
        if (depth == k) {
            branches.emplace_back(prob, outcomes);
            return;
        }
        for (int bit = 0; bit < 2; ++bit) {
            StateVector branch = s;
            double p = branch.project_planar(0, mus[depth].radians(), bit);
            if (prob * p < 1e-15) {
                continue;
            }
            outcomes[depth] = bit;
            self(self, branch, depth + 1, prob * p);
        }
    };
    recurse(recurse, state, 0, 1.0);
    return branches;
}

TrapChecks expected_trap_outcomes(const ClusterLayout& layout, const std::map<int, int>& pads) {
    TrapChecks checks;
    auto pad = [&pads](int id) {
        auto it = pads.find(id);
        return it == pads.end() ? 0 : (it->second & 1);
    };

    for (int id = 0; id < layout.num_qubits(); ++id) {
        if (layout.role(id).kind == QubitRole::Kind::TrapZ) {
            checks.expected_bits[id] = layout.role(id).bit;
        }
    }

    for (const TrapComponent& comp : trap_components(layout)) {
        std::vector<GridAngle> mus;
        for (int id : comp.planar_ids) {
            mus.push_back(layout.role(id).angle);
        }
        auto branches = enumerate_planar_branches(mus, comp.z_flips, comp.internal_edges);
        int k = static_cast<int>(comp.planar_ids.size());

        std::vector<bool> deterministic(k, true);
        std::vector<int> value(k, branches.front().second[0]);
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
                checks.expected_bits[comp.planar_ids[i]] = value[i] ^ pad(comp.planar_ids[i]);
                covered[i] = true;
            }
        }
        for (int i = 0; i < k; ++i) {
            for (int j = i + 1; j < k; ++j) {
                if (deterministic[i] || deterministic[j]) {
                    continue;
                }
                int parity = branches.front().second[i] ^ branches.front().second[j];
                bool fixed = true;
                for (const auto& [p, bits] : branches) {
                    if ((bits[i] ^ bits[j]) != parity) {
                        fixed = false;
                    }
                }
                if (fixed) {
                    checks.parities.push_back({comp.planar_ids[i], comp.planar_ids[j],
                                               parity ^ pad(comp.planar_ids[i]) ^ pad(comp.planar_ids[j])});
                    covered[i] = covered[j] = true;
                }
            }
        }
        for (int i = 0; i < k; ++i) {
            if (!covered[i]) {
                checks.unchecked.push_back(comp.planar_ids[i]);
            }
        }
    }
    return checks;
}

std::string ClusterLayout::to_json() const {
    nlohmann::json j;
    j["version"] = 1;
    j["rows"] = rows_;
    j["cols"] = cols_;
    nlohmann::json qubits = nlohmann::json::array();
    for (int i = 0; i < num_qubits(); ++i) {
        nlohmann::json q;
        q["row"] = positions_[i].row;
        q["col"] = positions_[i].col;
        switch (roles_[i].kind) {
        case QubitRole::Kind::Computational:
            q["kind"] = "comp";
            q["k"] = roles_[i].angle.k();
            break;
        case QubitRole::Kind::TrapZ:
            q["kind"] = "trapz";
            q["bit"] = roles_[i].bit;
            break;
        case QubitRole::Kind::TrapPlanar:
            q["kind"] = "trapp";
            q["k"] = roles_[i].angle.k();
            break;
        }
        qubits.push_back(q);
    }
    j["qubits"] = qubits;
    nlohmann::json edges = nlohmann::json::array();
    for (const Edge& e : edges_) {
        edges.push_back({e.a, e.b});
    }
    j["edges"] = edges;
    return j.dump();
}

ClusterLayout ClusterLayout::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    require(j.at("version").get<int>() == 1, "ClusterLayout: unsupported schema version");
    ClusterLayout layout(j.at("rows").get<int>(), j.at("cols").get<int>());
    const auto& qubits = j.at("qubits");
    require(static_cast<int>(qubits.size()) >= layout.grid_rows() * layout.grid_cols(),
            "ClusterLayout: too few qubits for the declared grid");
    for (int i = 0; i < static_cast<int>(qubits.size()); ++i) {
        const auto& q = qubits[i];
        QubitRole role;
        std::string kind = q.at("kind").get<std::string>();
        if (kind == "comp") {
            role = QubitRole::computational(GridAngle(q.at("k").get<int>()));
        } else if (kind == "trapz") {
            role = QubitRole::trap_z(q.at("bit").get<int>());
        } else if (kind == "trapp") {
            role = QubitRole::trap_planar(GridAngle(q.at("k").get<int>()));
        } else {
            throw Error("ClusterLayout: unknown qubit kind " + kind);
        }
        GridPos pos{q.at("row").get<int>(), q.at("col").get<int>()};
        if (i < layout.grid_rows() * layout.grid_cols()) {
            layout.roles_[i] = role;
            layout.positions_[i] = pos;
        } else {
            layout.add_qubit(role, pos);
        }
    }
    for (const auto& e : j.at("edges")) {
        layout.add_edge(e.at(0).get<int>(), e.at(1).get<int>());
    }
    return layout;
}

} // namespace hubqc
