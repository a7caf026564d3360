#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hubqc/angles.hpp"
#include "hubqc/rng.hpp"
#include "hubqc/statevector.hpp"

namespace hubqc {

struct QubitRole {
    enum class Kind { Computational, TrapZ, TrapPlanar };
    Kind kind = Kind::Computational;
    GridAngle angle; // omega for computational, mu for planar traps
    int bit = 0;     // |0> or |1> preparation of a TrapZ

    static QubitRole computational(GridAngle omega) { return {Kind::Computational, omega, 0}; }
    static QubitRole trap_z(int bit) { return {Kind::TrapZ, GridAngle(0), bit}; }
    static QubitRole trap_planar(GridAngle mu) { return {Kind::TrapPlanar, mu, 0}; }
};

struct GridPos {
    int row = 0; // computational rows are 1..m; trap rows sit at 0 and m+1
    int col = 0;
};

struct Edge {
    int a = 0;
    int b = 0; // qubit ids, a < b
};

// The 2x4 cluster fragment implementing one CNOT: inputs in its first
// column, outputs in its last, six measured qubits between.
struct EightQubitUnit {
    int top_row = 0;
    int first_col = 0;
    std::array<int, 2> inputs{};
    std::array<int, 2> outputs{};
    std::array<std::array<int, 3>, 2> measured{}; // [row][a,b,c]
};

// Edge structure of the m x n |Cluster> grid:
//   rule 1: odd rows a, cols b = 1 (mod 6): CZ (a,b)-(a+1,b) and (a,b+2)-(a+1,b+2)
//   rule 2: even rows a, cols b = 4 (mod 6): same pair of links
//   rule 3: every row: CZ (a,b)-(a,b+1)
// Coordinates are 1-based; (a,b) maps to id (a-1)*n + (b-1).
std::vector<Edge> build_cluster_edges(int m, int n);

class ClusterLayout {
  public:
    ClusterLayout() = default;
    ClusterLayout(int rows, int cols);

    int grid_rows() const { return rows_; }
    int grid_cols() const { return cols_; }
    int num_qubits() const { return static_cast<int>(roles_.size()); }

    int grid_id(int row, int col) const;
    const QubitRole& role(int id) const { return roles_[id]; }
    QubitRole& role(int id) { return roles_[id]; }
    const GridPos& position(int id) const { return positions_[id]; }
    const std::vector<Edge>& edges() const { return edges_; }

    std::vector<int> neighbors(int id) const;
    std::vector<int> trap_ids() const;
    std::vector<int> computational_ids() const;

    int add_qubit(const QubitRole& role, GridPos pos);
    void add_edge(int a, int b);

    // Trap structural invariants: planar traps never touch computational
    // qubits directly, and each planar component holds at most three qubits.
    void validate() const;

    std::string to_json() const;
    static ClusterLayout from_json(const std::string& text);

  private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<QubitRole> roles_;
    std::vector<GridPos> positions_;
    std::vector<Edge> edges_;
};

// Grid layout with the rule-based edge set; roles default to computational
// with angle 0 until a client assigns preparation angles.
ClusterLayout make_grid_layout(int m, int n);

std::vector<EightQubitUnit> carve_units(const ClusterLayout& layout);

// Attaches trap decorations around the computational grid: planar singletons
// and three-qubit planar chains fenced by TrapZ qubits, plus lone TrapZ
// bridges. Roles (bits, mu angles) are drawn from rng. Placement is
// rejection-sampled; impossible targets raise after bounded retries.
void place_traps(ClusterLayout& layout, Rng& rng, int trap_count);

// One CZ-connected component of planar traps together with the Z flips its
// TrapZ neighbors imprint.
struct TrapComponent {
    std::vector<int> planar_ids;
    std::vector<int> z_flips; // per planar id: parity of |1> TrapZ neighbors
    std::vector<std::pair<int, int>> internal_edges; // index pairs into planar_ids
};

std::vector<TrapComponent> trap_components(const ClusterLayout& layout);

// What the client can predict about trap readouts: exact bits where the
// outcome is deterministic, outcome parities for entangled chains, and the
// planar traps carrying no deterministic relation at all.
struct TrapChecks {
    std::map<int, int> expected_bits;
    std::vector<std::array<int, 3>> parities; // {id_i, id_j, expected xor}
    std::vector<int> unchecked;
};

// Enumerates every measurement branch of a planar component (each qubit
// measured in its own preparation basis) and returns (probability, outcome
// bits). Optional per-qubit operators model Pauli attacks.
std::vector<std::pair<double, std::vector<int>>>
enumerate_planar_branches(const std::vector<GridAngle>& mus, const std::vector<int>& z_flips,
                          const std::vector<std::pair<int, int>>& edges,
                          const std::vector<Matrix>& pre_measure_ops = {});

// Computes the deterministic expectation structure by exact simulation of
// every component; pad bits flip the stored constants so the checks apply
// to the padded measurement bases directly.
TrapChecks expected_trap_outcomes(const ClusterLayout& layout, const std::map<int, int>& pads);

} // namespace hubqc
