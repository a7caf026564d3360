#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hubqc/cluster.hpp"
#include "hubqc/protocol.hpp"

namespace hubqc {

// Upper-tail probability of a chi-square variable with `dof` degrees of
// freedom exceeding `statistic` (regularized incomplete gamma).
double chi_square_p_value(double statistic, int dof);

struct DistributionReport {
    std::string variable;
    std::vector<std::string> categories;
    std::vector<long> histogram;
    std::vector<double> reference; // expected probabilities
    double chi_square = 0.0;
    double p_value = 0.0;
    long samples = 0;

    std::string to_json() const;
};

// The analytic 18-state input average against I/2.
Matrix input_blindness_matrix();
double input_blindness_deviation();

struct AngleDistributionReports {
    DistributionReport xi_prior;        // condition a: law of xi equals the prior pushforward
    DistributionReport pad_independence; // condition b: r independent of xi
    DistributionReport delta_uniform;    // measurement angles uniform over the grid
};

AngleDistributionReports angle_distribution_test(long trials, std::uint64_t seed);

struct AttackSpec {
    int x_count = 0;
    int z_count = 0;
    int xz_count = 0;
    int alpha() const { return x_count + z_count + xz_count; }
    std::string to_string() const;
};

// Fixed-instance layout for the verifiability experiments: a computational
// subgrid with randomized preparation angles and an equal trap budget.
ClusterLayout verifiability_layout(int computational_cols, int trap_count, std::uint64_t seed);

// Exact miss probability: enumerate every placement of the attack multiset
// over the layout's qubits; a placement is a miss when at least one site is
// computational and every trap check still passes (branch probabilities
// handled exactly). Enumeration is capped at 16 qubits.
double detection_oracle(const ClusterLayout& layout, const AttackSpec& attack);

struct MissEstimate {
    double rate = 0.0;
    double stderr_ = 0.0;
    long trials = 0;
    long misses = 0;
};

// Monte Carlo counterpart: full prepare/entangle/measure/verify sessions
// over the layout with uniformly placed attacks.
MissEstimate verifiability_mc(const ClusterLayout& layout, const AttackSpec& attack, long trials, std::uint64_t seed);

} // namespace hubqc
