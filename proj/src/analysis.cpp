#include "hubqc/analysis.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace hubqc {

// ---------------------------------------------------------------------------
// Chi-square tail via the regularized incomplete gamma function

namespace {

double gamma_series(double a, double x) {
    double sum = 1.0 / a;
    double term = sum;
    for (int n = 1; n < 500; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-15) {
            break;
        }
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_cont_fraction(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 500; ++i) {
        double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) {
            d = tiny;
        }
        c = b + an / c;
        if (std::abs(c) < tiny) {
            c = tiny;
        }
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) {
            break;
        }
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

} // namespace

double chi_square_p_value(double statistic, int dof) {
    require(dof >= 1, "chi_square_p_value: bad degrees of freedom");
    if (statistic <= 0.0) {
        return 1.0;
    }
    double a = dof / 2.0;
    double x = statistic / 2.0;
    double p = x < a + 1.0 ? 1.0 - gamma_series(a, x) : gamma_cont_fraction(a, x);
    return std::clamp(p, 0.0, 1.0);
}

std::string DistributionReport::to_json() const {
    nlohmann::json j;
    j["variable"] = variable;
    j["categories"] = categories;
    j["histogram"] = histogram;
    j["reference"] = reference;
    j["chi_square"] = chi_square;
    j["p_value"] = p_value;
    j["samples"] = samples;
    return j.dump();
}

// ---------------------------------------------------------------------------
// Input blindness

Matrix input_blindness_matrix() {
    std::vector<std::pair<StateVector, double>> ensemble;
    for (int k = 0; k < 8; ++k) {
        ensemble.emplace_back(StateVector::plus(k * kPi / 4.0, 0), 1.0 / 18.0);
        ensemble.emplace_back(StateVector::plus(k * kPi / 4.0, 1), 1.0 / 18.0);
    }
    ensemble.emplace_back(StateVector::basis1(0), 1.0 / 18.0);
    ensemble.emplace_back(StateVector::basis1(1), 1.0 / 18.0);
    return ensemble_density(ensemble);
}

double input_blindness_deviation() {
    Matrix rho = input_blindness_matrix();
    return rho.distance(Matrix::identity(2) * cplx(0.5, 0.0));
}

// ---------------------------------------------------------------------------
// Distributional blindness

namespace {

DistributionReport goodness_of_fit(std::string variable, std::vector<std::string> categories,
                                   std::vector<long> histogram, std::vector<double> reference, long samples) {
    DistributionReport rep;
    rep.variable = std::move(variable);
    rep.categories = std::move(categories);
    rep.histogram = std::move(histogram);
    rep.reference = std::move(reference);
    rep.samples = samples;
    double chi = 0.0;
    for (std::size_t i = 0; i < rep.histogram.size(); ++i) {
        double expect = rep.reference[i] * samples;
        require(expect > 0.0, "goodness_of_fit: empty reference bin");
        double d = rep.histogram[i] - expect;
        chi += d * d / expect;
    }
    rep.chi_square = chi;
    rep.p_value = chi_square_p_value(chi, static_cast<int>(rep.histogram.size()) - 1);
    return rep;
}

int s_index(int k) {
    for (std::size_t i = 0; i < kAngleSetS.size(); ++i) {
        if (kAngleSetS[i] == k) {
            return static_cast<int>(i);
        }
    }
    return -1;
}

} // namespace

AngleDistributionReports angle_distribution_test(long trials, std::uint64_t seed) {
    require(trials >= 1000, "angle_distribution_test: insufficient samples");
    Rng rng(seed);
    AngleDistributionReports out;

    std::vector<std::string> s_names;
    for (int k : kAngleSetS) {
        s_names.push_back("k" + std::to_string(k));
    }

    // condition a: with nu drawn from the uniform prior over S and r
    // uniform, xi = nu + r*pi keeps the prior law (S is closed under +pi)
    std::vector<long> xi_hist(6, 0);
    std::vector<std::vector<long>> table(2, std::vector<long>(6, 0));
    for (long t = 0; t < trials; ++t) {
        GridAngle nu(kAngleSetS[rng.below(6)]);
        int r = rng.bit();
        GridAngle xi = encrypt_rotation(nu, r);
        int idx = s_index(xi.k());
        require(idx >= 0, "angle_distribution_test: xi escaped S");
        ++xi_hist[idx];
        ++table[r][idx];
    }
    out.xi_prior =
        goodness_of_fit("xi_given_uniform_prior", s_names, xi_hist, std::vector<double>(6, 1.0 / 6.0), trials);

    // condition b: independence of the pad bit from the published xi
    {
        DistributionReport rep;
        rep.variable = "pad_vs_xi_contingency";
        rep.samples = trials;
        double chi = 0.0;
        std::vector<long> row_tot(2, 0);
        std::vector<long> col_tot(6, 0);
        for (int r = 0; r < 2; ++r) {
            for (int c = 0; c < 6; ++c) {
                row_tot[r] += table[r][c];
                col_tot[c] += table[r][c];
            }
        }
        for (int r = 0; r < 2; ++r) {
            for (int c = 0; c < 6; ++c) {
                double expect = double(row_tot[r]) * double(col_tot[c]) / double(trials);
                if (expect > 0.0) {
                    double d = table[r][c] - expect;
                    chi += d * d / expect;
                }
                rep.categories.push_back("r" + std::to_string(r) + "_k" + std::to_string(kAngleSetS[c]));
                rep.histogram.push_back(table[r][c]);
                rep.reference.push_back(double(row_tot[r]) * double(col_tot[c]) / double(trials) / double(trials));
            }
        }
        rep.chi_square = chi;
        rep.p_value = chi_square_p_value(chi, 5);
        out.pad_independence = rep;
    }

    // encrypted measurement angles under random kappa, omega and pads
    std::vector<long> delta_hist(8, 0);
    for (long t = 0; t < trials; ++t) {
        MeasurementCommand cmd;
        cmd.omega = GridAngle(static_cast<int>(rng.below(8)));
        cmd.kappa = GridAngle(static_cast<int>(rng.below(8)));
        cmd.pad = rng.bit();
        cmd.x_deps = {0};
        cmd.z_deps = {1};
        std::vector<int> outcomes = {rng.bit(), rng.bit()};
        ++delta_hist[adaptive_angle(cmd, outcomes).k()];
    }
    std::vector<std::string> grid_names;
    for (int k = 0; k < 8; ++k) {
        grid_names.push_back("k" + std::to_string(k));
    }
    out.delta_uniform =
        goodness_of_fit("delta_over_grid", grid_names, delta_hist, std::vector<double>(8, 1.0 / 8.0), trials);
    return out;
}

std::string AttackSpec::to_string() const {
    return "X^" + std::to_string(x_count) + " Z^" + std::to_string(z_count) + " XZ^" + std::to_string(xz_count);
}

// ---------------------------------------------------------------------------
// Verifiability layout

ClusterLayout verifiability_layout(int computational_cols, int trap_count, std::uint64_t seed) {
    Rng rng(seed);
    ClusterLayout layout = make_grid_layout(2, computational_cols);
    for (int id : layout.computational_ids()) {
        layout.role(id) = QubitRole::computational(GridAngle(static_cast<int>(rng.below(8))));
    }
    place_traps(layout, rng, trap_count);
    return layout;
}

// ---------------------------------------------------------------------------
// Exact detection oracle

namespace {

struct PlacedAttack {
    std::vector<int> sites; // one per attack, distinct
    std::vector<int> xs;    // Pauli X part per attack
    std::vector<int> zs;    // Pauli Z part per attack
};

// P(all client checks pass) for one placement, exact over the measurement
// branches of every planar component.
double undetected_probability(const ClusterLayout& layout, const TrapChecks& clean_checks,
                              const PlacedAttack& placed) {
    double prob = 1.0;
    auto attack_on = [&](int id, int& ax, int& az) {
        ax = az = 0;
        for (std::size_t i = 0; i < placed.sites.size(); ++i) {
            if (placed.sites[i] == id) {
                ax ^= placed.xs[i];
                az ^= placed.zs[i];
            }
        }
    };

    // Z-basis traps: an X part flips the deterministic readout
    for (int id = 0; id < layout.num_qubits(); ++id) {
        if (layout.role(id).kind != QubitRole::Kind::TrapZ) {
            continue;
        }
        int ax, az;
        attack_on(id, ax, az);
        if (ax) {
            return 0.0;
        }
    }

    for (const TrapComponent& comp : trap_components(layout)) {
        bool touched = false;
        std::vector<Matrix> ops(comp.planar_ids.size());
        for (std::size_t i = 0; i < comp.planar_ids.size(); ++i) {
            int ax, az;
            attack_on(comp.planar_ids[i], ax, az);
            if (ax || az) {
                touched = true;
                Matrix m = Matrix::identity(2);
                if (az) {
                    m = gates::z() * m;
                }
                if (ax) {
                    m = gates::x() * m;
                }
                ops[i] = m;
            }
        }
        if (!touched) {
            continue;
        }
        std::vector<GridAngle> mus;
        for (int id : comp.planar_ids) {
            mus.push_back(layout.role(id).angle);
        }
        auto branches = enumerate_planar_branches(mus, comp.z_flips, comp.internal_edges, ops);
        double pass = 0.0;
        for (const auto& [p, bits] : branches) {
            bool ok = true;
            for (std::size_t i = 0; i < comp.planar_ids.size(); ++i) {
                auto it = clean_checks.expected_bits.find(comp.planar_ids[i]);
                if (it != clean_checks.expected_bits.end() && bits[i] != it->second) {
                    ok = false;
                }
            }
            for (const auto& par : clean_checks.parities) {
                int ia = -1, ib = -1;
                for (std::size_t i = 0; i < comp.planar_ids.size(); ++i) {
                    if (comp.planar_ids[i] == par[0]) {
                        ia = static_cast<int>(i);
                    }
                    if (comp.planar_ids[i] == par[1]) {
                        ib = static_cast<int>(i);
                    }
                }
                if (ia >= 0 && ib >= 0 && ((bits[ia] ^ bits[ib]) != par[2])) {
                    ok = false;
                }
            }
            if (ok) {
                pass += p;
            }
        }
        prob *= pass;
    }
    return prob;
}

void enumerate_placements(const ClusterLayout& layout, const AttackSpec& attack, int next_type, PlacedAttack& acc,
                          double& miss_sum, long& count, const TrapChecks& clean_checks) {
    int remaining[3] = {attack.x_count, attack.z_count, attack.xz_count};
    for (std::size_t i = 0; i < acc.sites.size(); ++i) {
        int type = acc.xs[i] && acc.zs[i] ? 2 : (acc.xs[i] ? 0 : 1);
        --remaining[type];
    }
    int type = next_type;
    while (type < 3 && remaining[type] == 0) {
        ++type;
    }
    if (type == 3) {
        ++count;
        bool affected = false;
        for (int site : acc.sites) {
            if (layout.role(site).kind == QubitRole::Kind::Computational) {
                affected = true;
            }
        }
        if (affected) {
            miss_sum += undetected_probability(layout, clean_checks, acc);
        }
        return;
    }
    for (int site = 0; site < layout.num_qubits(); ++site) {
        if (std::find(acc.sites.begin(), acc.sites.end(), site) != acc.sites.end()) {
            continue;
        }
        acc.sites.push_back(site);
        acc.xs.push_back(type != 1 ? 1 : 0);
        acc.zs.push_back(type != 0 ? 1 : 0);
        enumerate_placements(layout, attack, type, acc, miss_sum, count, clean_checks);
        acc.sites.pop_back();
        acc.xs.pop_back();
        acc.zs.pop_back();
    }
}

} // namespace

double detection_oracle(const ClusterLayout& layout, const AttackSpec& attack) {
    require(layout.num_qubits() <= 16, "detection_oracle: layout too large for exhaustive enumeration");
    if (attack.alpha() == 0) {
        return 0.0; // nothing placed, nothing affected
    }
    require(attack.alpha() <= layout.num_qubits(), "detection_oracle: more attacks than qubits");
    TrapChecks clean = expected_trap_outcomes(layout, {});
    PlacedAttack acc;
    double miss_sum = 0.0;
    long count = 0;
    enumerate_placements(layout, attack, 0, acc, miss_sum, count, clean);
    require(count > 0, "detection_oracle: no placements enumerated");
    return miss_sum / double(count);
}

// ---------------------------------------------------------------------------
// Monte Carlo sessions over the layout

namespace {

// One prepare/entangle/measure/verify round over the layout with the given
// attack placement. Reuses the protocol server so the measurement physics
// matches live sessions exactly.
bool layout_session_accepts(const ClusterLayout& layout, const PlacedAttack& placed, Rng& rng) {
    AdversaryPolicy adversary;
    for (std::size_t i = 0; i < placed.sites.size(); ++i) {
        adversary.attacks.push_back({placed.sites[i], placed.xs[i], placed.zs[i]});
    }
    Server server(rng.split(0x5e5510), adversary);

    Message prep;
    prep.type = Message::Type::Prepare;
    std::map<int, int> pads;
    for (int id = 0; id < layout.num_qubits(); ++id) {
        const QubitRole& role = layout.role(id);
        StateVector s = StateVector::basis1(0);
        switch (role.kind) {
        case QubitRole::Kind::Computational:
            s = StateVector::plus(role.angle.radians());
            break;
        case QubitRole::Kind::TrapZ:
            s = StateVector::basis1(role.bit);
            break;
        case QubitRole::Kind::TrapPlanar:
            s = StateVector::plus(role.angle.radians());
            pads[id] = rng.bit();
            break;
        }
        prep.states.push_back({s.amplitude(0).real(), s.amplitude(0).imag(), s.amplitude(1).real(),
                               s.amplitude(1).imag()});
    }
    server.handle(prep);

    Message ent;
    ent.type = Message::Type::Entangle;
    for (const Edge& e : layout.edges()) {
        ent.pairs.emplace_back(e.a, e.b);
    }
    server.handle(ent);

    std::map<int, int> results;
    for (int id = 0; id < layout.num_qubits(); ++id) {
        const QubitRole& role = layout.role(id);
        if (role.kind == QubitRole::Kind::TrapZ) {
            continue; // returned and read by the client below
        }
        Message meas;
        meas.type = Message::Type::Measure;
        meas.qubit = id;
        int pad = role.kind == QubitRole::Kind::TrapPlanar ? pads[id] : rng.bit();
        meas.angle = role.angle.padded(pad);
        Message reply = server.handle(meas);
        if (role.kind == QubitRole::Kind::TrapPlanar) {
            results[id] = reply.outcome;
        }
    }

    Message ret;
    ret.type = Message::Type::ReturnOutputs;
    for (int id = 0; id < layout.num_qubits(); ++id) {
        if (layout.role(id).kind == QubitRole::Kind::TrapZ) {
            ret.qubits.push_back(id);
        }
    }
    Message payload = server.handle(ret);
    for (const auto& [ids, amps] : payload.factors) {
        double p1 = amps[1][0] * amps[1][0] + amps[1][1] * amps[1][1];
        results[ids[0]] = p1 > 0.5 ? 1 : 0;
    }

    TrapChecks checks = expected_trap_outcomes(layout, pads);
    return client_verify(results, checks).accept;
}

} // namespace

MissEstimate verifiability_mc(const ClusterLayout& layout, const AttackSpec& attack, long trials,
                              std::uint64_t seed) {
    require(trials >= 1000, "verifiability_mc: insufficient trials");
    require(attack.alpha() >= 1, "verifiability_mc: honest policy has no miss rate");
    Rng master(seed);
    MissEstimate est;
    est.trials = trials;
    for (long t = 0; t < trials; ++t) {
        Rng rng = master.split(static_cast<std::uint64_t>(t) + 1);
        PlacedAttack placed;
        auto place = [&](int count, int x, int z) {
            for (int i = 0; i < count; ++i) {
                int site;
                do {
                    site = static_cast<int>(rng.below(layout.num_qubits()));
                } while (std::find(placed.sites.begin(), placed.sites.end(), site) != placed.sites.end());
                placed.sites.push_back(site);
                placed.xs.push_back(x);
                placed.zs.push_back(z);
            }
        };
        place(attack.x_count, 1, 0);
        place(attack.z_count, 0, 1);
        place(attack.xz_count, 1, 1);

        bool affected = false;
        for (int site : placed.sites) {
            if (layout.role(site).kind == QubitRole::Kind::Computational) {
                affected = true;
            }
        }
        if (affected && layout_session_accepts(layout, placed, rng)) {
            ++est.misses;
        }
    }
    est.rate = double(est.misses) / double(trials);
    est.stderr_ = std::sqrt(std::max(est.rate * (1.0 - est.rate), 1e-12) / double(trials));
    return est;
}

} // namespace hubqc
