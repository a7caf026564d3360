#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hubqc/analysis.hpp"
#include "hubqc/protocol.hpp"
#include "hubqc/qft.hpp"

using namespace hubqc;
using nlohmann::json;

namespace {

void write_output(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text << "\n";
        return;
    }
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot open output file " + path);
    }
    out << text << "\n";
}

std::string basis_label(const std::vector<int>& bits) {
    std::string s = "|";
    for (int b : bits) {
        s += char('0' + b);
    }
    return s + ">";
}

int run_demo(const CircuitDescription& circuit, const std::string& name, std::uint64_t seed,
             const std::string& out_path, const std::string& format) {
    json rows = json::array();
    std::ostringstream text;
    text << name << " seed=" << seed << "\n";
    bool all_accept = true;
    for (int in = 0; in < 4; ++in) {
        SessionConfig config;
        config.input_bits = {(in >> 1) & 1, in & 1};
        SessionReport report = run_session(circuit, AdversaryPolicy{}, seed + in, config);
        all_accept = all_accept && report.verdict.accept;
        json row;
        row["input"] = basis_label(config.input_bits);
        row["fidelity"] = report.fidelity_vs_direct;
        row["verdict"] = report.verdict.accept ? "accept" : "abort";
        row["seed"] = seed + in;
        rows.push_back(row);
        char line[160];
        std::snprintf(line, sizeof line, "input %s  fidelity=%.12f  verdict=%s",
                      basis_label(config.input_bits).c_str(), report.fidelity_vs_direct,
                      report.verdict.accept ? "accept" : "abort");
        text << line << "\n";
    }
    if (format == "json") {
        json j;
        j["demo"] = name;
        j["seed"] = seed;
        j["rows"] = rows;
        write_output(j.dump(2), out_path);
    } else {
        write_output(text.str(), out_path);
    }
    return all_accept ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hubqc: hybrid blind quantum computation simulator and verification harness"};
    app.require_subcommand(1);

    std::uint64_t seed = 42;
    std::string out_path;
    std::string format = "text";
    std::string circuit_path;
    std::string attack_spec;
    int traps = -1;
    long trials = 10000;
    int cols = 3;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed, "master seed (reports embed it for exact replay)");
        cmd->add_option("--out", out_path, "write the report to this file instead of stdout");
        cmd->add_option("--format", format, "report format: text or json")->check(CLI::IsMember({"text", "json"}));
    };

    CLI::App* demo_cnot = app.add_subcommand("demo-cnot", "honest CNOT sessions over the four basis inputs");
    add_common(demo_cnot);

    CLI::App* demo_qft = app.add_subcommand("demo-qft", "blind two-qubit Fourier transform over the basis inputs");
    add_common(demo_qft);

    CLI::App* run = app.add_subcommand("run", "run one session from a circuit file");
    add_common(run);
    run->add_option("--circuit", circuit_path, "circuit JSON file")->required();
    run->add_option("--attack", attack_spec, "Pauli attack schedule, e.g. X@3,Z@7,XZ@2");
    run->add_option("--traps", traps, "trap qubit budget (default: one per computational qubit)");

    CLI::App* blindness = app.add_subcommand("report-blindness", "input and angle-distribution blindness checks");
    add_common(blindness);
    blindness->add_option("--trials", trials, "sample count for the distribution tests");

    CLI::App* verifiability = app.add_subcommand("report-verifiability", "trap-detection oracle vs Monte Carlo");
    add_common(verifiability);
    verifiability->add_option("--trials", trials, "Monte Carlo trials per attack");
    verifiability->add_option("--cols", cols, "computational grid columns (2 rows)");
    verifiability->add_option("--traps", traps, "trap budget (default: equal split)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (demo_cnot->parsed()) {
            CircuitDescription c;
            c.wires = 2;
            c.gates.push_back(CircuitGate::cnot(0, 1));
            return run_demo(c, "demo-cnot", seed, out_path, format);
        }
        if (demo_qft->parsed()) {
            return run_demo(build_qft(QftSpec{}), "demo-qft", seed, out_path, format);
        }
        if (run->parsed()) {
            std::ifstream in(circuit_path);
            if (!in) {
                std::cerr << "error: cannot open circuit file " << circuit_path << "\n";
                return 2;
            }
            std::stringstream buf;
            buf << in.rdbuf();
            CircuitDescription circuit;
            try {
                circuit = CircuitDescription::from_json(buf.str());
            } catch (const json::parse_error& e) {
                std::cerr << "error: circuit parse failed at byte " << e.byte << ": " << e.what() << "\n";
                return 2;
            }
            AdversaryPolicy adversary = AdversaryPolicy::parse(attack_spec);
            SessionConfig config;
            config.trap_count = traps;
            SessionReport report = run_session(circuit, adversary, seed, config);
            if (format == "json") {
                write_output(report.to_json(), out_path);
            } else {
                std::ostringstream text;
                text << "seed=" << report.seed << " adversary=" << adversary.to_string()
                     << " traps=" << report.trap_count << "\n";
                text << "verdict=" << (report.verdict.accept ? "accept" : "abort");
                if (!report.verdict.failed.empty()) {
                    text << " failed_traps=";
                    for (std::size_t i = 0; i < report.verdict.failed.size(); ++i) {
                        text << (i ? "," : "") << report.verdict.failed[i];
                    }
                }
                text << "\nfidelity_vs_direct=" << report.fidelity_vs_direct;
                write_output(text.str(), out_path);
            }
            return report.verdict.accept ? 0 : 1;
        }
        if (blindness->parsed()) {
            AngleDistributionReports reports = angle_distribution_test(trials, seed);
            double deviation = input_blindness_deviation();
            if (format == "json") {
                json j;
                j["seed"] = seed;
                j["trials"] = trials;
                j["input_blindness_deviation"] = deviation;
                j["xi_prior"] = json::parse(reports.xi_prior.to_json());
                j["pad_independence"] = json::parse(reports.pad_independence.to_json());
                j["delta_uniform"] = json::parse(reports.delta_uniform.to_json());
                write_output(j.dump(2), out_path);
            } else {
                std::ostringstream text;
                char line[160];
                std::snprintf(line, sizeof line, "input blindness: max deviation from I/2 = %.3e", deviation);
                text << line << "\n";
                for (const DistributionReport* rep :
                     {&reports.xi_prior, &reports.pad_independence, &reports.delta_uniform}) {
                    std::snprintf(line, sizeof line, "%-24s chi2=%8.3f  p=%.4f  samples=%ld", rep->variable.c_str(),
                                  rep->chi_square, rep->p_value, rep->samples);
                    text << line << "\n";
                }
                text << "seed=" << seed;
                write_output(text.str(), out_path);
            }
            return 0;
        }
        if (verifiability->parsed()) {
            int trap_budget = traps >= 0 ? traps : 2 * cols;
            ClusterLayout layout = verifiability_layout(cols, trap_budget, seed);
            const AttackSpec specs[] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 0}, {1, 1, 1}};
            json rows = json::array();
            std::ostringstream text;
            text << "verifiability layout: " << layout.computational_ids().size() << " computational + "
                 << layout.trap_ids().size() << " trap qubits, seed=" << seed << "\n";
            text << "attack            alpha  oracle    mc_rate   stderr    bound\n";
            for (const AttackSpec& spec : specs) {
                double oracle = detection_oracle(layout, spec);
                MissEstimate mc = verifiability_mc(layout, spec, trials, seed + spec.alpha());
                double bound = std::pow(0.5, spec.alpha() / 3.0);
                json row;
                row["attack"] = spec.to_string();
                row["alpha"] = spec.alpha();
                row["oracle_miss"] = oracle;
                row["mc_miss"] = mc.rate;
                row["mc_stderr"] = mc.stderr_;
                row["bound_half_pow_alpha_over_3"] = bound;
                rows.push_back(row);
                char line[160];
                std::snprintf(line, sizeof line, "%-17s %5d  %.6f  %.6f  %.6f  %.6f", spec.to_string().c_str(),
                              spec.alpha(), oracle, mc.rate, mc.stderr_, bound);
                text << line << "\n";
            }
            if (format == "json") {
                json j;
                j["seed"] = seed;
                j["trials"] = trials;
                j["layout"] = json::parse(layout.to_json());
                j["rows"] = rows;
                write_output(j.dump(2), out_path);
            } else {
                write_output(text.str(), out_path);
            }
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
