#include "hubqc/statevector.hpp"

#include <cmath>
#include <cstdlib>

namespace hubqc {

int max_qubits() {
    static int cap = [] {
        if (const char* env = std::getenv("HUBQC_MAX_QUBITS")) {
            int v = std::atoi(env);
            if (v > 0) {
                return v;
            }
        }
        return 22;
    }();
    return cap;
}

StateVector StateVector::zero(int num_qubits) {
    require(num_qubits >= 1 && num_qubits <= max_qubits(), "StateVector: qubit count outside supported range");
    StateVector s;
    s.num_qubits_ = num_qubits;
    s.amps_.assign(std::size_t(1) << num_qubits, cplx(0.0, 0.0));
    s.amps_[0] = 1.0;
    return s;
}

StateVector StateVector::from_amplitudes(std::vector<cplx> amps) {
    int n = 0;
    while ((std::size_t(1) << n) < amps.size()) {
        ++n;
    }
    require((std::size_t(1) << n) == amps.size(), "StateVector: amplitude count is not a power of two");
    require(n >= 1 && n <= max_qubits(), "StateVector: qubit count outside supported range");
    StateVector s;
    s.num_qubits_ = n;
    s.amps_ = std::move(amps);
    return s;
}

StateVector StateVector::basis1(int bit) {
    StateVector s = zero(1);
    if (bit) {
        s.amps_ = {cplx(0.0, 0.0), cplx(1.0, 0.0)};
    }
    return s;
}

StateVector StateVector::plus(double omega, int sign) {
    double r = 1.0 / std::sqrt(2.0);
    cplx e = std::polar(sign ? -r : r, omega);
    return from_amplitudes({cplx(r, 0.0), e});
}

double StateVector::norm_sq() const {
    double n = 0.0;
    for (const cplx& a : amps_) {
        n += std::norm(a);
    }
    return n;
}

void StateVector::check_qubit(int qubit) const {
    require(qubit >= 0 && qubit < num_qubits_, "StateVector: qubit index out of range");
}

void StateVector::apply_single(int qubit, const Matrix& u) {
    check_qubit(qubit);
    require(u.dim() == 2, "apply_single: expects a 2x2 unitary");
    std::size_t stride = std::size_t(1) << (num_qubits_ - 1 - qubit);
    for (std::size_t base = 0; base < amps_.size(); base += 2 * stride) {
        for (std::size_t off = 0; off < stride; ++off) {
            cplx a0 = amps_[base + off];
            cplx a1 = amps_[base + off + stride];
            amps_[base + off] = u(0, 0) * a0 + u(0, 1) * a1;
            amps_[base + off + stride] = u(1, 0) * a0 + u(1, 1) * a1;
        }
    }
}

void StateVector::apply_two(int q1, int q2, const Matrix& u4) {
    check_qubit(q1);
    check_qubit(q2);
    require(q1 != q2, "apply_two: qubits must differ");
    require(u4.dim() == 4, "apply_two: expects a 4x4 unitary");
    std::size_t b1 = std::size_t(1) << (num_qubits_ - 1 - q1);
    std::size_t b2 = std::size_t(1) << (num_qubits_ - 1 - q2);
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        if ((i & b1) || (i & b2)) {
            continue;
        }
        std::size_t idx[4] = {i, i | b2, i | b1, i | b1 | b2};
        cplx v[4];
        for (int r = 0; r < 4; ++r) {
            v[r] = amps_[idx[r]];
        }
        for (int r = 0; r < 4; ++r) {
            cplx acc(0.0, 0.0);
            for (int c = 0; c < 4; ++c) {
                acc += u4(r, c) * v[c];
            }
            amps_[idx[r]] = acc;
        }
    }
}

void StateVector::apply_cz(int q1, int q2) {
    check_qubit(q1);
    check_qubit(q2);
    require(q1 != q2, "apply_cz: qubits must differ");
    std::size_t b1 = std::size_t(1) << (num_qubits_ - 1 - q1);
    std::size_t b2 = std::size_t(1) << (num_qubits_ - 1 - q2);
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        if ((i & b1) && (i & b2)) {
            amps_[i] = -amps_[i];
        }
    }
}

double StateVector::project_planar(int qubit, double delta, int outcome) {
    check_qubit(qubit);
    std::size_t stride = std::size_t(1) << (num_qubits_ - 1 - qubit);
    double r = 1.0 / std::sqrt(2.0);
    cplx phase = std::polar(outcome ? -r : r, -delta);

    std::vector<cplx> next(amps_.size() / 2);
    std::size_t out = 0;
    for (std::size_t base = 0; base < amps_.size(); base += 2 * stride) {
        for (std::size_t off = 0; off < stride; ++off) {
            next[out++] = r * amps_[base + off] + phase * amps_[base + off + stride];
        }
    }
    double prob = 0.0;
    for (const cplx& a : next) {
        prob += std::norm(a);
    }
    if (prob > 0.0) {
        double inv = 1.0 / std::sqrt(prob);
        for (cplx& a : next) {
            a *= inv;
        }
    }
    amps_ = std::move(next);
    --num_qubits_;
    return prob;
}

double StateVector::project_z(int qubit, int outcome) {
    check_qubit(qubit);
    std::size_t stride = std::size_t(1) << (num_qubits_ - 1 - qubit);
    std::vector<cplx> next(amps_.size() / 2);
    std::size_t out = 0;
    for (std::size_t base = 0; base < amps_.size(); base += 2 * stride) {
        for (std::size_t off = 0; off < stride; ++off) {
            next[out++] = amps_[base + off + (outcome ? stride : 0)];
        }
    }
    double prob = 0.0;
    for (const cplx& a : next) {
        prob += std::norm(a);
    }
    if (prob > 0.0) {
        double inv = 1.0 / std::sqrt(prob);
        for (cplx& a : next) {
            a *= inv;
        }
    }
    amps_ = std::move(next);
    --num_qubits_;
    return prob;
}

int StateVector::measure_planar(int qubit, double delta, Rng& rng) {
    StateVector plus_branch = *this;
    double p_plus = plus_branch.project_planar(qubit, delta, 0);
    int outcome = (rng.uniform() < p_plus) ? 0 : 1;
    if (outcome == 0) {
        *this = std::move(plus_branch);
    } else {
        project_planar(qubit, delta, 1);
    }
    return outcome;
}

int StateVector::measure_z(int qubit, Rng& rng) {
    StateVector zero_branch = *this;
    double p_zero = zero_branch.project_z(qubit, 0);
    int outcome = (rng.uniform() < p_zero) ? 0 : 1;
    if (outcome == 0) {
        *this = std::move(zero_branch);
    } else {
        project_z(qubit, 1);
    }
    return outcome;
}

void StateVector::extend_with(const StateVector& fresh) {
    require(num_qubits_ + fresh.num_qubits_ <= max_qubits(), "extend_with: register would exceed the qubit cap");
    std::vector<cplx> next(amps_.size() * fresh.amps_.size());
    std::size_t out = 0;
    for (const cplx& a : amps_) {
        for (const cplx& b : fresh.amps_) {
            next[out++] = a * b;
        }
    }
    amps_ = std::move(next);
    num_qubits_ += fresh.num_qubits_;
}

double fidelity(const StateVector& a, const StateVector& b) {
    require(a.num_qubits_ == b.num_qubits_, "fidelity: qubit counts differ");
    cplx overlap(0.0, 0.0);
    for (std::size_t i = 0; i < a.amps_.size(); ++i) {
        overlap += std::conj(a.amps_[i]) * b.amps_[i];
    }
    return std::norm(overlap);
}

Matrix StateVector::reduced_density(int qubit) const {
    check_qubit(qubit);
    std::size_t stride = std::size_t(1) << (num_qubits_ - 1 - qubit);
    Matrix rho(2);
    for (std::size_t base = 0; base < amps_.size(); base += 2 * stride) {
        for (std::size_t off = 0; off < stride; ++off) {
            cplx a0 = amps_[base + off];
            cplx a1 = amps_[base + off + stride];
            rho(0, 0) += a0 * std::conj(a0);
            rho(0, 1) += a0 * std::conj(a1);
            rho(1, 0) += a1 * std::conj(a0);
            rho(1, 1) += a1 * std::conj(a1);
        }
    }
    return rho;
}

Matrix ensemble_density(const std::vector<std::pair<StateVector, double>>& ensemble) {
    double total = 0.0;
    for (const auto& [state, prob] : ensemble) {
        require(state.num_qubits() == 1, "ensemble_density: expects single-qubit states");
        total += prob;
    }
    require(std::abs(total - 1.0) <= 1e-9, "ensemble_density: probabilities must sum to 1");
    Matrix rho(2);
    for (const auto& [state, prob] : ensemble) {
        cplx a0 = state.amplitude(0);
        cplx a1 = state.amplitude(1);
        rho(0, 0) += prob * a0 * std::conj(a0);
        rho(0, 1) += prob * a0 * std::conj(a1);
        rho(1, 0) += prob * a1 * std::conj(a0);
        rho(1, 1) += prob * a1 * std::conj(a1);
    }
    return rho;
}

} // namespace hubqc
