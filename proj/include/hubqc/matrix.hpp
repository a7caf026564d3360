#pragma once

#include <cmath>
#include <initializer_list>
#include <vector>

#include "hubqc/common.hpp"

namespace hubqc {

// Dense complex matrix for small dimensions (2x2 gates up to the oracle-side
// 2^k unitaries). Row-major.
class Matrix {
  public:
    Matrix() : dim_(0) {}
    explicit Matrix(std::size_t dim) : dim_(dim), a_(dim * dim, cplx(0.0, 0.0)) {}
    Matrix(std::size_t dim, std::initializer_list<cplx> entries) : dim_(dim), a_(entries) {
        require(a_.size() == dim * dim, "Matrix: entry count does not match dimension");
    }

    static Matrix identity(std::size_t dim) {
        Matrix m(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            m(i, i) = 1.0;
        }
        return m;
    }

    std::size_t dim() const { return dim_; }
    cplx& operator()(std::size_t r, std::size_t c) { return a_[r * dim_ + c]; }
    const cplx& operator()(std::size_t r, std::size_t c) const { return a_[r * dim_ + c]; }

    Matrix operator*(const Matrix& o) const {
        require(dim_ == o.dim_, "Matrix: dimension mismatch in product");
        Matrix out(dim_);
        for (std::size_t i = 0; i < dim_; ++i) {
            for (std::size_t k = 0; k < dim_; ++k) {
                cplx v = a_[i * dim_ + k];
                if (v == cplx(0.0, 0.0)) {
                    continue;
                }
                for (std::size_t j = 0; j < dim_; ++j) {
                    out(i, j) += v * o(k, j);
                }
            }
        }
        return out;
    }

    Matrix operator*(cplx s) const {
        Matrix out = *this;
        for (auto& v : out.a_) {
            v *= s;
        }
        return out;
    }

    Matrix adjoint() const {
        Matrix out(dim_);
        for (std::size_t i = 0; i < dim_; ++i) {
            for (std::size_t j = 0; j < dim_; ++j) {
                out(j, i) = std::conj(a_[i * dim_ + j]);
            }
        }
        return out;
    }

    Matrix kron(const Matrix& o) const {
        Matrix out(dim_ * o.dim_);
        for (std::size_t i = 0; i < dim_; ++i) {
            for (std::size_t j = 0; j < dim_; ++j) {
                for (std::size_t k = 0; k < o.dim_; ++k) {
                    for (std::size_t l = 0; l < o.dim_; ++l) {
                        out(i * o.dim_ + k, j * o.dim_ + l) = a_[i * dim_ + j] * o(k, l);
                    }
                }
            }
        }
        return out;
    }

    // Largest entrywise absolute deviation.
    double distance(const Matrix& o) const {
        require(dim_ == o.dim_, "Matrix: dimension mismatch in distance");
        double d = 0.0;
        for (std::size_t i = 0; i < a_.size(); ++i) {
            d = std::max(d, std::abs(a_[i] - o.a_[i]));
        }
        return d;
    }

    // Deviation after factoring out the best global phase; 0 for matrices
    // equal up to e^{i*phi}.
    double distance_up_to_phase(const Matrix& o) const {
        require(dim_ == o.dim_, "Matrix: dimension mismatch in distance");
        cplx overlap(0.0, 0.0);
        for (std::size_t i = 0; i < a_.size(); ++i) {
            overlap += std::conj(o.a_[i]) * a_[i];
        }
        double mag = std::abs(overlap);
        cplx phase = mag > 0.0 ? overlap / mag : cplx(1.0, 0.0);
        double d = 0.0;
        for (std::size_t i = 0; i < a_.size(); ++i) {
            d = std::max(d, std::abs(a_[i] - phase * o.a_[i]));
        }
        return d;
    }

    bool is_unitary(double tol = kTolExact) const {
        return (adjoint() * *this).distance(identity(dim_)) <= tol;
    }

  private:
    std::size_t dim_;
    std::vector<cplx> a_;
};

} // namespace hubqc
