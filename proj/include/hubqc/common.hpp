#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace hubqc {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Tolerances used throughout: exact linear algebra is checked at 1e-12,
// table reconstructions at 1e-10, state fidelities at 1 - 1e-9.
inline constexpr double kTolExact = 1e-12;
inline constexpr double kTolTable = 1e-10;
inline constexpr double kTolFidelity = 1e-9;

class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) {
        throw Error(msg);
    }
}

} // namespace hubqc
