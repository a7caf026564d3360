#pragma once

#include <cmath>

#include "hubqc/matrix.hpp"

namespace hubqc {

enum class Axis { X, Y, Z };

// Rotation operators:
//   Rx(a) = [[cos a/2, -i sin a/2], [-i sin a/2, cos a/2]]
//   Ry(b) = [[cos b/2, -sin b/2], [sin b/2, cos b/2]]
//   Rz(g) = diag(e^{-ig/2}, e^{+ig/2})
// Half-turn specials follow: Rx(pi) = -iX, Ry(pi) = XZ, Rz(pi) = -iZ.
inline Matrix rotation(Axis axis, double angle) {
    double c = std::cos(angle / 2.0);
    double s = std::sin(angle / 2.0);
    switch (axis) {
    case Axis::X:
        return Matrix(2, {cplx(c, 0), cplx(0, -s), cplx(0, -s), cplx(c, 0)});
    case Axis::Y:
        return Matrix(2, {cplx(c, 0), cplx(-s, 0), cplx(s, 0), cplx(c, 0)});
    case Axis::Z:
        return Matrix(2, {std::polar(1.0, -angle / 2.0), cplx(0, 0), cplx(0, 0), std::polar(1.0, angle / 2.0)});
    }
    throw Error("rotation: bad axis");
}

namespace gates {

inline Matrix identity2() { return Matrix::identity(2); }
inline Matrix x() { return Matrix(2, {0, 1, 1, 0}); }
inline Matrix y() { return Matrix(2, {0, cplx(0, -1), cplx(0, 1), 0}); }
inline Matrix z() { return Matrix(2, {1, 0, 0, -1}); }
inline Matrix h() {
    double r = 1.0 / std::sqrt(2.0);
    return Matrix(2, {r, r, r, -r});
}
inline Matrix s() { return Matrix(2, {1, 0, 0, cplx(0, 1)}); }
inline Matrix t() { return Matrix(2, {1, 0, 0, std::polar(1.0, kPi / 4.0)}); }

// Phase gate P(theta) = diag(1, e^{i theta}).
inline Matrix p(double theta) { return Matrix(2, {1, 0, 0, std::polar(1.0, theta)}); }

inline Matrix cz() {
    Matrix m = Matrix::identity(4);
    m(3, 3) = -1.0;
    return m;
}

// Control on the first tensor factor.
inline Matrix cnot() {
    Matrix m(4);
    m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1.0;
    return m;
}

// Controlled-U with control on the first factor.
inline Matrix controlled(const Matrix& u) {
    require(u.dim() == 2, "controlled: expects a 2x2 target");
    Matrix m = Matrix::identity(4);
    m(2, 2) = u(0, 0);
    m(2, 3) = u(0, 1);
    m(3, 2) = u(1, 0);
    m(3, 3) = u(1, 1);
    return m;
}

} // namespace gates

// Gate propagated through a cluster chain by one planar measurement:
// W(theta) = (1/sqrt 2) [[1, e^{i theta}], [1, -e^{i theta}]] = H * P(theta).
inline Matrix w_gate(double theta) {
    double r = 1.0 / std::sqrt(2.0);
    cplx e = std::polar(1.0, theta);
    return Matrix(2, {r, r * e, r, -r * e});
}

} // namespace hubqc
