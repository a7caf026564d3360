#pragma once

#include <array>
#include <cstdint>

#include "hubqc/common.hpp"

namespace hubqc {

// Angle on the protocol grid {k*pi/4 | k = 0..7}, stored as the integer k
// modulo 8. All one-time-pad arithmetic is exact on this grid; radians only
// appear at the matrix boundary.
class GridAngle {
  public:
    constexpr GridAngle() : k_(0) {}
    constexpr explicit GridAngle(int k) : k_(((k % 8) + 8) % 8) {}

    constexpr int k() const { return k_; }
    double radians() const { return static_cast<double>(k_) * (kPi / 4.0); }

    constexpr GridAngle operator+(GridAngle o) const { return GridAngle(k_ + o.k_); }
    constexpr GridAngle operator-(GridAngle o) const { return GridAngle(k_ - o.k_); }
    constexpr GridAngle operator-() const { return GridAngle(-k_); }
    constexpr bool operator==(const GridAngle&) const = default;

    // Adds a half-turn when the pad bit is set: the xi = nu + r*pi map.
    constexpr GridAngle padded(int r) const { return GridAngle(k_ + 4 * r); }

    // Half-turn content (how many pi's), used by byproduct bookkeeping.
    constexpr bool is_half_turn_multiple() const { return k_ % 4 == 0; }

    static constexpr GridAngle pi() { return GridAngle(4); }

  private:
    int k_;
};

// The rotation-angle set S = {0, pi/4, pi/2, pi, 5pi/4, 3pi/2}: the union of
// the decomposition-table angles and their half-turn pads. Closed under +pi.
inline constexpr std::array<int, 6> kAngleSetS = {0, 1, 2, 4, 5, 6};

inline bool in_angle_set_s(GridAngle a) {
    for (int k : kAngleSetS) {
        if (a.k() == k) {
            return true;
        }
    }
    return false;
}

} // namespace hubqc
