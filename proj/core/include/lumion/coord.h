#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <functional>
#include <string>

namespace lumion {

enum class Axis { kX = 0, kY = 1, kZ = 2 };

inline constexpr std::array<Axis, 3> kAllAxes = {Axis::kX, Axis::kY, Axis::kZ};

// Integer lattice point. Used for TPU coordinates, server coordinates and
// offsets alike; ordering is lexicographic (x, then y, then z).
struct Coord {
  int x = 0;
  int y = 0;
  int z = 0;

  constexpr int operator[](Axis a) const {
    return a == Axis::kX ? x : (a == Axis::kY ? y : z);
  }
  constexpr int& operator[](Axis a) {
    return a == Axis::kX ? x : (a == Axis::kY ? y : z);
  }

  friend constexpr Coord operator+(Coord a, Coord b) {
    return {a.x + b.x, a.y + b.y, a.z + b.z};
  }
  friend constexpr Coord operator-(Coord a, Coord b) {
    return {a.x - b.x, a.y - b.y, a.z - b.z};
  }
  friend constexpr auto operator<=>(const Coord&, const Coord&) = default;
};

constexpr int Volume(Coord extent) { return extent.x * extent.y * extent.z; }

constexpr int ManhattanDistance(Coord a, Coord b) {
  auto abs = [](int v) { return v < 0 ? -v : v; };
  return abs(a.x - b.x) + abs(a.y - b.y) + abs(a.z - b.z);
}

// Floor division, so negative coordinates of spare servers map correctly.
constexpr int FloorDiv(int a, int b) {
  int q = a / b;
  return (a % b != 0 && ((a < 0) != (b < 0))) ? q - 1 : q;
}

constexpr int Mod(int a, int m) {
  int r = a % m;
  return r < 0 ? r + m : r;
}

std::string ToString(Coord c);
std::string ToString(Axis a);

struct CoordHash {
  std::size_t operator()(const Coord& c) const {
    std::size_t h = std::hash<int>{}(c.x);
    h = h * 1000003u ^ std::hash<int>{}(c.y);
    h = h * 1000003u ^ std::hash<int>{}(c.z);
    return h;
  }
};

}  // namespace lumion
