#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace polybubble::reduction {

// Axis-aligned box in dimension d <= 3
struct Box {
  std::vector<double> lo, hi;
  int dim() const { return static_cast<int>(lo.size()); }
};

using MapFn = std::function<std::vector<double>(const std::vector<double>&)>;

struct DegreeReport {
  Box box;
  int degree = 0;
  std::string method;       // "sign-change" | "winding" | "solid-angle" | "factorized"
  long boundary_samples = 0;
  double min_boundary_norm = 0;  // min |F| over boundary samples
  bool valid = false;
  std::string note;
};

// Brouwer degree of F on the box boundary from boundary data alone.
//   dim 1: sign change across the interval
//   dim 2: winding number of F along the boundary polygon
//   dim 3: sum of signed solid angles of the triangulated image sphere
// Throws if |F| on the boundary dips below 10x the per-step variation scale
// (a zero too close to the boundary makes the count unreliable).
DegreeReport degree_box(const MapFn& F, const Box& box, int resolution);

}  // namespace polybubble::reduction
