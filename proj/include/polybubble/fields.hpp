#pragma once

#include <functional>
#include <string>
#include <utility>

#include "polybubble/bubbles.hpp"
#include "polybubble/vec.hpp"

namespace polybubble::fields {

// A scalar field with enough derivatives for the Pohozaev integrands.
struct ScalarField {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> grad;
  std::function<double(const Vec&)> lap;
};

// Pair (u, v) of evaluable fields.
struct FieldPair {
  ScalarField u, v;
  std::string provenance;  // "ansatz" | "residual" | "correction" | "custom"
};

// Exact synchronized pair (U, V) = (s w_{x,lambda}, kappa s w_{x,lambda});
// kappa_override detunes the second component for negative controls.
FieldPair make_sync_pair(const bubbles::CouplingData& c, const Vec& center, double lambda,
                         double kappa_override = -1.0);

inline ScalarField zero_field(int /*N*/) {
  return ScalarField{[](const Vec&) { return 0.0; },
                     [](const Vec& y) { return Vec(y.n); },
                     [](const Vec&) { return 0.0; }};
}

}  // namespace polybubble::fields
