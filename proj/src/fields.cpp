#include "polybubble/fields.hpp"

namespace polybubble::fields {

FieldPair make_sync_pair(const bubbles::CouplingData& c, const Vec& center, double lambda,
                         double kappa_override) {
  const double kap = kappa_override > 0 ? kappa_override : c.kappa;
  const bubbles::BubbleParams bp(center, lambda);
  const bubbles::Dimension dim = c.dim;
  const double s = c.s;

  auto jet = [bp, dim](const Vec& y) { return bubbles::bubble_jet(bp, y, dim); };

  FieldPair fp;
  fp.provenance = "custom";
  fp.u.value = [jet, s](const Vec& y) { return s * jet(y).w; };
  fp.u.grad = [jet, s](const Vec& y) { return s * jet(y).grad; };
  fp.u.lap = [jet, s](const Vec& y) { return s * jet(y).lap; };
  const double a = kap * s;
  fp.v.value = [jet, a](const Vec& y) { return a * jet(y).w; };
  fp.v.grad = [jet, a](const Vec& y) { return a * jet(y).grad; };
  fp.v.lap = [jet, a](const Vec& y) { return a * jet(y).lap; };
  return fp;
}

}  // namespace polybubble::fields
