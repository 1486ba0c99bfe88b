#include <cmath>
#include <numbers>

#include "modamp/errors.hpp"
#include "modamp/experiments.hpp"

namespace modamp {

double PerturbativePrediction::singlet_weight(double t) const { return (5.0 - 3.0 * std::cos(4.0 * j_i_star * t)) / 8.0; }

double PerturbativePrediction::entanglement(double t) const {
  const double p = singlet_weight(t);
  return p > 0.5 ? 1.0 - binary_entropy(p) : 0.0;
}

PerturbativePrediction perturbative_prediction(const ModuleSpec& left, const ModuleSpec& right,
                                               const NumericOptions& options) {
  PerturbativePrediction p;
  p.gap_left = energy_gap(left, {}, options.eigen);
  p.gap_right = energy_gap(right, {}, options.eigen);
  if (p.gap_left.degenerate || p.gap_right.degenerate)
    throw DomainError("perturbative prediction needs nondegenerate module ground states");
  p.j_eff_left = p.gap_left.delta / 4.0;
  p.j_eff_right = p.gap_right.delta / 4.0;
  p.j_i_star = p.j_eff_left + p.j_eff_right;
  // j_i_star is an absolute energy; the chain's dimensionless bond is j_i_star / J.
  p.t_opt_pred = std::numbers::pi / (4.0 * p.j_i_star);
  return p;
}

}  // namespace modamp
