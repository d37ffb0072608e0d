#pragma once

namespace dgtopo {

/// Inverse permeability alpha(rho) = alpha_bar * (1 - rho (q + 1) / (rho + q)).
/// Strongly convex and decreasing on [0,1] with alpha(0) = alpha_bar, alpha(1) = 0.
struct AlphaModel {
  double alpha_bar = 2.5e4;
  double q = 0.1;
};

/// Throws DomainError when rho lies outside [0,1] by more than 1e-12 or the
/// model parameters are not positive and finite.
double alpha(double rho, const AlphaModel& model);
double alpha_prime(double rho, const AlphaModel& model);
double alpha_second(double rho, const AlphaModel& model);

void validate(const AlphaModel& model);

}  // namespace dgtopo
