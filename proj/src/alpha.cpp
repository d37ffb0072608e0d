#include "dgtopo/alpha.hpp"

#include <cmath>
#include <string>

#include "dgtopo/types.hpp"

namespace dgtopo {

namespace {

constexpr double kRhoTol = 1e-12;

void check_rho(double rho) {
  if (!std::isfinite(rho) || rho < -kRhoTol || rho > 1.0 + kRhoTol)
    throw DomainError("alpha: rho = " + std::to_string(rho) + " outside [0,1]");
}

}  // namespace

void validate(const AlphaModel& m) {
  if (!std::isfinite(m.alpha_bar) || m.alpha_bar < 0.0) throw DomainError("alpha: alpha_bar must be finite and >= 0");
  if (!std::isfinite(m.q) || !(m.q > 0.0)) throw DomainError("alpha: q must be finite and > 0");
}

double alpha(double rho, const AlphaModel& m) {
  validate(m);
  check_rho(rho);
  return m.alpha_bar * (1.0 - rho * (m.q + 1.0) / (rho + m.q));
}

double alpha_prime(double rho, const AlphaModel& m) {
  validate(m);
  check_rho(rho);
  const double d = rho + m.q;
  return -m.alpha_bar * m.q * (m.q + 1.0) / (d * d);
}

double alpha_second(double rho, const AlphaModel& m) {
  validate(m);
  check_rho(rho);
  const double d = rho + m.q;
  return 2.0 * m.alpha_bar * m.q * (m.q + 1.0) / (d * d * d);
}

}  // namespace dgtopo
