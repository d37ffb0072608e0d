#include <algorithm>
#include <cmath>
#include <string>

#include "dgtopo/kernels.hpp"
#include "dgtopo/topopt.hpp"

namespace dgtopo {

namespace {

constexpr int kBisectionSteps = 200;

// rho_K for the linearized (deflated) step at multiplier lambda.
double deflated_rho(double c, double d, double q) {
  if (d <= 0.0) return c > 0.0 || d < 0.0 ? 1.0 : 0.0;
  return std::clamp(std::sqrt(c / d) - q, 0.0, 1.0);
}

}  // namespace

int MaterialState::count(CellBound b) const {
  return static_cast<int>(std::count(bounds.begin(), bounds.end(), b));
}

RhoStep solve_rho_step(const RhoStepInput& in, const AlphaModel& model) {
  validate(model);
  const std::size_t n = in.energy.size();
  if (in.area.size() != n || (!in.linear.empty() && in.linear.size() != n))
    throw DomainError("rho-step: energy, area and linear term sizes differ");
  if (!(in.scale > 0.0) || !std::isfinite(in.scale)) throw DomainError("rho-step: scale must be positive");
  if (!(in.volume_bound >= 0.0)) throw DomainError("rho-step: negative volume bound");
  for (std::size_t k = 0; k < n; ++k) {
    if (!(in.energy[k] >= 0.0) || !std::isfinite(in.energy[k]))
      throw DomainError("rho-step: cell energy " + std::to_string(k) + " is negative or not finite");
    if (!(in.area[k] > 0.0)) throw DomainError("rho-step: non-positive cell area");
  }

  const double q = model.q;
  // Stationarity: s alpha'(rho) m / 2 + l_K + lambda |K| = 0 with
  // alpha'(rho) = -alpha_bar q (q + 1) / (rho + q)^2.
  std::vector<double> c(n);
  const double k2 = 0.5 * in.scale * model.alpha_bar * q * (q + 1.0);
  for (std::size_t k = 0; k < n; ++k) c[k] = k2 * in.energy[k];

  RhoStep out;
  out.rho.assign(n, 0.0);
  const bool plain = in.linear.empty();

  if (plain) {
    // rho = clamp(sqrt(coef / lambda) - q, 0, 1) with coef = c / |K|.
    std::vector<double> coef(n);
    double fluid = 0.0;
    double hi = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      coef[k] = c[k] / in.area[k];
      if (c[k] > 0.0) {
        out.rho[k] = 1.0;
        fluid += in.area[k];
      }
      hi = std::max(hi, coef[k] / (q * q));
    }
    if (fluid <= in.volume_bound) {
      out.volume = fluid;
      return out;
    }
    const auto& kt = kernels::active();
    if (!(hi > 0.0) || !std::isfinite(hi)) throw SolverError("rho-step: cannot bracket the volume multiplier");
    hi *= 1.0 + 1e-12;
    if (kt.volume_at_multiplier(coef.data(), in.area.data(), n, hi, q, nullptr) > in.volume_bound)
      throw SolverError("rho-step: cannot bracket the volume multiplier");
    double lo = 0.0;
    for (int it = 0; it < kBisectionSteps && hi - lo > 1e-16 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (kt.volume_at_multiplier(coef.data(), in.area.data(), n, mid, q, nullptr) > in.volume_bound)
        lo = mid;
      else
        hi = mid;
    }
    out.lambda = hi;
    out.volume = kt.volume_at_multiplier(coef.data(), in.area.data(), n, hi, q, out.rho.data());
    return out;
  }

  auto volume_at = [&](double lambda, double* rho) {
    double vol = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double r = deflated_rho(c[k], in.linear[k] + lambda * in.area[k], q);
      if (rho) rho[k] = r;
      vol += r * in.area[k];
    }
    return vol;
  };
  const double v0 = volume_at(0.0, out.rho.data());
  if (v0 <= in.volume_bound) {
    out.volume = v0;
    return out;
  }
  double hi = 0.0;
  for (std::size_t k = 0; k < n; ++k) hi = std::max(hi, (c[k] / (q * q) - in.linear[k]) / in.area[k]);
  hi = std::max(hi, 0.0) * (1.0 + 1e-12) + 1e-300;
  if (!std::isfinite(hi) || volume_at(hi, nullptr) > in.volume_bound)
    throw SolverError("rho-step: cannot bracket the volume multiplier");
  double lo = 0.0;
  for (int it = 0; it < kBisectionSteps && hi - lo > 1e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (volume_at(mid, nullptr) > in.volume_bound)
      lo = mid;
    else
      hi = mid;
  }
  out.lambda = hi;
  out.volume = volume_at(hi, out.rho.data());
  return out;
}

std::vector<CellBound> classify_bounds(const CellField& rho) {
  std::vector<CellBound> b(rho.values.size());
  for (Eigen::Index k = 0; k < rho.values.size(); ++k) {
    const double r = rho.values[k];
    b[k] = r <= 0.0 ? CellBound::lower : (r >= 1.0 ? CellBound::upper : CellBound::interior);
  }
  return b;
}

MaterialState rho_update(const Eigen::VectorXd& energy, std::shared_ptr<const Mesh> mesh, const AlphaModel& model,
                         double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw DomainError("rho_update: gamma must lie in (0, 1]");
  const int nc = mesh->num_cells();
  if (energy.size() != nc) throw DomainError("rho_update: energy vector does not match the mesh");
  std::vector<double> area(nc);
  for (int c = 0; c < nc; ++c) area[c] = mesh->area(c);
  RhoStepInput in;
  in.energy = std::span<const double>(energy.data(), nc);
  in.area = area;
  in.volume_bound = gamma * mesh->total_area();
  const RhoStep step = solve_rho_step(in, model);

  MaterialState state;
  state.rho = CellField(mesh, Eigen::Map<const Eigen::VectorXd>(step.rho.data(), nc));
  state.lambda_vol = step.lambda;
  state.bounds = classify_bounds(state.rho);
  return state;
}

MaterialState rho_update(const VelocityField& u, const AlphaModel& model, double gamma) {
  return rho_update(cell_energy_density(u), u.space->mesh_ptr(), model, gamma);
}

CellField project_admissible(const CellField& rho, double gamma) {
  const Mesh& mesh = *rho.mesh;
  const int nc = mesh.num_cells();
  const double bound = gamma * mesh.total_area();
  auto volume_at = [&](double mu, Eigen::VectorXd* out) {
    double vol = 0.0;
    for (int c = 0; c < nc; ++c) {
      const double r = std::clamp(rho.values[c] - mu, 0.0, 1.0);
      if (out) (*out)[c] = r;
      vol += r * mesh.area(c);
    }
    return vol;
  };
  CellField out(rho.mesh);
  if (volume_at(0.0, &out.values) <= bound) return out;
  double lo = 0.0;
  double hi = std::max(0.0, rho.values.maxCoeff()) + 1.0;
  for (int it = 0; it < kBisectionSteps && hi - lo > 1e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (volume_at(mid, nullptr) > bound)
      lo = mid;
    else
      hi = mid;
  }
  volume_at(hi, &out.values);
  return out;
}

double l2_distance(const CellField& a, const CellField& b) {
  if (a.mesh != b.mesh && a.mesh->num_cells() != b.mesh->num_cells())
    throw DomainError("l2_distance: fields live on different meshes");
  const Eigen::VectorXd d = a.values - b.values;
  std::vector<double> area(d.size());
  for (Eigen::Index c = 0; c < d.size(); ++c) area[c] = a.mesh->area(static_cast<int>(c));
  return std::sqrt(kernels::active().weighted_sum_squares(area.data(), d.data(), d.size()));
}

}  // namespace dgtopo
