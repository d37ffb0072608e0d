#include "dgtopo/forms.hpp"

#include <algorithm>
#include <cmath>

#include "dgtopo/kernels.hpp"
#include "dgtopo/quadrature.hpp"

namespace dgtopo {

namespace {

using Triplet = Eigen::Triplet<double>;

void check_params(const DgParams& p) {
  if (!std::isfinite(p.nu) || !(p.nu > 0.0)) throw DomainError("DG parameters: nu must be positive and finite");
  if (!std::isfinite(p.sigma) || !(p.sigma > 0.0))
    throw DomainError("DG parameters: sigma must be positive and finite");
}

// Traces of up to 12 basis functions (both sides of a facet) at one facet point.
struct FacetTrace {
  int count = 0;
  int dofs[12];
  Vec2 jump[12];  // [[phi]] = jump (x) n
  Vec2 flux[12];  // {{grad phi}} n
};

void facet_traces(const BdmSpace& space, const Facet& F, const Vec2& x, FacetTrace& tr) {
  tr.count = 0;
  const bool boundary = F.is_boundary();
  const double avg = boundary ? 1.0 : 0.5;
  auto add_side = [&](int cell, double side) {
    const auto& basis = space.cell_basis(cell);
    const auto& dofs = space.cell_dofs(cell);
    const Vec2& origin = space.cell_origin(cell);
    for (int j = 0; j < kBdm1LocalDofs; ++j) {
      tr.dofs[tr.count] = dofs[j];
      tr.jump[tr.count] = side * basis[j].at(x, origin);
      tr.flux[tr.count] = avg * basis[j].grad * F.normal;
      ++tr.count;
    }
  };
  add_side(F.plus_cell, 1.0);
  if (!boundary) add_side(F.minus_cell, -1.0);
}

Vec2 facet_point(const Mesh& mesh, const Facet& F, double t) {
  const Vec2& a = mesh.vertex(F.vertices[0]);
  const Vec2& b = mesh.vertex(F.vertices[1]);
  return a + t * (b - a);
}

}  // namespace

BrinkmanOperator::BrinkmanOperator(std::shared_ptr<const BdmSpace> space, DgParams params)
    : space_(std::move(space)), params_(params) {
  check_params(params_);
  const BdmSpace& V = *space_;
  const Mesh& mesh = V.mesh();
  const int nc = mesh.num_cells();
  const double nu = params_.nu;
  const double sigma = params_.sigma;
  const QuadratureRule& cell_rule = cached_quadrature(QuadDomain::triangle, kDefaultCellDegree);
  const QuadratureRule& edge_rule = cached_quadrature(QuadDomain::edge, kDefaultEdgeDegree);

  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(nc) * 36 * 2 + static_cast<std::size_t>(mesh.num_facets()) * 144);
  mass_values_.assign(static_cast<std::size_t>(nc) * 36, 0.0);

  for (int c = 0; c < nc; ++c) {
    const auto& basis = V.cell_basis(c);
    const auto& dofs = V.cell_dofs(c);
    const Mat2 J = mesh.jacobian(c);
    const Vec2 x0 = mesh.vertex(mesh.cell(c)[0]);
    const double area = mesh.area(c);
    double* mass = &mass_values_[static_cast<std::size_t>(c) * 36];
    for (std::size_t q = 0; q < cell_rule.size(); ++q) {
      const Vec2 x = x0 + J * cell_rule.points[q];
      const double w = 2.0 * area * cell_rule.weights[q];
      Vec2 vals[kBdm1LocalDofs];
      for (int j = 0; j < kBdm1LocalDofs; ++j) vals[j] = basis[j].at(x, V.cell_origin(c));
      for (int i = 0; i < kBdm1LocalDofs; ++i)
        for (int j = 0; j < kBdm1LocalDofs; ++j) mass[6 * i + j] += w * vals[i].dot(vals[j]);
    }
    for (int i = 0; i < kBdm1LocalDofs; ++i) {
      for (int j = 0; j < kBdm1LocalDofs; ++j) {
        const double stiff = nu * area * (basis[i].grad.array() * basis[j].grad.array()).sum();
        trips.emplace_back(dofs[i], dofs[j], stiff);
      }
    }
  }

  FacetTrace tr;
  double local[12][12];
  for (const Facet& F : mesh.facets()) {
    const double penalty = nu * sigma / F.length;
    for (auto& row : local) std::fill(std::begin(row), std::end(row), 0.0);
    int count = 0;
    for (std::size_t q = 0; q < edge_rule.size(); ++q) {
      const Vec2 x = facet_point(mesh, F, edge_rule.points[q].x());
      const double w = edge_rule.weights[q] * F.length;
      facet_traces(V, F, x, tr);
      count = tr.count;
      for (int a = 0; a < count; ++a) {
        for (int b = 0; b < count; ++b) {
          local[a][b] += w * (penalty * tr.jump[a].dot(tr.jump[b]) - nu * tr.jump[a].dot(tr.flux[b]) -
                              nu * tr.jump[b].dot(tr.flux[a]));
        }
      }
    }
    for (int a = 0; a < count; ++a)
      for (int b = 0; b < count; ++b) trips.emplace_back(tr.dofs[a], tr.dofs[b], local[a][b]);
  }

  viscous_.resize(V.num_dofs(), V.num_dofs());
  viscous_.setFromTriplets(trips.begin(), trips.end());
  viscous_.makeCompressed();

  // Locate each mass entry inside the compressed pattern (the stiffness
  // triplets above already cover every (i, j) pair of a cell).
  mass_index_.resize(static_cast<std::size_t>(nc) * 36);
  const int* outer = viscous_.outerIndexPtr();
  const int* inner = viscous_.innerIndexPtr();
  for (int c = 0; c < nc; ++c) {
    const auto& dofs = V.cell_dofs(c);
    for (int i = 0; i < kBdm1LocalDofs; ++i) {
      for (int j = 0; j < kBdm1LocalDofs; ++j) {
        // Column-major: column dofs[j], row dofs[i].
        const int* begin = inner + outer[dofs[j]];
        const int* end = inner + outer[dofs[j] + 1];
        const int* it = std::lower_bound(begin, end, dofs[i]);
        mass_index_[static_cast<std::size_t>(c) * 36 + 6 * i + j] = static_cast<int>(it - inner);
      }
    }
  }
}

void BrinkmanOperator::evaluate_into(const Eigen::VectorXd& alpha_cell, SparseMatrix& A) const {
  const int nc = space_->mesh().num_cells();
  if (alpha_cell.size() != nc) throw DomainError("BrinkmanOperator: alpha vector has the wrong size");
  if (A.nonZeros() != viscous_.nonZeros()) A = viscous_;
  std::copy(viscous_.valuePtr(), viscous_.valuePtr() + viscous_.nonZeros(), A.valuePtr());
  double* values = A.valuePtr();
  for (int c = 0; c < nc; ++c) {
    const double a = alpha_cell[c];
    if (!std::isfinite(a)) throw DomainError("BrinkmanOperator: non-finite alpha");
    const std::size_t base = static_cast<std::size_t>(c) * 36;
    for (int k = 0; k < 36; ++k) values[mass_index_[base + k]] += a * mass_values_[base + k];
  }
}

SparseMatrix BrinkmanOperator::evaluate(const Eigen::VectorXd& alpha_cell) const {
  SparseMatrix A = viscous_;
  evaluate_into(alpha_cell, A);
  return A;
}

Eigen::VectorXd alpha_per_cell(const CellField& rho, const AlphaModel& model) {
  validate(model);
  const auto n = static_cast<std::size_t>(rho.values.size());
  for (std::size_t i = 0; i < n; ++i) {
    const double r = rho.values[i];
    if (!std::isfinite(r) || r < -1e-12 || r > 1.0 + 1e-12) throw DomainError("alpha_per_cell: rho outside [0,1]");
  }
  Eigen::VectorXd out(rho.values.size());
  kernels::active().alpha_values(rho.values.data(), n, model.alpha_bar, model.q, out.data());
  return out;
}

SparseMatrix assemble_a_h(const BdmSpace& space, const CellField& rho, const AlphaModel& model, DgParams params) {
  auto shared = std::shared_ptr<const BdmSpace>(&space, [](const BdmSpace*) {});
  BrinkmanOperator op(shared, params);
  return op.evaluate(alpha_per_cell(rho, model));
}

SparseMatrix assemble_b(const BdmSpace& space) {
  const Mesh& mesh = space.mesh();
  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(mesh.num_cells()) * 6);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto& basis = space.cell_basis(c);
    const auto& dofs = space.cell_dofs(c);
    for (int j = 0; j < kBdm1LocalDofs; ++j) trips.emplace_back(c, dofs[j], -mesh.area(c) * basis[j].divergence());
  }
  SparseMatrix B(mesh.num_cells(), space.num_dofs());
  B.setFromTriplets(trips.begin(), trips.end());
  B.makeCompressed();
  return B;
}

Eigen::VectorXd assemble_l_h(const BdmSpace& space, const CellVectorFunction& f, const BoundaryData& g,
                             DgParams params) {
  check_params(params);
  const Mesh& mesh = space.mesh();
  Eigen::VectorXd L = Eigen::VectorXd::Zero(space.num_dofs());
  if (f) {
    const QuadratureRule& rule = cached_quadrature(QuadDomain::triangle, kDefaultCellDegree + 2);
    for (int c = 0; c < mesh.num_cells(); ++c) {
      const auto& basis = space.cell_basis(c);
      const auto& dofs = space.cell_dofs(c);
      const Mat2 J = mesh.jacobian(c);
      const Vec2 x0 = mesh.vertex(mesh.cell(c)[0]);
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const Vec2 x = x0 + J * rule.points[q];
        const double w = 2.0 * mesh.area(c) * rule.weights[q];
        const Vec2 fx = f(c, x);
        for (int j = 0; j < kBdm1LocalDofs; ++j) L[dofs[j]] += w * fx.dot(basis[j].at(x, space.cell_origin(c)));
      }
    }
  }
  const QuadratureRule& edge_rule = cached_quadrature(QuadDomain::edge, kDefaultEdgeDegree);
  FacetTrace tr;
  for (int fi = 0; fi < mesh.num_facets(); ++fi) {
    const Facet& F = mesh.facet(fi);
    if (!F.is_boundary()) continue;
    if (g.c0[fi].isZero(0.0) && g.c1[fi].isZero(0.0)) continue;
    const double penalty = params.nu * params.sigma / F.length;
    for (std::size_t q = 0; q < edge_rule.size(); ++q) {
      const double t = edge_rule.points[q].x();
      const Vec2 x = facet_point(mesh, F, t);
      const double w = edge_rule.weights[q] * F.length;
      const Vec2 gh = g.g_h(fi, 2.0 * t - 1.0);
      facet_traces(space, F, x, tr);
      for (int a = 0; a < tr.count; ++a)
        L[tr.dofs[a]] += w * (penalty * gh.dot(tr.jump[a]) - params.nu * gh.dot(tr.flux[a]));
    }
  }
  return L;
}

double evaluate_J_h(const VelocityField& u, const CellField& rho, const BoundaryData& g, const AlphaModel& model,
                    DgParams params, const CellVectorFunction& f) {
  check_params(params);
  const Mesh& mesh = u.mesh();
  const double nu = params.nu;
  const QuadratureRule& cell_rule = cached_quadrature(QuadDomain::triangle, kDefaultCellDegree);
  const QuadratureRule& edge_rule = cached_quadrature(QuadDomain::edge, kDefaultEdgeDegree);
  std::vector<AffineVector> local(mesh.num_cells());
  for (int c = 0; c < mesh.num_cells(); ++c) local[c] = u.on_cell(c);

  double cell_part = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const double a = alpha(rho.values[c], model);
    const Mat2 J = mesh.jacobian(c);
    const Vec2 x0 = mesh.vertex(mesh.cell(c)[0]);
    const Vec2& origin = u.space->cell_origin(c);
    double sum = 0.0;
    for (std::size_t q = 0; q < cell_rule.size(); ++q) {
      const Vec2 x = x0 + J * cell_rule.points[q];
      const Vec2 v = local[c].at(x, origin);
      double integrand = 0.5 * a * v.squaredNorm();
      if (f) integrand -= f(c, x).dot(v);
      sum += cell_rule.weights[q] * integrand;
    }
    cell_part += 2.0 * mesh.area(c) * sum + 0.5 * nu * mesh.area(c) * local[c].grad.squaredNorm();
  }

  double facet_part = 0.0;
  for (int fi = 0; fi < mesh.num_facets(); ++fi) {
    const Facet& F = mesh.facet(fi);
    const double penalty = params.sigma / F.length;
    for (std::size_t q = 0; q < edge_rule.size(); ++q) {
      const double t = edge_rule.points[q].x();
      const Vec2 x = facet_point(mesh, F, t);
      const double w = edge_rule.weights[q] * F.length;
      Vec2 jump;
      Mat2 avg_grad;
      if (F.is_boundary()) {
        jump = local[F.plus_cell].at(x, u.space->cell_origin(F.plus_cell)) - g.g_h(fi, 2.0 * t - 1.0);
        avg_grad = local[F.plus_cell].grad;
      } else {
        jump = local[F.plus_cell].at(x, u.space->cell_origin(F.plus_cell)) -
               local[F.minus_cell].at(x, u.space->cell_origin(F.minus_cell));
        avg_grad = 0.5 * (local[F.plus_cell].grad + local[F.minus_cell].grad);
      }
      facet_part += w * (0.5 * nu * penalty * jump.squaredNorm() - nu * jump.dot(avg_grad * F.normal));
    }
  }
  return cell_part + facet_part;
}

SparseMatrix assemble_broken_h1_gram(const BdmSpace& space, bool include_boundary) {
  const Mesh& mesh = space.mesh();
  const QuadratureRule& cell_rule = cached_quadrature(QuadDomain::triangle, kDefaultCellDegree);
  const QuadratureRule& edge_rule = cached_quadrature(QuadDomain::edge, kDefaultEdgeDegree);
  std::vector<Triplet> trips;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto& basis = space.cell_basis(c);
    const auto& dofs = space.cell_dofs(c);
    const Mat2 J = mesh.jacobian(c);
    const Vec2 x0 = mesh.vertex(mesh.cell(c)[0]);
    const double area = mesh.area(c);
    for (int i = 0; i < kBdm1LocalDofs; ++i) {
      for (int j = 0; j < kBdm1LocalDofs; ++j) {
        double m = 0.0;
        for (std::size_t q = 0; q < cell_rule.size(); ++q) {
          const Vec2 x = x0 + J * cell_rule.points[q];
          m += 2.0 * area * cell_rule.weights[q] *
               basis[i].at(x, space.cell_origin(c)).dot(basis[j].at(x, space.cell_origin(c)));
        }
        trips.emplace_back(dofs[i], dofs[j], m + area * (basis[i].grad.array() * basis[j].grad.array()).sum());
      }
    }
  }
  FacetTrace tr;
  for (const Facet& F : mesh.facets()) {
    if (F.is_boundary() && !include_boundary) continue;
    for (std::size_t q = 0; q < edge_rule.size(); ++q) {
      facet_traces(space, F, facet_point(mesh, F, edge_rule.points[q].x()), tr);
      const double w = edge_rule.weights[q];  // |F| / h_F = 1
      for (int a = 0; a < tr.count; ++a)
        for (int b = 0; b < tr.count; ++b) trips.emplace_back(tr.dofs[a], tr.dofs[b], w * tr.jump[a].dot(tr.jump[b]));
    }
  }
  SparseMatrix G(space.num_dofs(), space.num_dofs());
  G.setFromTriplets(trips.begin(), trips.end());
  G.makeCompressed();
  return G;
}

double divergence_norm(const VelocityField& u) {
  const Mesh& mesh = u.mesh();
  const int nc = mesh.num_cells();
  Eigen::VectorXd div(nc), area(nc);
  for (int c = 0; c < nc; ++c) {
    div[c] = u.divergence(c);
    area[c] = mesh.area(c);
  }
  return std::sqrt(kernels::active().weighted_sum_squares(area.data(), div.data(), static_cast<std::size_t>(nc)));
}

PiecewiseEval as_piecewise(const VelocityField& u) {
  auto local = std::make_shared<std::vector<AffineVector>>(u.mesh().num_cells());
  for (int c = 0; c < u.mesh().num_cells(); ++c) (*local)[c] = u.on_cell(c);
  auto space = u.space;
  return [local, space](int c, const Vec2& x, Vec2& value, Mat2& grad) {
    value = (*local)[c].at(x, space->cell_origin(c));
    grad = (*local)[c].grad;
  };
}

BrokenNorms broken_norms(const Mesh& mesh, const PiecewiseEval& v, const VectorFunction& g, int cell_degree,
                         int edge_degree) {
  const QuadratureRule& cell_rule = cached_quadrature(QuadDomain::triangle, cell_degree);
  const QuadratureRule& edge_rule = cached_quadrature(QuadDomain::edge, edge_degree);
  double l2 = 0.0, grad2 = 0.0, jump2 = 0.0, bnd2 = 0.0;
  Vec2 val, val2;
  Mat2 grad, grad2m;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const Mat2 J = mesh.jacobian(c);
    const Vec2 x0 = mesh.vertex(mesh.cell(c)[0]);
    const double scale = 2.0 * mesh.area(c);
    for (std::size_t q = 0; q < cell_rule.size(); ++q) {
      v(c, x0 + J * cell_rule.points[q], val, grad);
      l2 += scale * cell_rule.weights[q] * val.squaredNorm();
      grad2 += scale * cell_rule.weights[q] * grad.squaredNorm();
    }
  }
  for (const Facet& F : mesh.facets()) {
    for (std::size_t q = 0; q < edge_rule.size(); ++q) {
      const Vec2 x = facet_point(mesh, F, edge_rule.points[q].x());
      const double w = edge_rule.weights[q];  // times |F| / h_F = 1
      v(F.plus_cell, x, val, grad);
      if (F.is_boundary()) {
        const Vec2 gx = g ? g(x) : Vec2::Zero();
        bnd2 += w * (val - gx).squaredNorm();
      } else {
        v(F.minus_cell, x, val2, grad2m);
        jump2 += w * (val - val2).squaredNorm();
      }
    }
  }
  BrokenNorms n;
  n.l2 = std::sqrt(l2);
  n.h1_seminorm = std::sqrt(grad2 + jump2);
  n.h1 = std::sqrt(l2 + grad2 + jump2);
  n.h1_g = std::sqrt(l2 + grad2 + jump2 + bnd2);
  return n;
}

TracePairing trace_pairing(const VelocityField& v, const VelocityField& w) {
  const Mesh& mesh = v.mesh();
  const QuadratureRule& edge_rule = cached_quadrature(QuadDomain::edge, kDefaultEdgeDegree);
  TracePairing out;
  double jump2 = 0.0, grad2 = 0.0;
  for (int c = 0; c < mesh.num_cells(); ++c) grad2 += mesh.area(c) * w.gradient(c).squaredNorm();
  for (const Facet& F : mesh.facets()) {
    if (F.is_boundary()) continue;
    const AffineVector vp = v.on_cell(F.plus_cell), vm = v.on_cell(F.minus_cell);
    const Mat2 avg = 0.5 * (w.gradient(F.plus_cell) + w.gradient(F.minus_cell));
    for (std::size_t q = 0; q < edge_rule.size(); ++q) {
      const Vec2 x = facet_point(mesh, F, edge_rule.points[q].x());
      const double wq = edge_rule.weights[q] * F.length;
      const Vec2 jump = vp.at(x, v.space->cell_origin(F.plus_cell)) - vm.at(x, v.space->cell_origin(F.minus_cell));
      out.pairing += wq * std::abs(jump.dot(avg * F.normal));
      jump2 += wq / F.length * jump.squaredNorm();
    }
  }
  out.jump_seminorm = std::sqrt(jump2);
  out.grad_l2 = std::sqrt(grad2);
  return out;
}

}  // namespace dgtopo
