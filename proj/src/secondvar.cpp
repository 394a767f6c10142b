#include "ymindex/secondvar.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <cmath>

#include "ymindex/parallel.hpp"

namespace ymindex {

using Triplet = Eigen::Triplet<double>;

DofSpace::DofSpace(const Grid& grid, const NodeMask* region)
    : grid_(grid), slot_(grid.node_count(), -1), mask_(grid.node_count(), 0) {
  for (std::size_t n = 0; n < grid.node_count(); ++n) {
    if (grid.is_dirichlet(n) || (region && !(*region)[n])) continue;
    slot_[n] = static_cast<std::int64_t>(nodes_.size());
    mask_[n] = 1;
    nodes_.push_back(n);
  }
}

OneForm DofSpace::embed(const Eigen::VectorXd& x) const {
  if (x.size() != dim()) throw DomainError("vector length does not match the dof space");
  OneForm a(grid_);
  for (std::size_t s = 0; s < nodes_.size(); ++s) std::copy_n(x.data() + 12 * s, 12, a.at(nodes_[s], 0));
  return a;
}

Eigen::VectorXd DofSpace::restrict(const OneForm& a) const {
  if (a.grid() != grid_) throw GridMismatch();
  if (!is_dirichlet_compatible(a, &mask_)) throw DomainError("form does not vanish off the free nodes");
  Eigen::VectorXd x(dim());
  for (std::size_t s = 0; s < nodes_.size(); ++s) std::copy_n(a.at(nodes_[s], 0), 12, x.data() + 12 * s);
  return x;
}

namespace {

// <F, [a, a]> pointwise, summed with quadrature
double potential_term(const TwoForm& F, const OneForm& a) {
  return l2_inner(F, bracket(a, a));
}

// Rows of the 1D derivative matrix that touch column j, visited as (row offset, weight).
template <class Fn>
void for_column(const Grid& g, const std::array<int, 4>& idx, int axis, Fn&& fn) {
  const AxisStencil c = derivative_column(idx[static_cast<std::size_t>(axis)], g.points(), g.spacing());
  for (int k = 0; k < c.count; ++k) fn(c.offset[static_cast<std::size_t>(k)], c.weight[static_cast<std::size_t>(k)]);
}

// X x e_a, the bracket [X, e_a]
AlgebraElement bracket_basis(const AlgebraElement& X, int a) { return bracket(X, AlgebraElement::basis(a)); }

}  // namespace

double q_form(const Connection& A, const OneForm& a) {
  const TwoForm da = cov_d(A, a);
  return l2_norm_sq(da) + potential_term(curvature(A), a);
}

double calq_form(const Connection& A, const OneForm& a) {
  return q_form(A, a) + l2_norm_sq(cov_dstar(A, a));
}

AssembledForm::AssembledForm(const Connection& A, const WeightField& omega, const NodeMask* region,
                             AssemblyOptions opt)
    : dofs_(A.grid(), region), opt_(opt) {
  const Grid& g = A.grid();
  if (omega.grid != g) throw GridMismatch();
  if (dofs_.node_count() == 0) throw DomainError("no free nodes to assemble over");
  for (std::size_t n : dofs_.nodes())
    if (!(omega.values[n] > 0.0)) throw DomainError("weight must be positive on free nodes");

  const auto nodes = static_cast<Eigen::Index>(g.node_count());
  const Eigen::Index dim = dofs_.dim();
  std::vector<Triplet> td, ts, tp;
  td.reserve(static_cast<std::size_t>(dim) * 18);
  ts.reserve(static_cast<std::size_t>(dim) * 6);

  const TwoForm F = curvature(A);
  for (std::size_t s = 0; s < dofs_.node_count(); ++s) {
    const std::size_t m = dofs_.nodes()[s];
    const auto idx = g.index(m);
    for (int nu = 0; nu < 4; ++nu)
      for (int a = 0; a < 3; ++a) {
        const auto col = static_cast<Eigen::Index>(12 * s + 3 * nu + a);
        // d_A: (da)_{mu nu} = d_mu a_nu - d_nu a_mu, ([A,a])_{mu nu} = [A_mu, a_nu] - [A_nu, a_mu]
        for (int mu = 0; mu < 4; ++mu) {
          if (mu == nu) continue;
          const int k = pair_index(std::min(mu, nu), std::max(mu, nu));
          const double sg = mu < nu ? 1.0 : -1.0;
          for_column(g, idx, mu, [&](int off, double w) {
            const auto n = static_cast<Eigen::Index>(static_cast<std::ptrdiff_t>(m) + off * g.stride(mu));
            td.emplace_back(18 * n + 3 * k + a, col, sg * w);
          });
          const AlgebraElement b = bracket_basis(A.form.get(m, mu), a);
          for (int c = 0; c < 3; ++c)
            if (b.c[static_cast<std::size_t>(c)] != 0.0)
              td.emplace_back(18 * static_cast<Eigen::Index>(m) + 3 * k + c, col, sg * b.c[static_cast<std::size_t>(c)]);
        }
        // d_A^*: -sum_mu (d_mu a_mu + [A_mu, a_mu])
        if (opt.gauge_term) {
          for_column(g, idx, nu, [&](int off, double w) {
            const auto n = static_cast<Eigen::Index>(static_cast<std::ptrdiff_t>(m) + off * g.stride(nu));
            ts.emplace_back(3 * n + a, col, -w);
          });
          const AlgebraElement b = bracket_basis(A.form.get(m, nu), a);
          for (int c = 0; c < 3; ++c)
            if (b.c[static_cast<std::size_t>(c)] != 0.0)
              ts.emplace_back(3 * static_cast<Eigen::Index>(m) + c, col, -b.c[static_cast<std::size_t>(c)]);
        }
        // potential: (P a)_nu = (w/2) sum_mu [F_{mu nu}, a_mu]; row (nu, c), column (mu, a)
        if (opt.potential) {
          const double half_w = 0.5 * g.quadrature_weight(m);
          for (int mu = 0; mu < 4; ++mu) {
            if (mu == nu) continue;
            const int k = pair_index(std::min(mu, nu), std::max(mu, nu));
            const double sg = mu < nu ? 1.0 : -1.0;  // F_{mu nu} from the stored ordering
            const AlgebraElement b = bracket_basis(F.get(m, k), a);
            for (int c = 0; c < 3; ++c)
              if (b.c[static_cast<std::size_t>(c)] != 0.0)
                tp.emplace_back(static_cast<Eigen::Index>(12 * s + 3 * nu + c), static_cast<Eigen::Index>(12 * s + 3 * mu + a),
                                half_w * sg * b.c[static_cast<std::size_t>(c)]);
          }
        }
      }
  }
  D_.resize(18 * nodes, dim);
  D_.setFromTriplets(td.begin(), td.end());
  S_.resize(3 * nodes, dim);
  S_.setFromTriplets(ts.begin(), ts.end());
  P_.resize(dim, dim);
  P_.setFromTriplets(tp.begin(), tp.end());

  w2_.resize(18 * nodes);
  w0_.resize(3 * nodes);
  for (Eigen::Index n = 0; n < nodes; ++n) {
    const double w = 0.5 * g.quadrature_weight(static_cast<std::size_t>(n));
    w2_.segment(18 * n, 18).setConstant(w);
    w0_.segment(3 * n, 3).setConstant(w);
  }
  mass_.resize(dim);
  for (std::size_t s = 0; s < dofs_.node_count(); ++s) {
    const std::size_t m = dofs_.nodes()[s];
    mass_.segment(static_cast<Eigen::Index>(12 * s), 12).setConstant(0.5 * g.quadrature_weight(m) * omega.values[m]);
  }

  // diag K = column sums of Wq-weighted squares (+ P diagonal, which vanishes)
  diag_ = Eigen::VectorXd::Zero(dim);
  for (Eigen::Index r = 0; r < D_.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(D_, r); it; ++it) diag_[it.col()] += w2_[r] * it.value() * it.value();
  for (Eigen::Index r = 0; r < S_.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(S_, r); it; ++it) diag_[it.col()] += w0_[r] * it.value() * it.value();
  diag_ += P_.diagonal();
}

Eigen::VectorXd AssembledForm::apply(const Eigen::VectorXd& x) const {
  Eigen::VectorXd y = D_.transpose() * w2_.cwiseProduct(D_ * x);
  if (opt_.gauge_term) y += S_.transpose() * w0_.cwiseProduct(S_ * x);
  if (opt_.potential) y += P_ * x;
  return y;
}

double AssembledForm::energy(const Eigen::VectorXd& x) const { return x.dot(apply(x)); }

SparseMatrix AssembledForm::stiffness() const {
  SparseMatrix K = SparseMatrix(D_.transpose() * w2_.asDiagonal() * D_);
  if (opt_.gauge_term) K += SparseMatrix(S_.transpose() * w0_.asDiagonal() * S_);
  if (opt_.potential) K += P_;
  return K;
}

double AssembledForm::default_tau() const { return 1e-6 * diag_.maxCoeff() / mass_.minCoeff(); }

CoulombResult coulomb_project(const Connection& A, const OneForm& a, double tol) {
  const Grid& g = A.grid();
  if (a.grid() != g) throw GridMismatch();

  // scalar nodes: every node their gradient stencil touches is free
  std::vector<std::size_t> snodes;
  for (std::size_t n = 0; n < g.node_count(); ++n) {
    if (g.is_dirichlet(n)) continue;
    const auto idx = g.index(n);
    bool ok = true;
    for (int mu = 0; mu < 4; ++mu)
      for_column(g, idx, mu, [&](int off, double) {
        if (g.is_dirichlet(static_cast<std::size_t>(static_cast<std::ptrdiff_t>(n) + off * g.stride(mu)))) ok = false;
      });
    if (ok) snodes.push_back(n);
  }
  CoulombResult res{a, 0.0, 0.0, 0};
  if (snodes.empty()) return res;

  // G: scalar dofs -> 1-form values (all nodes), d_A phi = d phi + [A, phi]
  std::vector<Triplet> tg;
  for (std::size_t s = 0; s < snodes.size(); ++s) {
    const std::size_t m = snodes[s];
    const auto idx = g.index(m);
    for (int a0 = 0; a0 < 3; ++a0) {
      const auto col = static_cast<Eigen::Index>(3 * s + a0);
      for (int mu = 0; mu < 4; ++mu) {
        for_column(g, idx, mu, [&](int off, double w) {
          const auto n = static_cast<Eigen::Index>(static_cast<std::ptrdiff_t>(m) + off * g.stride(mu));
          tg.emplace_back(12 * n + 3 * mu + a0, col, w);
        });
        const AlgebraElement b = bracket_basis(A.form.get(m, mu), a0);
        for (int c = 0; c < 3; ++c)
          if (b.c[static_cast<std::size_t>(c)] != 0.0)
            tg.emplace_back(12 * static_cast<Eigen::Index>(m) + 3 * mu + c, col, b.c[static_cast<std::size_t>(c)]);
      }
    }
  }
  const auto rows = static_cast<Eigen::Index>(12 * g.node_count());
  Eigen::SparseMatrix<double> G(rows, static_cast<Eigen::Index>(3 * snodes.size()));
  G.setFromTriplets(tg.begin(), tg.end());
  Eigen::VectorXd q(rows);
  for (Eigen::Index n = 0; n < static_cast<Eigen::Index>(g.node_count()); ++n)
    q.segment(12 * n, 12).setConstant(g.quadrature_weight(static_cast<std::size_t>(n)));

  const Eigen::Map<const Eigen::VectorXd> av(a.raw().data(), rows);
  const Eigen::SparseMatrix<double> N = G.transpose() * q.asDiagonal() * G;
  const Eigen::VectorXd rhs = G.transpose() * q.cwiseProduct(av);
  if (rhs.norm() == 0.0) return res;

  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(tol);
  cg.setMaxIterations(static_cast<Eigen::Index>(10.0 * std::sqrt(static_cast<double>(N.rows()))) + 50);
  cg.compute(N);
  const Eigen::VectorXd phi = cg.solve(rhs);
  res.iterations = static_cast<int>(cg.iterations());
  res.relative_residual = (N * phi - rhs).norm() / rhs.norm();
  if (cg.info() != Eigen::Success && res.relative_residual > tol)
    throw ConvergenceError("Coulomb projection did not converge", res.relative_residual, res.iterations);

  const Eigen::VectorXd b = av - G * phi;
  std::copy_n(b.data(), rows, res.projected.raw().data());
  // divergence on the scalar nodes
  const ScalarGField div = cov_dstar(A, res.projected);
  double s = 0.0;
  for (std::size_t m : snodes)
    for (int c = 0; c < 3; ++c) s += g.quadrature_weight(m) * 0.5 * div.at(m, 0)[c] * div.at(m, 0)[c];
  res.divergence = std::sqrt(s);
  return res;
}

}  // namespace ymindex
