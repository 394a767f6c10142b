#pragma once

// Second variation of the Yang-Mills energy.
//
//   Q_A(a)  = ||d_A a||^2 + <F_A, [a, a]>
//   QQ_A(a) = Q_A(a) + ||d_A^* a||^2
//
// Discretized in weak form over the Dirichlet degrees of freedom: with D the
// sparse d_A, S the sparse d_A^*, and P the pointwise bracket potential,
//   K = D^T Wq D + S^T Wq S + P,   a^T K a = QQ_A(a)
// and W = diag(quadrature * omega / 2), a^T W a = ||a||^2_omega.

#include <Eigen/Sparse>
#include <cstdint>
#include <vector>

#include "ymindex/connection.hpp"

namespace ymindex {

// Free 1-form degrees of freedom: dof = slot * 12 + mu * 3 + alg.
class DofSpace {
 public:
  DofSpace() = default;
  // Nodes off the Dirichlet layers, further restricted by `region` if given.
  explicit DofSpace(const Grid& grid, const NodeMask* region = nullptr);

  const Grid& grid() const { return grid_; }
  std::size_t node_count() const { return nodes_.size(); }
  Eigen::Index dim() const { return static_cast<Eigen::Index>(12 * nodes_.size()); }
  const std::vector<std::size_t>& nodes() const { return nodes_; }
  // -1 when the node carries no degrees of freedom
  std::int64_t slot(std::size_t node) const { return slot_[node]; }
  const NodeMask& mask() const { return mask_; }

  OneForm embed(const Eigen::VectorXd& x) const;
  // Values at free nodes; throws DomainError if `a` is nonzero elsewhere.
  Eigen::VectorXd restrict(const OneForm& a) const;

 private:
  Grid grid_;
  std::vector<std::size_t> nodes_;
  std::vector<std::int64_t> slot_;
  NodeMask mask_;
};

double q_form(const Connection& A, const OneForm& a);
double calq_form(const Connection& A, const OneForm& a);

struct AssemblyOptions {
  bool gauge_term = true;  // include ||d_A^* a||^2 (QQ); false gives Q
  bool potential = true;   // include <F, [a, a]>; false gives the Hodge pencil
};

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

class AssembledForm {
 public:
  // Throws DomainError if omega is not positive on a free node or no node is free.
  AssembledForm(const Connection& A, const WeightField& omega, const NodeMask* region = nullptr,
                AssemblyOptions opt = {});

  const DofSpace& dofs() const { return dofs_; }
  Eigen::Index dim() const { return dofs_.dim(); }
  const Eigen::VectorXd& mass() const { return mass_; }
  const Eigen::VectorXd& stiffness_diagonal() const { return diag_; }
  const AssemblyOptions& options() const { return opt_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;  // K x
  double energy(const Eigen::VectorXd& x) const;           // x^T K x
  // Explicit K (sparse product); use only for small problems.
  SparseMatrix stiffness() const;

  // Zero threshold 1e-6 * max diag K / min diag W.
  double default_tau() const;

 private:
  DofSpace dofs_;
  AssemblyOptions opt_;
  SparseMatrix D_, S_, P_;
  Eigen::VectorXd w2_, w0_, mass_, diag_;
};

struct CoulombResult {
  OneForm projected;
  double divergence = 0.0;  // ||d_A^* projected|| on the scalar nodes
  double relative_residual = 0.0;
  int iterations = 0;
};

// a - d_A phi with phi the least-squares solution of d_A phi = a over scalar
// fields supported on nodes whose neighbours are all free. There the normal
// equations coincide with d_A^* d_A phi = d_A^* a. Throws ConvergenceError.
CoulombResult coulomb_project(const Connection& A, const OneForm& a, double tol = 1e-10);

}  // namespace ymindex
