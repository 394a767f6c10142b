#pragma once

// Smallest eigenpairs of symmetric pencils K v = lambda W v with W diagonal
// positive, and the counts read off them (index, nullity, extended signature).

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ymindex/secondvar.hpp"

namespace ymindex {

struct Pencil {
  Eigen::Index dim = 0;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> apply;  // K x
  Eigen::VectorXd mass;                                           // diag W
  Eigen::VectorXd stiffness_diagonal;                             // diag K

  static Pencil from_form(const AssembledForm& form);
  // K = diag(k), W = diag(w)
  static Pencil diagonal(const Eigen::VectorXd& k, const Eigen::VectorXd& w);
  Pencil with_mass(const Eigen::VectorXd& w) const;

  double default_tau() const { return 1e-6 * stiffness_diagonal.maxCoeff() / mass.minCoeff(); }
  // K as a dense matrix (dim matvecs).
  Eigen::MatrixXd dense_stiffness() const;
};

enum class SolverKind { automatic, dense, lanczos };

struct SolverOptions {
  SolverKind kind = SolverKind::automatic;
  Eigen::Index dense_limit = 3000;  // automatic picks dense below this many dofs
  double tol = 1e-8;                // ||K v - lambda W v|| / ||W v||
  int guard = 8;                    // extra block vectors beyond k
  int block_steps = 5;              // Krylov blocks per restart
  bool jacobi = true;               // diagonal preconditioning of the first block after a restart
  int max_restarts = 400;
  std::uint64_t seed = 0x594D4E4B;
};

struct SpectralReport {
  std::vector<double> eigenvalues;  // ascending
  std::vector<double> residuals;    // pencil residual per pair
  int morse_index = 0;              // lambda < -tau
  int nullity = 0;                  // |lambda| <= tau
  int signature = 0;                // morse_index + nullity
  double tau = 0.0;
  double gap_below = 0.0;  // largest computed eigenvalue below -tau, or nan
  double gap_above = 0.0;  // smallest computed eigenvalue above tau, or nan
  bool complete = true;    // false if every computed eigenvalue is <= tau (counts are lower bounds)
  bool valid = true;       // false if the solver did not converge
  std::string solver;
  int iterations = 0;  // restarts (iterative) or 0
  long matvecs = 0;
  Eigen::MatrixXd vectors;  // columns: W-orthonormal eigenvectors (may be empty)
};

// k smallest generalized eigenpairs. tau <= 0 selects Pencil::default_tau().
// Throws DomainError for k > dim or k < 1.
SpectralReport smallest_eigs(const Pencil& P, int k, double tau = 0.0, const SolverOptions& opt = {});

// Largest eigenvalue, by a short Lanczos run (relative accuracy ~1e-6).
double largest_eig(const Pencil& P, int steps = 60, std::uint64_t seed = 0x594D4E4B);

// Fill the counts of a report from its eigenvalues and tau.
void count_signature(SpectralReport& r, double tau);

struct InertiaReport {
  SpectralReport first, second;
  bool counts_match = false;
};

// Same K, two weights: index and nullity must agree (Sylvester).
InertiaReport inertia_invariance_check(const Connection& A, const WeightField& w1, const WeightField& w2, int k,
                                       double tau, const NodeMask* region = nullptr, const SolverOptions& opt = {});
InertiaReport inertia_invariance_check(const Pencil& P, const Eigen::VectorXd& w2, int k, double tau,
                                       const SolverOptions& opt = {});

// Extended signature: counts of the QQ pencil.
SpectralReport extended_signature(const Connection& A, const WeightField& omega, int k, double tau,
                                  const NodeMask* region = nullptr, const SolverOptions& opt = {});

}  // namespace ymindex
