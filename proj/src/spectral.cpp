#include "ymindex/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace ymindex {

Pencil Pencil::from_form(const AssembledForm& form) {
  Pencil p;
  p.dim = form.dim();
  p.apply = [&form](const Eigen::VectorXd& x) { return form.apply(x); };
  p.mass = form.mass();
  p.stiffness_diagonal = form.stiffness_diagonal();
  return p;
}

Pencil Pencil::diagonal(const Eigen::VectorXd& k, const Eigen::VectorXd& w) {
  if (k.size() != w.size()) throw DomainError("diagonal pencil: size mismatch");
  Pencil p;
  p.dim = k.size();
  p.apply = [k](const Eigen::VectorXd& x) -> Eigen::VectorXd { return k.cwiseProduct(x); };
  p.mass = w;
  p.stiffness_diagonal = k;
  return p;
}

Pencil Pencil::with_mass(const Eigen::VectorXd& w) const {
  if (w.size() != dim) throw DomainError("mass size mismatch");
  if ((w.array() <= 0.0).any()) throw DomainError("mass must be positive");
  Pencil p = *this;
  p.mass = w;
  return p;
}

Eigen::MatrixXd Pencil::dense_stiffness() const {
  Eigen::MatrixXd K(dim, dim);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    e[j] = 1.0;
    K.col(j) = apply(e);
    e[j] = 0.0;
  }
  return 0.5 * (K + K.transpose());
}

void count_signature(SpectralReport& r, double tau) {
  r.tau = tau;
  r.morse_index = 0;
  r.nullity = 0;
  r.gap_below = std::numeric_limits<double>::quiet_NaN();
  r.gap_above = std::numeric_limits<double>::quiet_NaN();
  for (double l : r.eigenvalues) {
    if (l < -tau) {
      ++r.morse_index;
      r.gap_below = l;
    } else if (l <= tau) {
      ++r.nullity;
    } else if (std::isnan(r.gap_above)) {
      r.gap_above = l;
    }
  }
  r.signature = r.morse_index + r.nullity;
  r.complete = !std::isnan(r.gap_above);
}

namespace {

// Standard-form operator M = W^{-1/2} K W^{-1/2} on blocks.
struct StandardForm {
  const Pencil& P;
  Eigen::VectorXd isq;  // W^{-1/2}
  long matvecs = 0;

  explicit StandardForm(const Pencil& p) : P(p), isq(p.mass.cwiseSqrt().cwiseInverse()) {}

  Eigen::MatrixXd apply(const Eigen::MatrixXd& U) {
    Eigen::MatrixXd out(U.rows(), U.cols());
    for (Eigen::Index j = 0; j < U.cols(); ++j) {
      out.col(j) = isq.cwiseProduct(P.apply(isq.cwiseProduct(U.col(j))));
      ++matvecs;
    }
    return out;
  }

  // ||K v - l W v|| / ||W v|| for v = W^{-1/2} u, given r = M u - l u
  double pencil_residual(const Eigen::VectorXd& u, const Eigen::VectorXd& r) const {
    const Eigen::VectorXd sq = isq.cwiseInverse();
    return sq.cwiseProduct(r).norm() / sq.cwiseProduct(u).norm();
  }
};

Eigen::MatrixXd random_block(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::MatrixXd X(n, p);
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index i = 0; i < n; ++i) X(i, j) = nd(rng);
  return X;
}

// Orthonormalize B against the first `used` columns of V (two passes), then
// within itself; returns the surviving columns.
Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& V, Eigen::Index used, Eigen::MatrixXd B) {
  // block CGS2 against V, then column-wise within the block; a column that
  // lost most of its norm gets one more pass against V
  for (int pass = 0; pass < 2; ++pass)
    if (used > 0) B -= V.leftCols(used) * (V.leftCols(used).transpose() * B);
  Eigen::MatrixXd Q(B.rows(), B.cols());
  Eigen::Index m = 0;
  for (Eigen::Index j = 0; j < B.cols(); ++j) {
    Eigen::VectorXd v = B.col(j);
    const double before = v.norm();
    if (before == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass)
      if (m > 0) v -= Q.leftCols(m) * (Q.leftCols(m).transpose() * v);
    double after = v.norm();
    if (after < 1e-3 * before && used > 0) {
      v -= V.leftCols(used) * (V.leftCols(used).transpose() * v);
      if (m > 0) v -= Q.leftCols(m) * (Q.leftCols(m).transpose() * v);
      after = v.norm();
    }
    if (after < 1e-10 * before) continue;
    Q.col(m++) = v / after;
  }
  return Q.leftCols(m);
}

// (T - sigma) x = b for symmetric tridiagonal T, Gaussian elimination with
// partial pivoting; zero pivots are nudged to `tiny`.
Eigen::VectorXd tridiagonal_solve(const Eigen::VectorXd& diag, const Eigen::VectorXd& sub, double sigma,
                                  Eigen::VectorXd b, double tiny) {
  const Eigen::Index n = diag.size();
  Eigen::VectorXd d = diag.array() - sigma, du = sub, dl = sub, du2 = Eigen::VectorXd::Zero(std::max<Eigen::Index>(n - 2, 0));
  std::vector<char> piv(static_cast<std::size_t>(std::max<Eigen::Index>(n - 1, 0)), 0);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    if (std::abs(d[i]) >= std::abs(dl[i])) {
      if (d[i] == 0.0) d[i] = tiny;
      const double l = dl[i] / d[i];
      dl[i] = l;
      d[i + 1] -= l * du[i];
    } else {
      const double l = d[i] / dl[i];
      d[i] = dl[i];
      dl[i] = l;
      const double t = du[i];
      du[i] = d[i + 1];
      d[i + 1] = t - l * d[i + 1];
      if (i + 2 < n) {
        du2[i] = du[i + 1];
        du[i + 1] = -l * du[i + 1];
      }
      piv[static_cast<std::size_t>(i)] = 1;
    }
  }
  if (d[n - 1] == 0.0) d[n - 1] = tiny;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    if (piv[static_cast<std::size_t>(i)]) std::swap(b[i], b[i + 1]);
    b[i + 1] -= dl[i] * b[i];
  }
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    double v = b[i];
    if (i + 1 < n) v -= du[i] * b[i + 1];
    if (i + 2 < n) v -= du2[i] * b[i + 2];
    b[i] = v / d[i];
  }
  return b;
}

// Full dense solve; used when the inverse-iteration vectors are not accurate enough.
SpectralReport dense_full(const Eigen::MatrixXd& M, StandardForm& S, int k) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  if (es.info() != Eigen::Success) throw ConvergenceError("dense eigensolver failed", 0.0, 0);
  SpectralReport r;
  r.vectors.resize(M.rows(), k);
  for (int j = 0; j < k; ++j) {
    const double l = es.eigenvalues()[j];
    const Eigen::VectorXd u = es.eigenvectors().col(j);
    r.eigenvalues.push_back(l);
    r.residuals.push_back(S.pencil_residual(u, M * u - l * u));
    r.vectors.col(j) = S.isq.cwiseProduct(u);
  }
  return r;
}

// Householder tridiagonalization, all eigenvalues of T, then inverse
// iteration on T for the k wanted vectors (reorthogonalized within clusters)
// and back-transformation. Avoids accumulating the full eigenvector matrix.
SpectralReport dense_solve(const Pencil& P, int k, double tau, double tol) {
  StandardForm S(P);
  Eigen::MatrixXd M = S.isq.asDiagonal() * P.dense_stiffness() * S.isq.asDiagonal();
  M = 0.5 * (M + M.transpose());
  const Eigen::Index n = M.rows();

  // the tridiagonal QR needs the scaling the full solver applies internally
  double scale = M.cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) scale = 1.0;
  Eigen::Tridiagonalization<Eigen::MatrixXd> tri(M / scale);
  const Eigen::VectorXd diag = tri.diagonal();
  const Eigen::VectorXd sub = tri.subDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    SpectralReport r = dense_full(M, S, k);
    r.solver = "dense";
    r.matvecs = P.dim;
    count_signature(r, tau);
    return r;
  }

  const double tnorm = std::max(diag.cwiseAbs().maxCoeff() + 2.0 * (n > 1 ? sub.cwiseAbs().maxCoeff() : 0.0), 1e-300);
  const double tiny = std::numeric_limits<double>::epsilon() * tnorm;
  Eigen::MatrixXd X(n, k);
  std::mt19937_64 rng(0x594D4E4B);
  std::normal_distribution<double> nd;
  int cluster_start = 0;
  for (int j = 0; j < k; ++j) {
    const double l = es.eigenvalues()[j];
    if (j > 0 && l - es.eigenvalues()[j - 1] > 1e-3 * tnorm) cluster_start = j;
    Eigen::VectorXd x(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = nd(rng);
    for (int it = 0; it < 4; ++it) {
      for (int c = cluster_start; c < j; ++c) x -= X.col(c).dot(x) * X.col(c);
      x.normalize();
      x = tridiagonal_solve(diag, sub, l, x, tiny);
    }
    for (int pass = 0; pass < 2; ++pass)
      for (int c = cluster_start; c < j; ++c) x -= X.col(c).dot(x) * X.col(c);
    X.col(j) = x.normalized();
  }
  const Eigen::MatrixXd U = tri.matrixQ() * X;

  SpectralReport r;
  r.vectors.resize(n, k);
  bool ok = true;
  for (int j = 0; j < k; ++j) {
    const double l = scale * es.eigenvalues()[j];
    const Eigen::VectorXd u = U.col(j);
    r.eigenvalues.push_back(l);
    r.residuals.push_back(S.pencil_residual(u, M * u - l * u));
    r.vectors.col(j) = S.isq.cwiseProduct(u);
    if (!(r.residuals.back() <= tol)) ok = false;
  }
  if (!ok) r = dense_full(M, S, k);
  r.solver = "dense";
  r.matvecs = P.dim;
  count_signature(r, tau);
  return r;
}

SpectralReport lanczos_solve(const Pencil& P, int k, double tau, const SolverOptions& opt) {
  StandardForm S(P);
  const Eigen::Index n = P.dim;
  const Eigen::Index p = std::min<Eigen::Index>(n, k + opt.guard);
  // thick restart keeps 2p Ritz vectors; the expansion starts from the residuals of the first p
  const Eigen::Index retain = std::min<Eigen::Index>(n, 2 * p);
  const Eigen::Index cap = std::min<Eigen::Index>(n, retain + p * opt.block_steps);

  const bool jacobi = opt.jacobi && P.stiffness_diagonal.size() == n;
  Eigen::VectorXd diagM;
  double floor = 0.0;
  if (jacobi) {
    diagM = P.stiffness_diagonal.cwiseProduct(S.isq).cwiseProduct(S.isq);
    floor = 1e-3 * diagM.cwiseAbs().maxCoeff();
  }

  Eigen::MatrixXd X = orthonormalize(Eigen::MatrixXd(n, 0), 0, random_block(n, p, opt.seed));
  Eigen::MatrixXd MX = S.apply(X);
  Eigen::VectorXd theta;
  {
    Eigen::MatrixXd H = X.transpose() * MX;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (H + H.transpose()));
    X = X * es.eigenvectors();
    MX = MX * es.eigenvectors();
    theta = es.eigenvalues();
  }

  SpectralReport r;
  r.solver = "block-lanczos";
  r.valid = false;
  std::vector<double> res(static_cast<std::size_t>(X.cols()));
  Eigen::MatrixXd V(n, cap), MV(n, cap), H(cap, cap);
  for (int restart = 0; restart <= opt.max_restarts; ++restart) {
    const Eigen::MatrixXd R = MX - X * theta.asDiagonal();
    bool done = X.cols() >= k;
    res.resize(static_cast<std::size_t>(X.cols()));
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      res[static_cast<std::size_t>(j)] = S.pencil_residual(X.col(j), R.col(j));
      if (j < k && !(res[static_cast<std::size_t>(j)] <= opt.tol)) done = false;
    }
    r.iterations = restart;
    if (done) {
      r.valid = true;
      break;
    }
    if (restart == opt.max_restarts) break;

    // Krylov expansion from the residual block
    Eigen::Index used = X.cols();
    V.leftCols(used) = X;
    MV.leftCols(used) = MX;
    // projected matrix: Ritz values on the retained block, new columns as they come
    H.topLeftCorner(used, used) = theta.asDiagonal();
    // first block: Davidson correction (diag(M) - theta)^-1 r, then plain Krylov
    Eigen::MatrixXd B = R.leftCols(std::min<Eigen::Index>(p, R.cols()));
    if (jacobi)
      for (Eigen::Index j = 0; j < B.cols(); ++j) {
        const double t = theta[j];
        B.col(j) = B.col(j).cwiseQuotient((diagM.array() - t).abs().max(floor).matrix());
      }
    for (int step = 0; step < opt.block_steps && used < cap; ++step) {
      Eigen::MatrixXd Q = orthonormalize(V, used, B);
      if (Q.cols() == 0) break;
      if (used + Q.cols() > cap) Q = Q.leftCols(cap - used).eval();
      const Eigen::MatrixXd MQ = S.apply(Q);
      V.middleCols(used, Q.cols()) = Q;
      MV.middleCols(used, Q.cols()) = MQ;
      const Eigen::Index q = Q.cols();
      const Eigen::MatrixXd Hc = V.leftCols(used + q).transpose() * MQ;
      H.block(0, used, used + q, q) = Hc;
      H.block(used, 0, q, used) = Hc.topRows(used).transpose();
      used += q;
      B = MQ;
    }
    const Eigen::MatrixXd Hu = H.topLeftCorner(used, used);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (Hu + Hu.transpose()));
    const Eigen::Index keep = std::min<Eigen::Index>(retain, used);
    const Eigen::MatrixXd Y = es.eigenvectors().leftCols(keep);
    X = V.leftCols(used) * Y;
    MX = MV.leftCols(used) * Y;
    theta = es.eigenvalues().head(keep);
  }

  const Eigen::Index kk = std::min<Eigen::Index>(k, X.cols());
  r.vectors.resize(n, kk);
  for (Eigen::Index j = 0; j < kk; ++j) {
    r.eigenvalues.push_back(theta[j]);
    r.residuals.push_back(res[static_cast<std::size_t>(j)]);
    r.vectors.col(j) = S.isq.cwiseProduct(X.col(j));
  }
  r.matvecs = S.matvecs;
  count_signature(r, tau);
  return r;
}

}  // namespace

SpectralReport smallest_eigs(const Pencil& P, int k, double tau, const SolverOptions& opt) {
  if (k < 1 || k > P.dim) throw DomainError("requested eigenvalue count outside 1..dim");
  if ((P.mass.array() <= 0.0).any()) throw DomainError("mass must be positive");
  if (!(tau > 0.0)) tau = P.default_tau();
  const bool dense =
      opt.kind == SolverKind::dense || (opt.kind == SolverKind::automatic && P.dim < opt.dense_limit);
  SpectralReport r = dense ? dense_solve(P, k, tau, opt.tol) : lanczos_solve(P, k, tau, opt);
  if (dense)
    for (double v : r.residuals)
      if (!(v <= opt.tol)) r.valid = false;
  return r;
}

double largest_eig(const Pencil& P, int steps, std::uint64_t seed) {
  StandardForm S(P);
  const Eigen::Index m = std::min<Eigen::Index>(P.dim, steps);
  Eigen::MatrixXd V(P.dim, m);
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd v = random_block(P.dim, 1, seed).col(0);
  v.normalize();
  Eigen::Index used = 0;
  for (Eigen::Index j = 0; j < m; ++j) {
    V.col(j) = v;
    used = j + 1;
    Eigen::VectorXd w = S.apply(v);
    for (int pass = 0; pass < 2; ++pass) {
      const Eigen::VectorXd c = V.leftCols(used).transpose() * w;
      w -= V.leftCols(used) * c;
      if (pass == 0) T.col(j).head(used) = c;
    }
    const double beta = w.norm();
    if (j + 1 < m) {
      if (beta < 1e-12) break;
      T(j + 1, j) = beta;
      v = w / beta;
    }
  }
  Eigen::MatrixXd Tu = T.topLeftCorner(used, used);
  Tu = 0.5 * (Tu + Tu.transpose()).eval();
  // restore the symmetric tridiagonal coupling
  for (Eigen::Index j = 0; j + 1 < used; ++j) Tu(j, j + 1) = Tu(j + 1, j) = T(j + 1, j);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Tu, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[used - 1];
}

InertiaReport inertia_invariance_check(const Pencil& P, const Eigen::VectorXd& w2, int k, double tau,
                                       const SolverOptions& opt) {
  InertiaReport r;
  r.first = smallest_eigs(P, k, tau, opt);
  const Pencil Q = P.with_mass(w2);
  r.second = smallest_eigs(Q, k, tau > 0.0 ? tau * (P.mass.minCoeff() / w2.minCoeff()) : 0.0, opt);
  r.counts_match = r.first.valid && r.second.valid && r.first.complete && r.second.complete &&
                   r.first.morse_index == r.second.morse_index && r.first.nullity == r.second.nullity;
  return r;
}

InertiaReport inertia_invariance_check(const Connection& A, const WeightField& w1, const WeightField& w2, int k,
                                       double tau, const NodeMask* region, const SolverOptions& opt) {
  const AssembledForm f1(A, w1, region);
  const AssembledForm f2(A, w2, region);
  return inertia_invariance_check(Pencil::from_form(f1), f2.mass(), k, tau, opt);
}

SpectralReport extended_signature(const Connection& A, const WeightField& omega, int k, double tau,
                                  const NodeMask* region, const SolverOptions& opt) {
  const AssembledForm f(A, omega, region);
  return smallest_eigs(Pencil::from_form(f), k, tau, opt);
}

}  // namespace ymindex
