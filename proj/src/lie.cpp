#include "ymindex/lie.hpp"

#include <stdexcept>

namespace ymindex {

namespace {
const Complex kI(0.0, 1.0);

// Pauli matrices
const Mat2 kSigma[3] = {
    Mat2{{Complex(0.0), Complex(1.0), Complex(1.0), Complex(0.0)}},
    Mat2{{Complex(0.0), Complex(0.0, -1.0), Complex(0.0, 1.0), Complex(0.0)}},
    Mat2{{Complex(1.0), Complex(0.0), Complex(0.0), Complex(-1.0)}},
};
}  // namespace

Mat2 operator*(const Mat2& a, const Mat2& b) {
  Mat2 r = Mat2::zero();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r(i, j) = a(i, 0) * b(0, j) + a(i, 1) * b(1, j);
  return r;
}

Mat2 operator+(const Mat2& a, const Mat2& b) {
  Mat2 r = a;
  for (std::size_t i = 0; i < 4; ++i) r.m[i] += b.m[i];
  return r;
}

Mat2 operator-(const Mat2& a, const Mat2& b) {
  Mat2 r = a;
  for (std::size_t i = 0; i < 4; ++i) r.m[i] -= b.m[i];
  return r;
}

Mat2 operator*(Complex s, const Mat2& a) {
  Mat2 r = a;
  for (auto& v : r.m) v *= s;
  return r;
}

double frobenius(const Mat2& a) {
  double s = 0.0;
  for (const auto& v : a.m) s += std::norm(v);
  return std::sqrt(s);
}

Mat2 to_matrix(const AlgebraElement& x) {
  Mat2 r = Mat2::zero();
  for (int i = 0; i < 3; ++i) r = r + (Complex(0.0, -0.5) * x.c[static_cast<std::size_t>(i)]) * kSigma[i];
  return r;
}

Projection project_to_algebra(const Mat2& m) {
  // c_i = i tr(sigma_i M) for M in su(2); for general M keep the real part.
  Projection p;
  for (int i = 0; i < 3; ++i) p.value.c[static_cast<std::size_t>(i)] = std::real(kI * (kSigma[i] * m).trace());
  p.deviation = frobenius(m - to_matrix(p.value));
  return p;
}

GroupElement::GroupElement(const Mat2& m, double tol) : mat_(m) {
  if (unitarity_defect() > tol || det_defect() > tol)
    throw std::invalid_argument("GroupElement: matrix is not in SU(2)");
}

GroupElement GroupElement::inverse() const { return GroupElement(mat_.adjoint(), Unchecked{}); }

GroupElement GroupElement::operator*(const GroupElement& o) const {
  return GroupElement(mat_ * o.mat_, Unchecked{});
}

AlgebraElement GroupElement::conjugate(const AlgebraElement& x) const {
  return project_to_algebra(mat_.adjoint() * to_matrix(x) * mat_).value;
}

double GroupElement::unitarity_defect() const { return frobenius(mat_ * mat_.adjoint() - Mat2::identity()); }

double GroupElement::det_defect() const { return std::abs(mat_.det() - Complex(1.0)); }

GroupElement exp(const AlgebraElement& x) {
  // X = -(i/2) x.sigma, X^2 = -(|x|/2)^2 I, hence exp X = cos(t) I - i sin(t) n.sigma, t = |x|/2.
  const double len = std::sqrt(x.c[0] * x.c[0] + x.c[1] * x.c[1] + x.c[2] * x.c[2]);
  const double t = 0.5 * len;
  const double sinc = len > 0.0 ? std::sin(t) / len : 0.5;  // sin(t)/|x| -> 1/2
  Mat2 r = Complex(std::cos(t)) * Mat2::identity();
  for (int i = 0; i < 3; ++i)
    r = r + (Complex(0.0, -sinc) * x.c[static_cast<std::size_t>(i)]) * kSigma[i];
  return GroupElement(r, GroupElement::Unchecked{});
}

Quaternion Quaternion::coordinate(int mu) {
  switch (mu) {
    case 0: return real(1.0);
    case 1: return unit_i();
    case 2: return unit_j();
    case 3: return unit_k();
    default: throw std::out_of_range("Quaternion::coordinate");
  }
}

Quaternion operator*(const Quaternion& a, const Quaternion& b) {
  return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z, a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
          a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x, a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

Quaternion operator+(const Quaternion& a, const Quaternion& b) { return {a.w + b.w, a.x + b.x, a.y + b.y, a.z + b.z}; }
Quaternion operator-(const Quaternion& a, const Quaternion& b) { return {a.w - b.w, a.x - b.x, a.y - b.y, a.z - b.z}; }
Quaternion operator*(double s, const Quaternion& a) { return {s * a.w, s * a.x, s * a.y, s * a.z}; }

}  // namespace ymindex
