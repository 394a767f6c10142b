#pragma once

// su(2) and SU(2) in the basis e_i = -(i/2) sigma_i.
//
// With this basis [e_i, e_j] = eps_ijk e_k, so the bracket is the cross
// product of coefficient vectors, and <X,Y> := -tr(XY) = (1/2) X.Y.

#include <array>
#include <cmath>
#include <complex>

namespace ymindex {

using Vec4 = std::array<double, 4>;
using Complex = std::complex<double>;

struct AlgebraElement {
  std::array<double, 3> c{0.0, 0.0, 0.0};

  static AlgebraElement basis(int i) {
    AlgebraElement e;
    e.c[static_cast<std::size_t>(i)] = 1.0;
    return e;
  }

  double& operator[](std::size_t i) { return c[i]; }
  double operator[](std::size_t i) const { return c[i]; }

  AlgebraElement& operator+=(const AlgebraElement& o) {
    for (std::size_t i = 0; i < 3; ++i) c[i] += o.c[i];
    return *this;
  }
  AlgebraElement& operator-=(const AlgebraElement& o) {
    for (std::size_t i = 0; i < 3; ++i) c[i] -= o.c[i];
    return *this;
  }
  AlgebraElement& operator*=(double s) {
    for (auto& v : c) v *= s;
    return *this;
  }
  bool operator==(const AlgebraElement&) const = default;
};

inline AlgebraElement operator+(AlgebraElement a, const AlgebraElement& b) { return a += b; }
inline AlgebraElement operator-(AlgebraElement a, const AlgebraElement& b) { return a -= b; }
inline AlgebraElement operator-(AlgebraElement a) { return a *= -1.0; }
inline AlgebraElement operator*(double s, AlgebraElement a) { return a *= s; }
inline AlgebraElement operator*(AlgebraElement a, double s) { return a *= s; }

inline AlgebraElement bracket(const AlgebraElement& x, const AlgebraElement& y) {
  return {{x.c[1] * y.c[2] - x.c[2] * y.c[1], x.c[2] * y.c[0] - x.c[0] * y.c[2],
           x.c[0] * y.c[1] - x.c[1] * y.c[0]}};
}

inline double inner(const AlgebraElement& x, const AlgebraElement& y) {
  return 0.5 * (x.c[0] * y.c[0] + x.c[1] * y.c[1] + x.c[2] * y.c[2]);
}

inline double norm(const AlgebraElement& x) { return std::sqrt(inner(x, x)); }

// 2x2 complex matrix, row-major.
struct Mat2 {
  std::array<Complex, 4> m{Complex(1.0), Complex(0.0), Complex(0.0), Complex(1.0)};

  static Mat2 identity() { return {}; }
  static Mat2 zero() { return Mat2{{Complex(0.0), Complex(0.0), Complex(0.0), Complex(0.0)}}; }

  Complex& operator()(int r, int c) { return m[static_cast<std::size_t>(2 * r + c)]; }
  const Complex& operator()(int r, int c) const { return m[static_cast<std::size_t>(2 * r + c)]; }

  Mat2 adjoint() const { return Mat2{{std::conj(m[0]), std::conj(m[2]), std::conj(m[1]), std::conj(m[3])}}; }
  Complex trace() const { return m[0] + m[3]; }
  Complex det() const { return m[0] * m[3] - m[1] * m[2]; }
};

Mat2 operator*(const Mat2& a, const Mat2& b);
Mat2 operator+(const Mat2& a, const Mat2& b);
Mat2 operator-(const Mat2& a, const Mat2& b);
Mat2 operator*(Complex s, const Mat2& a);
double frobenius(const Mat2& a);

Mat2 to_matrix(const AlgebraElement& x);

struct Projection {
  AlgebraElement value;
  double deviation = 0.0;  // Frobenius norm of the part outside su(2)
};

// Orthogonal projection of an arbitrary 2x2 complex matrix onto su(2).
Projection project_to_algebra(const Mat2& m);

class GroupElement {
 public:
  GroupElement() = default;
  // Throws std::invalid_argument when the matrix is not in SU(2) within tol.
  explicit GroupElement(const Mat2& m, double tol = 1e-12);

  static GroupElement identity() { return {}; }

  const Mat2& matrix() const { return mat_; }
  GroupElement inverse() const;
  GroupElement operator*(const GroupElement& o) const;

  // g^{-1} X g
  AlgebraElement conjugate(const AlgebraElement& x) const;

  double unitarity_defect() const;
  double det_defect() const;

 private:
  struct Unchecked {};
  GroupElement(const Mat2& m, Unchecked) : mat_(m) {}
  friend GroupElement exp(const AlgebraElement& x);
  Mat2 mat_{};
};

GroupElement exp(const AlgebraElement& x);

struct Quaternion {
  double w = 0.0, x = 0.0, y = 0.0, z = 0.0;

  static Quaternion real(double r) { return {r, 0.0, 0.0, 0.0}; }
  static Quaternion unit_i() { return {0.0, 1.0, 0.0, 0.0}; }
  static Quaternion unit_j() { return {0.0, 0.0, 1.0, 0.0}; }
  static Quaternion unit_k() { return {0.0, 0.0, 0.0, 1.0}; }
  // Coordinate basis (1, i, j, k) of H = R^4.
  static Quaternion coordinate(int mu);

  Quaternion conj() const { return {w, -x, -y, -z}; }
  double norm2() const { return w * w + x * x + y * y + z * z; }
};

Quaternion operator*(const Quaternion& a, const Quaternion& b);
Quaternion operator+(const Quaternion& a, const Quaternion& b);
Quaternion operator-(const Quaternion& a, const Quaternion& b);
Quaternion operator*(double s, const Quaternion& a);

// i, j, k -> e1, e2, e3; real part dropped.
inline AlgebraElement quat_to_algebra(const Quaternion& q) { return {{q.x, q.y, q.z}}; }

// Bracket-preserving identification Im H -> su(2): i,j,k -> 2e1, 2e2, 2e3.
// ([i,j] = 2k in H while [e1,e2] = e3 in su(2).)
inline AlgebraElement quat_to_algebra_hom(const Quaternion& q) { return 2.0 * quat_to_algebra(q); }

}  // namespace ymindex
