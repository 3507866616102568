#pragma once

#include <cmath>

namespace pseudogap {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  double norm() const { return std::hypot(x, y); }
};

// Plain 2x2 real matrix in double precision. Transfer matrices built from it
// stay in SL(2,R) up to roundoff.
struct Mat2 {
  double a11 = 1.0, a12 = 0.0;
  double a21 = 0.0, a22 = 1.0;

  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  // J generates rotations; conjugation by it swaps the diagonal of D_kappa.
  static Mat2 rotation_j() { return {0.0, -1.0, 1.0, 0.0}; }
  static Mat2 symm_s() { return {0.0, 1.0, 1.0, 0.0}; }
  static Mat2 diag_p() { return {1.0, 0.0, 0.0, -1.0}; }
  static Mat2 diag(double d1, double d2) { return {d1, 0.0, 0.0, d2}; }
  static Mat2 zero() { return {0.0, 0.0, 0.0, 0.0}; }

  double det() const { return a11 * a22 - a12 * a21; }
  double trace() const { return a11 + a22; }
  double frobenius2() const { return a11 * a11 + a12 * a12 + a21 * a21 + a22 * a22; }

  // Operator 2-norm from the explicit singular-value formula.
  double norm() const {
    const double f = frobenius2();
    const double d = det();
    double disc = f * f - 4.0 * d * d;
    if (disc < 0.0) disc = 0.0;
    return std::sqrt(0.5 * (f + std::sqrt(disc)));
  }

  Mat2 inverse() const {
    const double d = det();
    return {a22 / d, -a12 / d, -a21 / d, a11 / d};
  }

  Mat2 transpose() const { return {a11, a21, a12, a22}; }
};

inline Mat2 operator*(const Mat2& a, const Mat2& b) {
  return {a.a11 * b.a11 + a.a12 * b.a21, a.a11 * b.a12 + a.a12 * b.a22,
          a.a21 * b.a11 + a.a22 * b.a21, a.a21 * b.a12 + a.a22 * b.a22};
}

inline Vec2 operator*(const Mat2& a, const Vec2& v) {
  return {a.a11 * v.x + a.a12 * v.y, a.a21 * v.x + a.a22 * v.y};
}

inline Mat2 operator*(double s, const Mat2& a) {
  return {s * a.a11, s * a.a12, s * a.a21, s * a.a22};
}

inline Mat2 operator+(const Mat2& a, const Mat2& b) {
  return {a.a11 + b.a11, a.a12 + b.a12, a.a21 + b.a21, a.a22 + b.a22};
}

inline Mat2 operator-(const Mat2& a, const Mat2& b) {
  return {a.a11 - b.a11, a.a12 - b.a12, a.a21 - b.a21, a.a22 - b.a22};
}

inline Mat2 commutator(const Mat2& a, const Mat2& b) { return a * b - b * a; }

}  // namespace pseudogap
