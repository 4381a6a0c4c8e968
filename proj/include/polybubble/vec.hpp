#pragma once

#include <array>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>

namespace polybubble {

// Small fixed-capacity vector for points in R^N, N <= kMaxDim.
// Heap-free so that bubble evaluations stay cheap inside Monte Carlo loops.
inline constexpr int kMaxDim = 12;

struct Vec {
  std::array<double, kMaxDim> v{};
  int n = 0;

  Vec() = default;
  explicit Vec(int dim) : n(dim) { assert(dim >= 0 && dim <= kMaxDim); }
  Vec(std::initializer_list<double> xs) : n(static_cast<int>(xs.size())) {
    assert(n <= kMaxDim);
    int i = 0;
    for (double x : xs) v[i++] = x;
  }

  double& operator[](int i) { return v[static_cast<size_t>(i)]; }
  double operator[](int i) const { return v[static_cast<size_t>(i)]; }
  int size() const { return n; }

  Vec& operator+=(const Vec& o) {
    for (int i = 0; i < n; ++i) v[i] += o.v[i];
    return *this;
  }
  Vec& operator-=(const Vec& o) {
    for (int i = 0; i < n; ++i) v[i] -= o.v[i];
    return *this;
  }
  Vec& operator*=(double c) {
    for (int i = 0; i < n; ++i) v[i] *= c;
    return *this;
  }
};

inline Vec operator+(Vec a, const Vec& b) { return a += b; }
inline Vec operator-(Vec a, const Vec& b) { return a -= b; }
inline Vec operator*(double c, Vec a) { return a *= c; }
inline Vec operator*(Vec a, double c) { return a *= c; }

inline double dot(const Vec& a, const Vec& b) {
  double s = 0;
  for (int i = 0; i < a.n; ++i) s += a.v[i] * b.v[i];
  return s;
}

inline double norm2(const Vec& a) { return dot(a, a); }
inline double norm(const Vec& a) { return std::sqrt(norm2(a)); }

inline double dist2(const Vec& a, const Vec& b) {
  double s = 0;
  for (int i = 0; i < a.n; ++i) {
    const double d = a.v[i] - b.v[i];
    s += d * d;
  }
  return s;
}
inline double dist(const Vec& a, const Vec& b) { return std::sqrt(dist2(a, b)); }

inline Vec zero_vec(int n) { return Vec(n); }

}  // namespace polybubble
