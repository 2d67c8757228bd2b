#pragma once

// Reference computations for tests. These use plain loops and the standard library only, so
// they share no numerical code with the library under test.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;  // row-major

inline double dot(const Vec& a, const Vec& b) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<long double>(a[i]) * b[i];
  return static_cast<double>(s);
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double normal_tail_two_sided(double t) { return std::erfc(t / std::sqrt(2.0)); }

// Composite Simpson rule with an even number of panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels = 20000) {
  if (panels % 2) ++panels;
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// Projection onto the l1 ball by bisection on the soft-threshold level.
inline Vec l1_projection_bisect(const Vec& v, double r) {
  double l1 = 0.0;
  double hi = 0.0;
  for (double x : v) {
    l1 += std::abs(x);
    hi = std::max(hi, std::abs(x));
  }
  if (l1 <= r) return v;
  double lo = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    double s = 0.0;
    for (double x : v) s += std::max(std::abs(x) - mid, 0.0);
    (s > r ? lo : hi) = mid;
  }
  const double lam = 0.5 * (lo + hi);
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::copysign(std::max(std::abs(v[i]) - lam, 0.0), v[i]);
  return out;
}

// Projection onto {w : |w - c| <= r} via bisection on the multiplier of w = (v + mu c)/(1 + mu).
inline Vec l2_projection_bisect(const Vec& v, double r, const Vec& c) {
  auto at = [&](double mu) {
    Vec w(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) w[i] = (v[i] + mu * c[i]) / (1.0 + mu);
    return w;
  };
  auto dist = [&](const Vec& w) {
    Vec d(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) d[i] = w[i] - c[i];
    return norm2(d);
  };
  if (dist(v) <= r) return v;
  double lo = 0.0;
  double hi = 1.0;
  while (dist(at(hi)) > r) hi *= 2.0;
  for (int it = 0; it < 300; ++it) {
    const double mid = 0.5 * (lo + hi);
    (dist(at(mid)) > r ? lo : hi) = mid;
  }
  return at(hi);
}

// Coordinatewise ternary search of (w_j - v_j)^2 over [-h, h].
inline Vec box_projection_search(const Vec& v, double h) {
  Vec out(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) {
    double lo = -h;
    double hi = h;
    for (int it = 0; it < 200; ++it) {
      const double m1 = lo + (hi - lo) / 3.0;
      const double m2 = hi - (hi - lo) / 3.0;
      if ((m1 - v[j]) * (m1 - v[j]) < (m2 - v[j]) * (m2 - v[j])) {
        hi = m2;
      } else {
        lo = m1;
      }
    }
    out[j] = 0.5 * (lo + hi);
  }
  return out;
}

// Solves A x = b for symmetric positive definite A by Cholesky.
inline Vec cholesky_solve(Mat a, Vec b) {
  const std::size_t n = a.size();
  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j][j];
    for (std::size_t k = 0; k < j; ++k) d -= a[j][k] * a[j][k];
    a[j][j] = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i][j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i][k] * a[j][k];
      a[i][j] = s / a[j][j];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) b[i] -= a[i][k] * b[k];
    b[i] /= a[i][i];
  }
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t k = i + 1; k < n; ++k) b[i] -= a[k][i] * b[k];
    b[i] /= a[i][i];
  }
  return b;
}

// Least squares via the normal equations X^T X b = X^T y.
inline Vec normal_equations(const Mat& x, const Vec& y) {
  const std::size_t p = x.front().size();
  Mat g(p, Vec(p, 0.0));
  Vec r(p, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t a = 0; a < p; ++a) {
      r[a] += x[i][a] * y[i];
      for (std::size_t b = 0; b < p; ++b) g[a][b] += x[i][a] * x[i][b];
    }
  }
  return cholesky_solve(g, r);
}

struct EigenPair {
  double value = 0.0;
  Vec vector;
};

// Cyclic Jacobi rotations; returns the largest eigenpair of a symmetric matrix.
inline EigenPair jacobi_top_eigenpair(Mat a) {
  const std::size_t n = a.size();
  Mat v(n, Vec(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) off += a[i][j] * a[i][j];
    }
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p];
          const double akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k];
          const double aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k][p];
          const double vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (a[i][i] > a[best][best]) best = i;
  }
  EigenPair out;
  out.value = a[best][best];
  out.vector.resize(n);
  for (std::size_t k = 0; k < n; ++k) out.vector[k] = v[k][best];
  return out;
}

// Sample mean and standard error.
struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

inline MeanSe mean_se(const Vec& xs) {
  long double s = 0.0L;
  for (double x : xs) s += x;
  const double m = static_cast<double>(s / xs.size());
  long double ss = 0.0L;
  for (double x : xs) ss += (x - m) * (x - m);
  return {m, std::sqrt(static_cast<double>(ss / (xs.size() - 1)) / xs.size())};
}

}  // namespace oracle
