#pragma once

// Independent floating-point references used to cross-check exact code.

#include <cmath>
#include <vector>

#include <gmpxx.h>

namespace oracle {

using Vec = std::vector<long double>;

inline Vec to_ld(const std::vector<mpq_class>& v) {
  Vec r;
  for (const auto& x : v) r.push_back(static_cast<long double>(x.get_d()));
  return r;
}

inline Vec to_ld(const std::vector<mpz_class>& v) {
  Vec r;
  for (const auto& x : v) r.push_back(static_cast<long double>(x.get_d()));
  return r;
}

// ||v ^ w||^2 / (|v|^2 |w|^2) from explicit wedge components.
inline long double wedge_distance_sq(const Vec& v, const Vec& w) {
  long double wedge = 0, vv = 0, ww = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    vv += v[i] * v[i];
    ww += w[i] * w[i];
    for (std::size_t j = i + 1; j < v.size(); ++j) {
      long double c = v[i] * w[j] - v[j] * w[i];
      wedge += c * c;
    }
  }
  return wedge / (vv * ww);
}

// Points of span(a, b) sampled on a circle of directions.
inline std::vector<Vec> sample_plane(const Vec& a, const Vec& b, int steps) {
  std::vector<Vec> out;
  for (int i = 0; i < steps; ++i) {
    long double t = M_PIl * i / steps;
    Vec v(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) v[k] = std::cos(t) * a[k] + std::sin(t) * b[k];
    out.push_back(v);
  }
  return out;
}

inline long double min_distance_sq(const Vec& x, const std::vector<Vec>& set) {
  long double best = 10;
  for (const auto& y : set) best = std::min(best, wedge_distance_sq(x, y));
  return best;
}

// max over x in A of min over y in B, plus the symmetric term.
inline long double hausdorff_sq(const std::vector<Vec>& a, const std::vector<Vec>& b) {
  long double best = 0;
  for (const auto& x : a) best = std::max(best, min_distance_sq(x, b));
  for (const auto& y : b) best = std::max(best, min_distance_sq(y, a));
  return best;
}

}  // namespace oracle
