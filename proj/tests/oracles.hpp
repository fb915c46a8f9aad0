#pragma once

// Independent reference computations used by the tests. None of these call
// into the library's numerical code.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace oracle {

inline double gauss(double x, double var) { return std::exp(-0.5 * x * x / var) / std::sqrt(2.0 * M_PI * var); }

// Neumann heat solution v_t = v_xx / 2 on [0, inf) at a point, by images,
// from u0 given on [0, support]; adaptive quadrature of the image integral.
inline double images_point(const std::function<double(double)>& u0, double support, double t, double x) {
  using boost::math::quadrature::gauss_kronrod;
  auto f = [&](double y) { return u0(y) * (gauss(x - y, t) + gauss(x + y, t)); };
  return gauss_kronrod<double, 61>::integrate(f, 0.0, support, 12, 1e-13);
}

// Cell averages of images_point on [0, n dx) using the 2-point Gauss rule
// on 8 sub-cells per cell.
inline std::vector<double> images_cells(const std::function<double(double)>& u0, double support, double t,
                                        std::size_t n, double dx) {
  std::vector<double> v(n);
  const double g = 0.5 / std::sqrt(3.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int k = 0; k < 8; ++k) {
      const double c = (static_cast<double>(i) + (k + 0.5) / 8.0) * dx;
      const double h = dx / 8.0;
      acc += 0.5 * (images_point(u0, support, t, c - g * h) + images_point(u0, support, t, c + g * h));
    }
    v[i] = acc / 8.0;
  }
  return v;
}

// Bisection on the monotone scalar map u -> u + mu * b(u) for a graph with a
// single jump at a (values b(a-) <= b(a+)).
struct JumpGraph {
  double a, lo, hi;  // b(u) = lo u / a below a, hi u / a above
  double left(double u) const { return u < a ? lo * u / a : (u == a ? lo : hi * u / a); }
  double right(double u) const { return u < a ? lo * u / a : hi * u / a; }
};

inline std::pair<double, double> resolvent_bisect(const JumpGraph& g, double mu, double y) {
  double l = 0.0;
  double r = y;
  for (int k = 0; k < 200; ++k) {
    const double m = 0.5 * (l + r);
    if (m + mu * g.left(m) > y) {
      r = m;
    } else if (m + mu * g.right(m) < y) {
      l = m;
    } else {
      l = r = m;
      break;
    }
  }
  const double u = 0.5 * (l + r);
  return {u, (y - u) / mu};
}

// Dvoretzky-Kiefer-Wolfowitz: P(sup |F_N - F| > e) <= 2 exp(-2 N e^2).
inline double dkw_radius(std::size_t n, double alpha) {
  return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(n)));
}

// Kolmogorov distance of a sample to a continuous CDF.
inline double kolmogorov(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, std::abs(f - static_cast<double>(i) / n), std::abs(static_cast<double>(i + 1) / n - f)});
  }
  return d;
}

// Direct dense solve (Gaussian elimination with partial pivoting).
inline std::vector<double> dense_solve(std::vector<std::vector<double>> A, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(A[r][c]) > std::abs(A[p][c])) p = r;
    }
    std::swap(A[c], A[p]);
    std::swap(b[c], b[p]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = A[r][c] / A[c][c];
      for (std::size_t k = c; k < n; ++k) A[r][k] -= f * A[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= A[i][k] * x[k];
    x[i] = s / A[i][i];
  }
  return x;
}

}  // namespace oracle
