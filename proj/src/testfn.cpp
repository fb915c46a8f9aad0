#include "hlpm/testfn.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "hlpm/errors.hpp"

namespace hlpm {

namespace {

using Quad = boost::math::quadrature::gauss_kronrod<double, 31>;

double integrate(const std::function<double(double)>& g, double a, double b) {
  if (!(b > a)) return 0.0;
  return Quad::integrate(g, a, b, 15, 1e-14);
}

// psi(y) = exp(-1/(1-y^2)) and its first two derivatives
double psi(double y) {
  const double s = 1.0 - y * y;
  return s > 0.0 ? std::exp(-1.0 / s) : 0.0;
}
double psi_d1(double y) {
  const double s = 1.0 - y * y;
  return s > 0.0 ? psi(y) * (-2.0 * y / (s * s)) : 0.0;
}
double psi_d2(double y) {
  const double s = 1.0 - y * y;
  if (!(s > 0.0)) return 0.0;
  const double y2 = y * y;
  return psi(y) * (6.0 * y2 * y2 - 2.0) / (s * s * s * s);
}

double smoothstep(double t) { return t * t * t * (t * (6.0 * t - 15.0) + 10.0); }
double smoothstep_d1(double t) { return 30.0 * t * t * (1.0 - t) * (1.0 - t); }

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

TestFunction make_bump(double center, double radius, bool flat_at_zero) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw ValidationError("bump radius must be positive");
  TestFunction phi;
  phi.id = "bump(" + fmt(center) + "," + fmt(radius) + (flat_at_zero ? ",flat" : "") + ")";
  const double right = center + radius;
  if (!(right > 0.0)) throw ValidationError("bump support does not meet the half-line");

  if (flat_at_zero && center - radius < 0.0) {
    // q(x) = (x^2 - m) / w with q(center + radius) = 1
    const double m = center * std::abs(center);
    const double w = right * right - m;
    phi.f = [m, w](double x) { return psi((x * x - m) / w); };
    phi.d1 = [m, w](double x) { return psi_d1((x * x - m) / w) * 2.0 * x / w; };
    phi.d2 = [m, w](double x) {
      const double q = (x * x - m) / w;
      const double dq = 2.0 * x / w;
      return psi_d2(q) * dq * dq + psi_d1(q) * 2.0 / w;
    };
    phi.support_lo = m - w < 0.0 ? 0.0 : std::sqrt(m - w);
    phi.support_hi = right;
    phi.derivative_zero_at_origin = true;
    return phi;
  }
  phi.f = [center, radius](double x) { return psi((x - center) / radius); };
  phi.d1 = [center, radius](double x) { return psi_d1((x - center) / radius) / radius; };
  phi.d2 = [center, radius](double x) { return psi_d2((x - center) / radius) / (radius * radius); };
  phi.support_lo = std::max(center - radius, 0.0);
  phi.support_hi = right;
  phi.derivative_zero_at_origin = center - radius >= 0.0 || center == 0.0;
  return phi;
}

TestFunction make_plateau(double value, double until, double width) {
  if (!(width > 0.0) || !(until >= 0.0)) throw ValidationError("plateau needs until >= 0 and width > 0");
  TestFunction phi;
  phi.id = "plateau(" + fmt(value) + "," + fmt(until) + "," + fmt(width) + ")";
  auto t_of = [until, width](double x) { return std::clamp((x - until) / width, 0.0, 1.0); };
  phi.f = [=](double x) { return value * (1.0 - smoothstep(t_of(x))); };
  phi.d1 = [=](double x) { return -value * smoothstep_d1(t_of(x)) / width; };
  phi.d2 = [=](double x) {
    const double t = t_of(x);
    return -value * 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t) / (width * width);
  };
  phi.support_lo = 0.0;
  phi.support_hi = until + width;
  phi.derivative_zero_at_origin = true;
  return phi;
}

double cutoff_ramp(double x, double eps) { return smoothstep(std::clamp((x - eps) / eps, 0.0, 1.0)); }

double cutoff_ramp_d1(double x, double eps) {
  const double t = (x - eps) / eps;
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return smoothstep_d1(t) / eps;
}

TestFunction cutoff_transform(const TestFunction& phi, double eps) {
  if (!(eps > 0.0)) throw DomainError("cutoff_transform needs eps > 0");
  auto dphi = phi.d1;
  auto one_minus = [dphi, eps](double y) { return (1.0 - cutoff_ramp(y, eps)) * dphi(y); };
  // I(a) = int_0^a (1 - chi) phi', split at eps where chi stops being 0
  auto partial = [one_minus, eps](double a) {
    return integrate(one_minus, 0.0, std::min(a, eps)) + (a > eps ? integrate(one_minus, eps, std::min(a, 2.0 * eps)) : 0.0);
  };
  const double c = partial(2.0 * eps);

  TestFunction out;
  out.id = phi.id + "_eps" + fmt(eps);
  out.f = [f = phi.f, partial, c, eps](double x) {
    if (x >= 2.0 * eps) return f(x);
    return f(x) - partial(x) + c;
  };
  out.d1 = [dphi, eps](double x) { return cutoff_ramp(x, eps) * dphi(x); };
  out.d2 = [dphi, d2 = phi.d2, eps](double x) { return cutoff_ramp_d1(x, eps) * dphi(x) + cutoff_ramp(x, eps) * d2(x); };
  out.support_lo = 0.0;
  out.support_hi = phi.support_hi;
  out.derivative_zero_at_origin = true;
  return out;
}

TestFunction even_extension(const TestFunction& phi) {
  TestFunction out;
  out.id = phi.id + "_even";
  out.f = [f = phi.f](double x) { return f(std::abs(x)); };
  out.d1 = [g = phi.d1](double x) { return x == 0.0 ? 0.0 : std::copysign(1.0, x) * g(std::abs(x)); };
  out.d2 = [g = phi.d2](double x) { return g(std::abs(x)); };
  out.support_lo = -phi.support_hi;
  out.support_hi = phi.support_hi;
  out.derivative_zero_at_origin = true;
  return out;
}

namespace {
double mollifier_norm() {
  static const double z = integrate([](double x) { return psi(x); }, -1.0, 1.0);
  return z;
}
}  // namespace

double mollifier(double x, double eps) { return psi(x / eps) / (mollifier_norm() * eps); }

TestFunction mollify_even(const TestFunction& phi_bar, double eps) {
  if (!(eps > 0.0)) throw DomainError("mollify_even needs eps > 0");
  const double z = mollifier_norm();
  auto convolve = [eps, z](ScalarFn g) {
    return [g = std::move(g), eps, z](double x) {
      // symmetric halves keep the result exactly even in x
      auto integrand = [&](double s) { return psi(s) * g(x - eps * s); };
      return (integrate(integrand, -1.0, 0.0) + integrate(integrand, 0.0, 1.0)) / z;
    };
  };
  TestFunction out;
  out.id = phi_bar.id + "_moll" + fmt(eps);
  out.f = convolve(phi_bar.f);
  out.d1 = convolve(phi_bar.d1);
  out.d2 = convolve(phi_bar.d2);
  out.support_lo = phi_bar.support_lo - eps;
  out.support_hi = phi_bar.support_hi + eps;
  out.derivative_zero_at_origin = true;
  return out;
}

std::string to_string(ResidualForm f) {
  switch (f) {
    case ResidualForm::generalized: return "generalized";
    case ResidualForm::weak: return "weak";
    case ResidualForm::boundary_corrected: return "boundary_corrected";
  }
  return "?";
}

namespace {

struct Sampled {
  std::vector<double> f, d1, d2;
};

Sampled sample(const TestFunction& phi, const Grid1D& g) {
  Sampled s;
  s.f.resize(g.size());
  s.d1.resize(g.size());
  s.d2.resize(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.center(i);
    const bool inside = x >= phi.support_lo - g.dx() && x <= phi.support_hi + g.dx();
    s.f[i] = inside ? phi.f(x) : 0.0;
    s.d1[i] = inside ? phi.d1(x) : 0.0;
    s.d2[i] = inside ? phi.d2(x) : 0.0;
  }
  return s;
}

double dot(const std::vector<double>& a, std::span<const double> b, double dx) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s * dx;
}

void require_half_line(const PdeTrajectory& traj) {
  if (traj.snapshots.empty()) throw ValidationError("empty trajectory");
  if (traj.snapshots.front().u.grid().kind() != GridKind::half_line) {
    throw ValidationError("residuals are defined for half-line trajectories");
  }
}

// trapezoid over the stored snapshots on [0, t]
template <typename G>
double time_integral(const PdeTrajectory& traj, double t, G&& g) {
  double acc = 0.0;
  const auto& s = traj.snapshots;
  double prev_t = s.front().eta.t;
  double prev_g = g(s.front());
  for (std::size_t k = 1; k < s.size() && s[k].eta.t <= t + 1e-12; ++k) {
    const double gk = g(s[k]);
    acc += 0.5 * (prev_g + gk) * (s[k].eta.t - prev_t);
    prev_t = s[k].eta.t;
    prev_g = gk;
  }
  if (std::abs(prev_t - t) > 1e-9) {
    std::ostringstream os;
    os << "t = " << t << " is not a snapshot time of the trajectory";
    throw ValidationError(os.str());
  }
  return acc;
}

double change(const PdeTrajectory& traj, const Sampled& p, double t) {
  const double dx = traj.snapshots.front().u.grid().dx();
  const auto& ut = traj.at_time(t).u;
  return dot(p.f, ut.values(), dx) - dot(p.f, traj.snapshots.front().u.values(), dx);
}

double second_derivative_term(const PdeTrajectory& traj, const Sampled& p, double t) {
  const double dx = traj.snapshots.front().u.grid().dx();
  return 0.5 * time_integral(traj, t, [&](const Snapshot& s) { return dot(p.d2, s.eta.values, dx); });
}

}  // namespace

double state_change(const PdeTrajectory& traj, const TestFunction& phi, double t) {
  require_half_line(traj);
  return change(traj, sample(phi, traj.snapshots.front().u.grid()), t);
}

double generalized_residual(const PdeTrajectory& traj, const TestFunction& phi, double t) {
  require_half_line(traj);
  if (!phi.derivative_zero_at_origin) {
    throw DomainError("generalized residual needs a test function with phi'(0) = 0 (" + phi.id + ")");
  }
  const Sampled p = sample(phi, traj.snapshots.front().u.grid());
  return change(traj, p, t) - second_derivative_term(traj, p, t);
}

double weak_residual(const PdeTrajectory& traj, const TestFunction& phi, double t) {
  require_half_line(traj);
  const Grid1D& g = traj.snapshots.front().u.grid();
  const Sampled p = sample(phi, g);
  const double dx = g.dx();
  const std::size_t n = g.size();
  auto flux = [&](const Snapshot& s) {
    const auto& e = s.eta.values;
    if (n < 2) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double de = 0.0;
      if (i == 0) {
        de = (e[1] - e[0]) / dx;
      } else if (i + 1 == n) {
        de = (e[n - 1] - e[n - 2]) / dx;
      } else {
        de = (e[i + 1] - e[i - 1]) / (2.0 * dx);
      }
      acc += p.d1[i] * de;
    }
    return acc * dx;
  };
  return change(traj, p, t) + 0.5 * time_integral(traj, t, flux);
}

double boundary_form_residual(const PdeTrajectory& traj, const TestFunction& phi, double t) {
  require_half_line(traj);
  const Sampled p = sample(phi, traj.snapshots.front().u.grid());
  const double d0 = phi.d1(0.0);
  const double boundary = 0.5 * d0 * time_integral(traj, t, [](const Snapshot& s) { return s.eta.values.front(); });
  return change(traj, p, t) - boundary - second_derivative_term(traj, p, t);
}

double ResidualReport::max_abs(ResidualForm form) const {
  double m = 0.0;
  for (const auto& e : entries) {
    if (e.form == form) m = std::max(m, std::abs(e.value));
  }
  return m;
}

ResidualReport evaluate_residuals(const PdeTrajectory& traj, const std::vector<TestFunction>& family,
                                  const std::vector<double>& times) {
  ResidualReport rep;
  for (const auto& phi : family) {
    for (double t : times) {
      if (phi.derivative_zero_at_origin) {
        rep.entries.push_back({ResidualForm::generalized, phi.id, t, generalized_residual(traj, phi, t), traj.dx, traj.dt});
      }
      rep.entries.push_back({ResidualForm::weak, phi.id, t, weak_residual(traj, phi, t), traj.dx, traj.dt});
      rep.entries.push_back(
          {ResidualForm::boundary_corrected, phi.id, t, boundary_form_residual(traj, phi, t), traj.dx, traj.dt});
    }
  }
  return rep;
}

std::vector<TestFunction> default_family(std::size_t count, double reach) {
  std::vector<TestFunction> fam;
  fam.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    // alternate narrow and wide bumps, centres spread over [0, reach]
    const double c = reach * static_cast<double>(k / 2 + 1) / static_cast<double>(count / 2 + 2);
    const double r = (k % 2 == 0) ? 0.5 : 1.0;
    fam.push_back(make_bump(c, r, true));
  }
  return fam;
}

}  // namespace hlpm
