// Built-in manufactured solutions and their exact derivatives, the data
// needed to drive the solver (source term and boundary data) and a finite
// difference spot check of the registered fields.

#pragma once

#include <map>

#include "hho2d/local_ops.hpp"

namespace hho2d {

/// A field value together with its derivatives up to the bilaplacian.
struct FieldSample {
  double u = 0, ux = 0, uy = 0, uxx = 0, uxy = 0, uyy = 0, bilap = 0;
  double lap() const { return uxx + uyy; }
  Point2 grad() const { return {ux, uy}; }
  Eigen::Matrix2d hess() const {
    Eigen::Matrix2d H;
    H << uxx, uxy, uxy, uyy;
    return H;
  }
};

struct ManufacturedCase {
  std::string name;
  std::string domain;  // "unit-square" or "annulus"
  bool has_exact = true;
  std::function<FieldSample(double, double)> fields;     // exact solution data
  std::function<double(double, double, double)> source;  // f(x, y, eps)

  double u(Point2 p) const { return fields(p.x(), p.y()).u; }
  Point2 grad_u(Point2 p) const { return fields(p.x(), p.y()).grad(); }
  Eigen::Matrix2d hess_u(Point2 p) const { return fields(p.x(), p.y()).hess(); }
};

/// Boundary data of a case: g_D = u, g_N = n . grad u, dt g_D = t . grad u.
inline BoundaryData boundary_data(const ManufacturedCase& mc) {
  if (!mc.has_exact) return BoundaryData::zero();
  auto fields = mc.fields;
  BoundaryData bd;
  bd.g_D = [fields](Point2 p) { return fields(p.x(), p.y()).u; };
  bd.g_N = [fields](Point2 p, Point2 n) { return n.dot(fields(p.x(), p.y()).grad()); };
  bd.dt_gD = [fields](Point2 p, Point2 t) { return t.dot(fields(p.x(), p.y()).grad()); };
  return bd;
}

// ---------------------------------------------------------------------------
// closed-form derivative bodies (symbolically generated)

inline FieldSample smooth_square_fields(double x, double y) {
  const double x0 = M_PI * x;
  const double x1 = sin(x0);
  const double x2 = pow(x1, 2);
  const double x3 = M_PI * y;
  const double x4 = sin(x3);
  const double x5 = pow(x4, 2);
  const double x6 = x2 * x5;
  const double x7 = 2 * x - 1;
  const double x8 = pow(x7, 2);
  const double x9 = 2 * y - 1;
  const double x10 = pow(x9, 2);
  const double x11 = cos(x0);
  const double x12 = exp(-1.0 / 4.0 * x10 - 1.0 / 4.0 * x8);
  const double x13 = x12 * x7;
  const double x14 = cos(x3);
  const double x15 = x12 * x8;
  const double x16 = pow(M_PI, 2);
  const double x17 = 2 * x16;
  const double x18 = pow(x11, 2);
  const double x19 = x18 * x5;
  const double x20 = 2 * x12;
  const double x21 = -x17 * x6 - x20;
  const double x22 = x10 * x12;
  const double x23 = pow(x14, 2);
  const double x24 = x2 * x23;
  const double x25 = pow(M_PI, 4);
  const double x26 = 16 * x25;
  FieldSample s;
  s.u = x6 + exp(-1.0 / 4.0 * x10 - 1.0 / 4.0 * x8);
  s.ux = 2 * M_PI * x1 * x11 * x5 - x13;
  s.uy = -x12 * x9 + 2 * M_PI * x14 * x2 * x4;
  s.uxx = x15 + x17 * x19 + x21;
  s.uxy = 4 * x1 * x11 * x14 * x16 * x4 + x13 * x9;
  s.uyy = x17 * x24 + x21 + x22;
  s.bilap = x10 * x20 * x8 + x12 * pow(x7, 4) + x12 * pow(x9, 4) + 32 * x12 -
            16 * x15 + 8 * x18 * x23 * x25 - x19 * x26 - 16 * x22 - x24 * x26 +
            24 * x25 * x6;
  return s;
}

inline FieldSample smooth_annulus_fields(double x, double y) {
  const double x0 = pow(x, 2);
  const double x1 = pow(y, 2);
  const double x2 = x0 + x1;
  const double x3 = exp(-x2);
  const double x4 = M_PI * (x2 - 1);
  const double x5 = sin(x4);
  const double x6 = x5 + 1;
  const double x7 = cos(x4);
  const double x8 = 2 * x3;
  const double x9 = x8 * (-x6 + M_PI * x7);
  const double x10 = M_PI * x7;
  const double x11 = 4 * x10;
  const double x12 = 2 * x0;
  const double x13 = x12 - 1;
  const double x14 = x13 * x6;
  const double x15 = -x7;
  const double x16 = M_PI * x5;
  const double x17 = x12 * x16;
  const double x18 = x15 + x17;
  const double x19 = x0 * x11 - x14 + M_PI * x18;
  const double x20 = pow(M_PI, 2);
  const double x21 = x20 * x5;
  const double x22 = 4 * x3;
  const double x23 = 2 * x1;
  const double x24 = x23 - 1;
  const double x25 = x24 * x6;
  const double x26 = x16 * x23;
  const double x27 = x15 + x26;
  const double x28 = x1 * x11 - x25 + M_PI * x27;
  const double x29 = pow(M_PI, 3);
  const double x30 = pow(x, 4);
  const double x31 = pow(y, 4);
  const double x32 = 3 * x5;
  const double x33 = 12 * x10;
  const double x34 = 4 * x21;
  const double x35 = x10 * x23;
  const double x36 = x35 + x5;
  const double x37 = 4 * M_PI * x5;
  const double x38 = x1 * x37 + x24 * x7;
  const double x39 = 4 * x0;
  const double x40 = x10 * x12;
  const double x41 = x0 * x37 + x13 * x7;
  const double x42 = 4 * x1;
  const double x43 = x21 * x39;
  const double x44 = -x11 + 2 * x5 + 2;
  const double x45 = 8 * x0 * x1 * x20 * x7 - M_PI * (-x1 * x43 + x36 + x40);
  FieldSample s;
  s.u = x3 * x6;
  s.ux = x * x9;
  s.uy = x9 * y;
  s.uxx = -x19 * x8;
  s.uxy = x * x22 * y * (-2 * x10 - x21 + x5 + 1);
  s.uyy = -x28 * x8;
  s.bilap =
      x22 * (20 * x0 * x20 * x5 + 16 * M_PI * x0 * x7 + 20 * x1 * x20 * x5 +
             16 * M_PI * x1 * x7 - 8 * x10 - x12 * x13 * x21 - x12 * x19 -
             x12 * x28 + M_PI * x13 * x7 - 2 * x14 + 2 * M_PI * x18 - x19 * x23 -
             x20 * (x0 * x33 - x30 * x34 + x32) - x20 * (x1 * x33 - x31 * x34 + x32) -
             x21 * x23 * x24 - x23 * x28 + M_PI * x24 * x7 - 2 * x25 +
             2 * M_PI * x27 + 8 * x29 * x30 * x7 + 8 * x29 * x31 * x7 -
             M_PI * x39 * (-M_PI * x36 + x38) -
             x39 * (x10 * x13 - x20 * (x32 + x40) + x43 + x44) -
             M_PI * x42 * (x41 - M_PI * (x40 + x5)) -
             x42 * (x10 * x24 - x20 * (x32 + x35) + x21 * x42 + x44) + 4 * x5 +
             M_PI * (-x13 * x26 + x41 + x45) + M_PI * (-x17 * x24 + x38 + x45) + 4);
  return s;
}

// ---------------------------------------------------------------------------

namespace detail {

/// Deterministic full-degree polynomial used by the exactness case.
struct PolyCase {
  int degree;
  std::vector<std::array<int, 2>> expo;
  std::vector<double> coef;

  explicit PolyCase(int d) : degree(d) {
    for (int o = 0; o <= d; ++o)
      for (int b = 0; b <= o; ++b) {
        const int a = o - b;
        expo.push_back({a, b});
        coef.push_back(0.25 * (((2 * a + 3 * b) % 5) + 1));
      }
  }

  double deriv(double x, double y, int p, int q) const {
    auto falling = [](int a, int k) {
      double r = 1.0;
      for (int j = 0; j < k; ++j) r *= (a - j);
      return r;
    };
    double s = 0.0;
    for (size_t i = 0; i < expo.size(); ++i) {
      const auto [a, b] = expo[i];
      if (a < p || b < q) continue;
      s += coef[i] * falling(a, p) * falling(b, q) * std::pow(x, a - p) *
           std::pow(y, b - q);
    }
    return s;
  }

  FieldSample sample(double x, double y) const {
    FieldSample s;
    s.u = deriv(x, y, 0, 0);
    s.ux = deriv(x, y, 1, 0);
    s.uy = deriv(x, y, 0, 1);
    s.uxx = deriv(x, y, 2, 0);
    s.uxy = deriv(x, y, 1, 1);
    s.uyy = deriv(x, y, 0, 2);
    s.bilap = deriv(x, y, 4, 0) + 2.0 * deriv(x, y, 2, 2) + deriv(x, y, 0, 4);
    return s;
  }
};

}  // namespace detail

inline std::vector<std::string> case_names() {
  return {"smooth-square", "smooth-annulus", "layer-annulus", "poly-exact"};
}

/// Look up a built-in case; `k` fixes the degree of the poly-exact solution.
inline ManufacturedCase get_case(const std::string& name, int k) {
  ManufacturedCase mc;
  mc.name = name;
  if (name == "smooth-square") {
    mc.domain = "unit-square";
    mc.fields = smooth_square_fields;
  } else if (name == "smooth-annulus") {
    mc.domain = "annulus";
    mc.fields = smooth_annulus_fields;
  } else if (name == "layer-annulus") {
    mc.domain = "annulus";
    mc.has_exact = false;
    mc.source = [](double, double, double) { return 10.0; };
    return mc;
  } else if (name == "poly-exact") {
    mc.domain = "unit-square";
    const detail::PolyCase poly(k + 2);
    mc.fields = [poly](double x, double y) { return poly.sample(x, y); };
  } else {
    throw Error("unknown manufactured case '" + name + "'");
  }
  auto fields = mc.fields;
  mc.source = [fields](double x, double y, double eps) {
    const auto s = fields(x, y);
    return eps * s.bilap - s.lap();
  };
  return mc;
}

/// Finite difference spot check of a case's declared derivatives at
/// `n_points` interior points; returns the worst relative mismatch.
inline double spot_check_case(const ManufacturedCase& mc, int n_points = 10,
                              unsigned seed = 1234) {
  if (!mc.has_exact) return 0.0;
  std::srand(seed);
  auto rnd = []() { return static_cast<double>(std::rand()) / RAND_MAX; };
  double worst = 0.0;
  const double h = 2e-4;
  for (int i = 0; i < n_points; ++i) {
    Point2 p;
    if (mc.domain == "unit-square") {
      p = Point2(0.1 + 0.8 * rnd(), 0.1 + 0.8 * rnd());
    } else {
      const double th = 2.0 * M_PI * rnd();
      p = 0.8 * Point2(std::cos(th), std::sin(th));
    }
    const auto s = mc.fields(p.x(), p.y());
    auto at = [&](double dx, double dy) { return mc.fields(p.x() + dx, p.y() + dy); };
    const double scale = std::abs(s.u) + 1.0;

    const double fdx = (at(h, 0).u - at(-h, 0).u) / (2 * h);
    const double fdy = (at(0, h).u - at(0, -h).u) / (2 * h);
    worst = std::max(worst, std::abs(fdx - s.ux) / scale);
    worst = std::max(worst, std::abs(fdy - s.uy) / scale);

    const double fdxx = (at(h, 0).ux - at(-h, 0).ux) / (2 * h);
    const double fdxy = (at(0, h).ux - at(0, -h).ux) / (2 * h);
    const double fdyy = (at(0, h).uy - at(0, -h).uy) / (2 * h);
    worst = std::max(worst, std::abs(fdxx - s.uxx) / scale);
    worst = std::max(worst, std::abs(fdxy - s.uxy) / scale);
    worst = std::max(worst, std::abs(fdyy - s.uyy) / scale);

    // bilaplacian from the declared Hessian trace
    const double l0 = at(0, 0).lap();
    const double fdbl = (at(h, 0).lap() + at(-h, 0).lap() + at(0, h).lap() +
                         at(0, -h).lap() - 4.0 * l0) / (h * h);
    worst = std::max(worst, std::abs(fdbl - s.bilap) / (std::abs(s.bilap) + scale));
  }
  return worst;
}

}  // namespace hho2d
