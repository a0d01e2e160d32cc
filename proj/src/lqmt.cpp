#include "flatplan/lqmt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "flatplan/errors.hpp"

namespace flatplan::lqmt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Transit times below this make the equilibrated solve overflow at the
// model's scale.
constexpr double kDtFloor = 1e-9;

using Mat4 = Eigen::Matrix4d;
using Vec4 = Eigen::Vector4d;

// Per-axis 4x4 transition: entries dt^k/k! on the k-th superdiagonal.
Mat4 axis_transition(double dt) {
  Mat4 m = Mat4::Identity();
  const double d2 = dt * dt / 2.0;
  m(0, 1) = dt;
  m(0, 2) = d2;
  m(0, 3) = dt * d2 / 3.0;
  m(1, 2) = dt;
  m(1, 3) = d2;
  m(2, 3) = dt;
  return m;
}

// Dimensionless Gramian core: G_axis = (dt/r) * D * Ghat * D with
// D = diag(dt^3, dt^2, dt, 1). Ghat[i][j] = 1/((3-i)! (3-j)! (7-i-j)).
Mat4 ghat_matrix() {
  Mat4 g;
  const double fact[4] = {6.0, 2.0, 1.0, 1.0};  // (3-i)!
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) g(i, j) = 1.0 / (fact[i] * fact[j] * double(7 - i - j));
  return g;
}

const Mat4& ghat() {
  static const Mat4 g = ghat_matrix();
  return g;
}

const Eigen::LDLT<Mat4>& ghat_ldlt() {
  static const Eigen::LDLT<Mat4> f(ghat());
  return f;
}

// Exact integer inverse of Ghat (factorial-scaled 4x4 Hilbert inverse),
// used only to assemble the closed-form scan polynomial.
const Mat4& ghat_inverse() {
  static const Mat4 gi = [] {
    Mat4 m;
    m << 100800, -50400, 10080, -840,
         -50400,  25920, -5400,  480,
          10080,  -5400,  1200, -120,
           -840,    480,  -120,   16;
    return m;
  }();
  return gi;
}

Vec4 gather_axis(const Vec12& x, int axis) {
  return Vec4(x[axis], x[3 + axis], x[6 + axis], x[9 + axis]);
}

// Boundary mismatch on one axis: d = x1 - Phi(dt) x0.
Vec4 axis_mismatch(const Vec4& x0, const Vec4& x1, double dt) {
  const double d2 = dt * dt / 2.0;
  const double d3 = dt * d2 / 3.0;
  Vec4 d;
  d[0] = x1[0] - (x0[0] + dt * x0[1] + d2 * x0[2] + d3 * x0[3]);
  d[1] = x1[1] - (x0[1] + dt * x0[2] + d2 * x0[3]);
  d[2] = x1[2] - (x0[2] + dt * x0[3]);
  d[3] = x1[3] - x0[3];
  return d;
}

// Quadratic penalty of one axis at transit time dt, via the equilibrated
// factorization: d^T G^{-1} d = (r/dt) * y^T Ghat^{-1} y, y = D^{-1} d.
double axis_quadratic(const Vec4& x0, const Vec4& x1, double dt, double r) {
  const Vec4 d = axis_mismatch(x0, x1, dt);
  const double dt2 = dt * dt;
  const double dt3 = dt2 * dt;
  Vec4 y(d[0] / dt3, d[1] / dt2, d[2] / dt, d[3]);
  const Vec4 z = ghat_ldlt().solve(y);
  return (r / dt) * y.dot(z);
}

// Closed-form scan profile: c(dt) = dt + 0.5 * Q(dt) / dt^7 where Q is a
// degree-6 polynomial assembled once per state pair. Per axis, with
// w_i(dt) = d_i(dt) * dt^i (each a cubic in dt),
//   d^T G^{-1} d = r * w^T Ghat^{-1} w / dt^7.
struct CostProfile {
  std::array<double, 7> q{};  // Q coefficients

  CostProfile(const FlatState& x0, const FlatState& x1, const SteeringWeights& weights) {
    const Mat4& gi = ghat_inverse();
    for (int axis = 0; axis < 3; ++axis) {
      const Vec4 a = gather_axis(x0.x, axis);
      const Vec4 b = gather_axis(x1.x, axis);
      // w_i as cubic polynomials in dt: w[i][k] is the dt^k coefficient.
      double w[4][4] = {};
      w[0][0] = b[0] - a[0];
      w[0][1] = -a[1];
      w[0][2] = -a[2] / 2.0;
      w[0][3] = -a[3] / 6.0;
      w[1][1] = b[1] - a[1];
      w[1][2] = -a[2];
      w[1][3] = -a[3] / 2.0;
      w[2][2] = b[2] - a[2];
      w[2][3] = -a[3];
      w[3][3] = b[3] - a[3];
      const double r = weights.r[axis];
      for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
          const double gij = r * gi(i, j);
          if (gij == 0.0) continue;
          for (int ki = 0; ki < 4; ++ki) {
            if (w[i][ki] == 0.0) continue;
            for (int kj = 0; kj < 4; ++kj) q[ki + kj] += gij * w[i][ki] * w[j][kj];
          }
        }
      }
    }
  }

  double operator()(double dt) const {
    double poly = 0.0;
    for (int k = 6; k >= 0; --k) poly = poly * dt + q[k];
    const double dt3 = dt * dt * dt;
    const double dt7 = dt3 * dt3 * dt;
    return dt + 0.5 * poly / dt7;
  }
};

}  // namespace

Mat12 state_transition(double dt) {
  const Mat4 phi = axis_transition(dt);
  Mat12 m = Mat12::Zero();
  for (int axis = 0; axis < 3; ++axis)
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) m(3 * i + axis, 3 * j + axis) = phi(i, j);
  return m;
}

Mat12 gramian(double dt, const SteeringWeights& w) {
  if (!(dt > 0.0)) raise(ErrorCode::kNonPositiveDuration, "gramian: dt must be positive");
  const double fact[4] = {6.0, 2.0, 1.0, 1.0};
  Mat12 g = Mat12::Zero();
  for (int axis = 0; axis < 3; ++axis) {
    const double r = w.r[axis];
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        g(3 * i + axis, 3 * j + axis) =
            std::pow(dt, 7 - i - j) / (r * fact[i] * fact[j] * double(7 - i - j));
  }
  return g;
}

double cost_at(const FlatState& x0, const FlatState& x1, double dt,
               const SteeringWeights& w) {
  if (!(dt > 0.0)) raise(ErrorCode::kNonPositiveDuration, "cost_at: dt must be positive");
  if (dt < kDtFloor) raise(ErrorCode::kIllConditioned, "cost_at: dt below numerical floor");
  double c = dt;
  for (int axis = 0; axis < 3; ++axis) {
    c += 0.5 * axis_quadratic(gather_axis(x0.x, axis), gather_axis(x1.x, axis), dt,
                              w.r[axis]);
  }
  if (!std::isfinite(c)) raise(ErrorCode::kIllConditioned, "cost_at: non-finite cost");
  return c;
}

double optimal_arrival_time(const FlatState& x0, const FlatState& x1,
                            const SteeringWeights& w, const SteeringBounds& b,
                            int scan_samples) {
  if (!(b.dt_max > b.dt_min))
    raise(ErrorCode::kEmptyBracket, "optimal_arrival_time: dt_max <= dt_min");
  const int n = std::max(scan_samples, 8);
  const CostProfile profile(x0, x1, w);

  // coarse logarithmic scan
  const double log_lo = std::log(b.dt_min);
  const double log_hi = std::log(b.dt_max);
  int best = -1;
  double best_cost = kInf;
  double best_dt = b.dt_min;
  for (int k = 0; k < n; ++k) {
    const double dt = std::exp(log_lo + (log_hi - log_lo) * double(k) / double(n - 1));
    const double c = profile(dt);
    if (std::isfinite(c) && c < best_cost) {
      best_cost = c;
      best = k;
      best_dt = dt;
    }
  }
  if (best < 0) raise(ErrorCode::kNoFiniteCost, "optimal_arrival_time: cost non-finite over bracket");

  auto grid_dt = [&](int k) {
    return std::exp(log_lo + (log_hi - log_lo) * double(k) / double(n - 1));
  };
  // centered finite-difference derivative of c
  auto deriv = [&](double dt) {
    const double h = std::max(1e-7 * dt, 1e-11);
    return (profile(std::min(dt + h, b.dt_max * 2.0)) - profile(std::max(dt - h, kDtFloor))) /
           (2.0 * h);
  };

  double lo = grid_dt(std::max(best - 1, 0));
  double hi = grid_dt(std::min(best + 1, n - 1));
  double g_lo = deriv(lo);
  double g_hi = deriv(hi);
  if (best == 0 && g_lo >= 0.0) return b.dt_min;          // boundary minimum
  if (best == n - 1 && g_hi <= 0.0) return b.dt_max;      // boundary minimum
  if (!(g_lo < 0.0 && g_hi > 0.0)) return best_dt;        // no clean bracket; keep scan result

  // safeguarded Newton on the derivative, bisection fallback
  double x = best_dt;
  for (int it = 0; it < 100; ++it) {
    const double gx = deriv(x);
    if (!std::isfinite(gx)) break;
    if (gx < 0.0)
      lo = x;
    else
      hi = x;
    const double h = std::max(1e-7 * x, 1e-11);
    const double gpx = (deriv(x + h) - deriv(x - h)) / (2.0 * h);
    double next = (std::isfinite(gpx) && gpx > 0.0) ? x - gx / gpx : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) < 1e-12 * (1.0 + x)) {
      x = next;
      break;
    }
    x = next;
  }
  return profile(x) <= best_cost ? x : best_dt;
}

SteeringSolution steer(const FlatState& x0, const FlatState& x1,
                       const SteeringWeights& w, const SteeringBounds& b,
                       int scan_samples) {
  SteeringSolution sol;
  sol.x0 = x0;
  sol.x1 = x1;
  if (bitwise_equal(x0, x1)) {
    // degenerate self-edge: zero snap, chain holds the boundary state
    for (int axis = 0; axis < 3; ++axis) {
      const Vec4 a = gather_axis(x0.x, axis);
      sol.coef[axis] = {a[0], a[1], a[2], a[3], 0.0, 0.0, 0.0, 0.0};
    }
    return sol;
  }

  const double dt = optimal_arrival_time(x0, x1, w, b, scan_samples);
  sol.dt_star = dt;
  sol.cost = cost_at(x0, x1, dt, w);

  const double dt2 = dt * dt;
  const double dt3 = dt2 * dt;
  for (int axis = 0; axis < 3; ++axis) {
    const Vec4 a = gather_axis(x0.x, axis);
    const Vec4 bb = gather_axis(x1.x, axis);
    const Vec4 d = axis_mismatch(a, bb, dt);
    const Vec4 y(d[0] / dt3, d[1] / dt2, d[2] / dt, d[3]);
    const Vec4 z = ghat_ldlt().solve(y);
    const double r = w.r[axis];
    // lambda*(t1) = -G^{-1} d = -(r/dt) D^{-1} Ghat^{-1} D^{-1} d
    Vec4 lam;
    lam[0] = -(r / dt) * z[0] / dt3;
    lam[1] = -(r / dt) * z[1] / dt2;
    lam[2] = -(r / dt) * z[2] / dt;
    lam[3] = -(r / dt) * z[3];
    for (int i = 0; i < 4; ++i) {
      sol.d_vec[3 * i + axis] = d[i];
      sol.costate_t1[3 * i + axis] = lam[i];
    }
    // snap polynomial u(s) = u0 + u1 s + u2 s^2 + u3 s^3 from the costate
    const double inv_r = 1.0 / r;
    const double u0 = -inv_r * (lam[0] * dt3 / 6.0 + lam[1] * dt2 / 2.0 + lam[2] * dt + lam[3]);
    const double u1 = inv_r * (lam[0] * dt2 / 2.0 + lam[1] * dt + lam[2]);
    const double u2 = -inv_r * (lam[0] * dt / 2.0 + lam[1] / 2.0);
    const double u3 = inv_r * lam[0] / 6.0;
    sol.coef[axis] = {a[0], a[1], a[2], a[3], u0, u1, u2, u3};
  }
  return sol;
}

namespace {

// factors[m][k]: contribution of chain coefficient k to the m-th derivative,
// i.e. the m-th derivative equals Horner over k of coef[k]*factors[m][k]*s^(k-m).
// Chosen so that evaluation at s = 0 returns the stored boundary values exactly.
constexpr double kChainFactor[5][8] = {
    {1, 1, 1.0 / 2, 1.0 / 6, 1.0 / 24, 1.0 / 120, 2.0 / 720, 6.0 / 5040},
    {0, 1, 1, 1.0 / 2, 1.0 / 6, 1.0 / 24, 2.0 / 120, 6.0 / 720},
    {0, 0, 1, 1, 1.0 / 2, 1.0 / 6, 2.0 / 24, 6.0 / 120},
    {0, 0, 0, 1, 1, 1.0 / 2, 2.0 / 6, 6.0 / 24},
    {0, 0, 0, 0, 1, 1, 1, 1}};

double eval_chain(const std::array<double, 8>& c, int order, double s) {
  double v = 0.0;
  for (int k = 7; k >= order; --k) v = v * s + c[k] * kChainFactor[order][k];
  return v;
}

}  // namespace

FlatState SteeringSolution::state_at(double t) const {
  FlatState s;
  for (int axis = 0; axis < 3; ++axis)
    for (int m = 0; m < 4; ++m) s.x[3 * m + axis] = eval_chain(coef[axis], m, t);
  return s;
}

Vec3 SteeringSolution::input_at(double t) const {
  Vec3 u;
  for (int axis = 0; axis < 3; ++axis) u[axis] = eval_chain(coef[axis], 4, t);
  return u;
}

std::array<Vec3, 5> SteeringSolution::derivatives_at(double t) const {
  std::array<Vec3, 5> out;
  const FlatState s = state_at(t);
  out[0] = s.position();
  out[1] = s.velocity();
  out[2] = s.acceleration();
  out[3] = s.jerk();
  out[4] = input_at(t);
  return out;
}

std::vector<EdgeSample> sample_edge(const SteeringSolution& sol, double step) {
  if (!(step > 0.0)) raise(ErrorCode::kNonPositiveStep, "sample_edge: step must be positive");
  std::vector<EdgeSample> out;
  double t = 0.0;
  while (t < sol.dt_star) {
    out.push_back({t, sol.state_at(t), sol.input_at(t)});
    t += step;
  }
  out.push_back({sol.dt_star, sol.state_at(sol.dt_star), sol.input_at(sol.dt_star)});
  return out;
}

}  // namespace flatplan::lqmt
