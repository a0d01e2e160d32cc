#include "flatplan/crane.hpp"

#include <cmath>
#include <numbers>

#include "flatplan/errors.hpp"
#include "flatplan/jets.hpp"

namespace flatplan::crane {

namespace {

using detail::Grad3;
using detail::Jet2;

// Configuration map. The thrust vector t = p'' + g e_z fixes the rope axis
// (payload -> suspension); the suspension point is S = p + (h0 - p_z) t/t_z
// and the hoist coordinate is s_z = h0 - l.
template <typename S>
std::array<S, 5> config_map(const std::array<S, 3>& p, const std::array<S, 3>& pdd,
                            const CraneParams& params) {
  using std::atan2;
  using std::sqrt;
  const S tx = pdd[0];
  const S ty = pdd[1];
  const S tz = pdd[2] + S(params.gravity);
  const S txz = sqrt(tx * tx + tz * tz);
  const S tnorm = sqrt(tx * tx + ty * ty + tz * tz);
  const S beta = atan2(tx, tz);
  const S alpha = atan2(ty, txz);
  const S height = S(params.suspension_height) - p[2];
  const S l = height * tnorm / tz;
  return {p[0] + height * tx / tz, p[1] + height * ty / tz,
          S(params.suspension_height) - l, alpha, beta};
}

void check_rope(const FlatSample& fs, const CraneParams& params) {
  const double tz = fs.d2[2] + params.gravity;
  if (!(tz > 0.0)) raise(ErrorCode::kRopeInverted, "flat map: thrust vector has no upward component");
  const double height = params.suspension_height - fs.p[2];
  if (!(height > 0.0)) raise(ErrorCode::kRopeSlack, "flat map: payload at or above the suspension plane");
}

// Jacobian of the payload position w.r.t. q, valid for any scalar carrying
// sin/cos. Columns: trolley translations, rope axis, sway directions.
template <typename S>
void payload_jacobian(const S& l, const S& al, const S& be, S jac[3][5]) {
  using std::cos;
  using std::sin;
  const S sa = sin(al), ca = cos(al);
  const S sb = sin(be), cb = cos(be);
  const S zero(0.0), one(1.0);
  jac[0][0] = one;  jac[1][0] = zero; jac[2][0] = zero;
  jac[0][1] = zero; jac[1][1] = one;  jac[2][1] = zero;
  jac[0][2] = ca * sb;       jac[1][2] = sa;         jac[2][2] = ca * cb;
  jac[0][3] = l * sa * sb;   jac[1][3] = -(l * ca);  jac[2][3] = l * sa * cb;
  jac[0][4] = -(l * ca * cb); jac[1][4] = zero;      jac[2][4] = l * ca * sb;
}

template <typename S>
void build_mass(const S& l, const S& al, const S& be, const CraneParams& p, S m[5][5]) {
  S jac[3][5];
  payload_jacobian(l, al, be, jac);
  for (int i = 0; i < 5; ++i)
    for (int j = i; j < 5; ++j) {
      S acc(0.0);
      for (int k = 0; k < 3; ++k) acc = acc + jac[k][i] * jac[k][j];
      m[i][j] = S(p.payload_mass) * acc;
      if (i != j) m[j][i] = m[i][j];
    }
  m[0][0] = m[0][0] + S(p.bridge_mass + p.trolley_mass);
  m[1][1] = m[1][1] + S(p.trolley_mass);
}

// Mass matrix with partials w.r.t. (s_z, alpha, beta); the other coordinates
// do not enter M.
void mass_with_partials(const Vec5& q, const CraneParams& p, Grad3 m[5][5]) {
  const Grad3 sz = Grad3::seed(q[2], 0);
  const Grad3 al = Grad3::seed(q[3], 1);
  const Grad3 be = Grad3::seed(q[4], 2);
  const Grad3 l = Grad3(p.suspension_height) - sz;
  build_mass(l, al, be, p, m);
}

}  // namespace

FeasibilityBounds FeasibilityBounds::defaults() {
  FeasibilityBounds b;
  const double sway = 2.0 * std::numbers::pi / 180.0;
  b.sway_max = sway;
  b.z_lo << -0.5, -0.5, 0.0, -sway, -sway, -0.6, -0.6, -0.3, -0.5, -0.5;
  b.z_hi << 3.5, 1.7, 0.98, sway, sway, 0.6, 0.6, 0.3, 0.5, 0.5;
  b.u_lo << -30.0, -30.0, 0.0;
  b.u_hi << 30.0, 30.0, 60.0;
  return b;
}

Vec5 flat_to_configuration(const FlatSample& fs, const CraneParams& params) {
  check_rope(fs, params);
  const auto q = config_map<double>({fs.p[0], fs.p[1], fs.p[2]},
                                    {fs.d2[0], fs.d2[1], fs.d2[2]}, params);
  return Vec5(q[0], q[1], q[2], q[3], q[4]);
}

CraneState flat_to_state(const FlatSample& fs, const CraneParams& params) {
  check_rope(fs, params);
  std::array<Jet2, 3> p, pdd;
  for (int i = 0; i < 3; ++i) {
    p[i] = Jet2(fs.p[i], fs.d1[i], fs.d2[i]);
    pdd[i] = Jet2(fs.d2[i], fs.d3[i], fs.d4[i]);
  }
  const auto q = config_map<Jet2>(p, pdd, params);
  CraneState z;
  for (int i = 0; i < 5; ++i) {
    z.q[i] = q[i].f;
    z.qdot[i] = q[i].d;
  }
  return z;
}

ControlInput flat_to_input(const FlatSample& fs, const CraneParams& params) {
  check_rope(fs, params);
  std::array<Jet2, 3> p, pdd;
  for (int i = 0; i < 3; ++i) {
    p[i] = Jet2(fs.p[i], fs.d1[i], fs.d2[i]);
    pdd[i] = Jet2(fs.d2[i], fs.d3[i], fs.d4[i]);
  }
  const auto qj = config_map<Jet2>(p, pdd, params);
  Vec5 q, qd, qdd;
  for (int i = 0; i < 5; ++i) {
    q[i] = qj[i].f;
    qd[i] = qj[i].d;
    qdd[i] = qj[i].dd;
  }
  const Vec5 full = mass_matrix(q, params) * qdd +
                    coriolis_matrix(q, qd, params) * qd + gravity_vector(q, params);
  const double residual = full.tail<2>().cwiseAbs().maxCoeff();
  if (residual > 1e-6)
    raise(ErrorCode::kUnactuatedResidual,
          "flat_to_input: unactuated rows do not vanish (residual " +
              std::to_string(residual) + ")");
  ControlInput u;
  u.u = full.head<3>();
  return u;
}

Mat5 mass_matrix(const Vec5& q, const CraneParams& params) {
  double m[5][5];
  build_mass(params.suspension_height - q[2], q[3], q[4], params, m);
  Mat5 out;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) out(i, j) = m[i][j];
  return out;
}

Mat5 coriolis_matrix(const Vec5& q, const Vec5& qdot, const CraneParams& params) {
  Grad3 m[5][5];
  mass_with_partials(q, params, m);
  // dM[i][j][k] = dM_ij/dq_k; only k in {2,3,4} is nonzero
  auto dM = [&](int i, int j, int k) { return k < 2 ? 0.0 : m[i][j].g[k - 2]; };
  Mat5 c = Mat5::Zero();
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      double acc = 0.0;
      for (int k = 0; k < 5; ++k)
        acc += 0.5 * (dM(i, j, k) + dM(i, k, j) - dM(j, k, i)) * qdot[k];
      c(i, j) = acc;
    }
  return c;
}

Vec5 gravity_vector(const Vec5& q, const CraneParams& params) {
  const Grad3 sz = Grad3::seed(q[2], 0);
  const Grad3 al = Grad3::seed(q[3], 1);
  const Grad3 be = Grad3::seed(q[4], 2);
  const Grad3 l = Grad3(params.suspension_height) - sz;
  const Grad3 pz = Grad3(params.suspension_height) - l * cos(al) * cos(be);
  Vec5 g = Vec5::Zero();
  for (int k = 0; k < 3; ++k) g[2 + k] = params.payload_mass * params.gravity * pz.g[k];
  return g;
}

Vec10 dynamics(const CraneState& z, const ControlInput& u, const CraneParams& params) {
  const Mat5 m = mass_matrix(z.q, params);
  Eigen::LLT<Mat5> llt(m);
  if (llt.info() != Eigen::Success)
    raise(ErrorCode::kSingularMass, "dynamics: mass matrix factorization failed");
  Vec5 rhs;
  rhs << u.u, 0.0, 0.0;
  rhs -= coriolis_matrix(z.q, z.qdot, params) * z.qdot + gravity_vector(z.q, params);
  Vec10 out;
  out << z.qdot, llt.solve(rhs);
  return out;
}

Vec3 forward_kinematics(const Vec5& q, const CraneParams& params) {
  const double l = params.suspension_height - q[2];
  const double sa = std::sin(q[3]), ca = std::cos(q[3]);
  const double sb = std::sin(q[4]), cb = std::cos(q[4]);
  return Vec3(q[0] - l * ca * sb, q[1] - l * sa, params.suspension_height - l * ca * cb);
}

double total_energy(const CraneState& z, const CraneParams& params) {
  const double kinetic = 0.5 * z.qdot.dot(mass_matrix(z.q, params) * z.qdot);
  return kinetic + params.payload_mass * params.gravity * forward_kinematics(z.q, params)[2];
}

BoundsReport check_bounds(const CraneState& z, const ControlInput& u,
                          const FeasibilityBounds& b) {
  static const char* kStateNames[10] = {"s_x",  "s_y",  "s_z",  "alpha", "beta",
                                        "ds_x", "ds_y", "ds_z", "dalpha", "dbeta"};
  BoundsReport report;
  const Vec10 zv = z.to_vector();
  auto flag = [&](const std::string& name, double v, double lo, double hi) {
    if (v < lo || v > hi) {
      report.feasible = false;
      report.violations.push_back({name, v, lo, hi, v < lo ? lo - v : v - hi});
    }
  };
  for (int i = 0; i < 10; ++i) flag(kStateNames[i], zv[i], b.z_lo[i], b.z_hi[i]);
  flag("alpha_sway", z.q[3], -b.sway_max, b.sway_max);
  flag("beta_sway", z.q[4], -b.sway_max, b.sway_max);
  const char* kInputNames[3] = {"u1", "u2", "u3"};
  for (int i = 0; i < 3; ++i) flag(kInputNames[i], u.u[i], b.u_lo[i], b.u_hi[i]);
  return report;
}

}  // namespace flatplan::crane
