#include "csradar/solver.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>
#include <vector>

namespace csradar {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Second-order cone machinery for the Dantzig recast. Variables are
// x = [u; w; t] in R^{3N} (u + jw the complex estimate, t the moduli
// epigraphs). Cones, all of dimension 3:
//   epigraph n:  (t_n, u_n, w_n)
//   residual n:  (mu, Re(y - A(u+jw))_n, Im(y - A(u+jw))_n)
// in the conic standard form  min c'x  s.t.  G x + s = h, s in K.
// The KKT systems are solved through the normal equations
// G' W^-2 G dx = rhs with the epigraph variables eliminated first, which
// leaves one dense 2N x 2N Cholesky per iteration.
// ---------------------------------------------------------------------------

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;

struct ConeScaling {
  double beta = 1.0;  // W = beta (2 v v' - J)
  Vec3 v = Vec3(1, 0, 0);
  Mat3 w;
  Mat3 w_inv;   // W^-1
  Mat3 w2_inv;  // W^-2
  Vec3 lambda;  // scaled point, lambda = W z = W^-1 s
};

double jordan_det(const Vec3& u) {
  return u(0) * u(0) - u(1) * u(1) - u(2) * u(2);
}

Vec3 jordan_prod(const Vec3& a, const Vec3& b) {
  return Vec3(a.dot(b), a(0) * b(1) + b(0) * a(1), a(0) * b(2) + b(0) * a(2));
}

// Solves lambda o x = b.
Vec3 jordan_div(const Vec3& lambda, const Vec3& b) {
  const double det = jordan_det(lambda);
  const double x0 = (lambda(0) * b(0) - lambda(1) * b(1) - lambda(2) * b(2)) / det;
  Vec3 x;
  x(0) = x0;
  x(1) = (b(1) - x0 * lambda(1)) / lambda(0);
  x(2) = (b(2) - x0 * lambda(2)) / lambda(0);
  return x;
}

// Boundary margin of a direction expressed in the Jordan frame of lambda:
// lambda + alpha * q stays in the cone for alpha < 1 / margin (no limit when
// the margin is nonpositive). Working in the frame where lambda maps to the
// unit element avoids the cancellation of the raw quadratic at small gaps.
double scaled_step_margin(const Vec3& lambda, const Vec3& q) {
  const double a = std::sqrt(std::max(jordan_det(lambda), 1e-300));
  const Vec3 l = lambda / a;
  const double ljq = l(0) * q(0) - l(1) * q(1) - l(2) * q(2);
  const double out0 = ljq / a;
  const double f = (q(0) + ljq) / (l(0) + 1.0);
  const double out1 = (q(1) - f * l(1)) / a;
  const double out2 = (q(2) - f * l(2)) / a;
  return std::hypot(out1, out2) - out0;
}

const Mat3& jmat() {
  static const Mat3 J = (Mat3() << 1, 0, 0, 0, -1, 0, 0, 0, -1).finished();
  return J;
}

// Rebuilds W, W^-1 and W^-2 from the (beta, v) Householder representation.
void refresh_matrices(ConeScaling& cs) {
  cs.w = cs.beta * (2.0 * cs.v * cs.v.transpose() - jmat());
  const Vec3 jv = jmat() * cs.v;
  cs.w_inv = (2.0 * jv * jv.transpose() - jmat()) / cs.beta;
  cs.w2_inv = cs.w_inv * cs.w_inv;
}

bool nt_scaling_ok(const Vec3& s, const Vec3& z) {
  return jordan_det(s) > 0.0 && jordan_det(z) > 0.0 && s(0) > 0.0 && z(0) > 0.0;
}

// Scaling from scratch; only used at the well-centered initial point where
// the Jordan determinants of the raw iterates carry no cancellation.
ConeScaling nt_scaling(const Vec3& s, const Vec3& z) {
  const double a = std::sqrt(std::max(jordan_det(s), 1e-300));
  const double b = std::sqrt(std::max(jordan_det(z), 1e-300));
  const Vec3 sb = s / a;
  const Vec3 zb = z / b;
  const double c = std::sqrt(std::max((sb.dot(zb) + 1.0) / 2.0, 1e-300));
  Vec3 wbar;
  wbar(0) = (sb(0) + zb(0)) / (2.0 * c);
  wbar(1) = (sb(1) - zb(1)) / (2.0 * c);
  wbar(2) = (sb(2) - zb(2)) / (2.0 * c);

  ConeScaling cs;
  cs.beta = std::sqrt(a / b);
  cs.v = wbar;
  cs.v(0) += 1.0;
  cs.v /= std::sqrt(2.0 * (wbar(0) + 1.0));
  refresh_matrices(cs);

  const double scale = std::sqrt(a * b);
  const double denom = sb(0) + zb(0) + 2.0 * c;
  cs.lambda(0) = c * scale;
  const double ws = (c + zb(0)) / denom;
  const double wz = (c + sb(0)) / denom;
  cs.lambda(1) = scale * (ws * sb(1) + wz * zb(1));
  cs.lambda(2) = scale * (ws * sb(2) + wz * zb(2));
  return cs;
}

// Incremental Nesterov-Todd update from the stepped scaled variables
// st = lambda + alpha W^-T ds, zt = lambda + alpha W dz. The scaled pair
// stays near the central ray, so all determinants here are well
// conditioned even when the raw iterates approach the cone boundary.
bool update_scaling(ConeScaling& cs, const Vec3& st, const Vec3& zt) {
  const double det_s = jordan_det(st);
  const double det_z = jordan_det(zt);
  if (det_s <= 0.0 || det_z <= 0.0 || st(0) <= 0.0 || zt(0) <= 0.0) {
    return false;
  }
  const double a = std::sqrt(det_s);
  const double b = std::sqrt(det_z);
  const Vec3 sb = st / a;
  const Vec3 zb = zt / b;
  const double c = std::sqrt((1.0 + sb.dot(zb)) / 2.0);

  const double vs = cs.v.dot(sb);
  const double vz = cs.v(0) * zb(0) - cs.v(1) * zb(1) - cs.v(2) * zb(2);
  const double vq = (vs + vz) / (2.0 * c);
  const double vu = vs - vz;

  const double wk0 = 2.0 * cs.v(0) * vq - (sb(0) + zb(0)) / (2.0 * c);
  const double dd = (cs.v(0) * vu - sb(0) / 2.0 + zb(0) / 2.0) / (wk0 + 1.0);

  const double scale = std::sqrt(a * b);
  cs.lambda(0) = scale * c;
  const double vcoef = 2.0 * (-dd * vq + 0.5 * vu);
  cs.lambda(1) = scale * (vcoef * cs.v(1) + 0.5 * (1.0 - dd / c) * sb(1) +
                          0.5 * (1.0 + dd / c) * zb(1));
  cs.lambda(2) = scale * (vcoef * cs.v(2) + 0.5 * (1.0 - dd / c) * sb(2) +
                          0.5 * (1.0 + dd / c) * zb(2));

  // v := (2 v v' - J) q with q = (sb + J zb) / (2c), then the half-angle
  // normalization to the new Householder vector.
  Vec3 w = 2.0 * vq * cs.v;
  w(0) -= sb(0) / (2.0 * c);
  w(1) += sb(1) / (2.0 * c);
  w(2) += sb(2) / (2.0 * c);
  w -= zb / (2.0 * c);

  cs.v = w;
  cs.v(0) += 1.0;
  cs.v /= std::sqrt(2.0 * (w(0) + 1.0));
  cs.beta *= std::sqrt(a / b);
  refresh_matrices(cs);
  return cs.v.allFinite() && cs.lambda.allFinite();
}

// sqrt of the SPD 2x2 matrix [[p, q], [q, r]].
void sqrt2x2(double p, double q, double r, double& a, double& b, double& c) {
  const double det = std::max(p * r - q * q, 0.0);
  const double s = std::sqrt(det);
  const double t = std::sqrt(std::max(p + r + 2.0 * s, 1e-300));
  a = (p + s) / t;
  b = q / t;
  c = (r + s) / t;
}

class DantzigIpm {
 public:
  DantzigIpm(const CxMatrix& gram, const CxVector& correlated, double mu,
             const DantzigConfig& config)
      : n_(static_cast<int>(correlated.size())),
        mu_(mu),
        config_(config),
        gram_(gram),
        y_(correlated) {
    b_.resize(2 * n_, 2 * n_);
    b_.topLeftCorner(n_, n_) = gram.real();
    b_.topRightCorner(n_, n_) = -gram.imag();
    b_.bottomLeftCorner(n_, n_) = gram.imag();
    b_.bottomRightCorner(n_, n_) = gram.real();
  }

  RecoveryResult run();

 private:
  int n_;
  double mu_;
  const DantzigConfig& config_;
  const CxMatrix& gram_;
  const CxVector& y_;
  RealMatrix b_;  // [S -T; T S], symmetric for Hermitian gram

  RealVector apply_g(const RealVector& x) const {
    RealVector g(6 * n_);
    const RealVector q = b_ * x.head(2 * n_);
    for (int n = 0; n < n_; ++n) {
      g(3 * n + 0) = -x(2 * n_ + n);
      g(3 * n + 1) = -x(n);
      g(3 * n + 2) = -x(n_ + n);
      g(3 * (n_ + n) + 0) = 0.0;
      g(3 * (n_ + n) + 1) = q(n);
      g(3 * (n_ + n) + 2) = q(n_ + n);
    }
    return g;
  }

  RealVector apply_gt(const RealVector& zeta) const {
    RealVector packed(2 * n_);
    for (int n = 0; n < n_; ++n) {
      packed(n) = zeta(3 * (n_ + n) + 1);
      packed(n_ + n) = zeta(3 * (n_ + n) + 2);
    }
    RealVector out(3 * n_);
    out.head(2 * n_) = b_ * packed;  // B symmetric
    for (int n = 0; n < n_; ++n) {
      out(n) -= zeta(3 * n + 1);
      out(n_ + n) -= zeta(3 * n + 2);
      out(2 * n_ + n) = -zeta(3 * n + 0);
    }
    return out;
  }

  CxVector complex_estimate(const RealVector& x) const {
    CxVector s(n_);
    for (int n = 0; n < n_; ++n) s(n) = cxd(x(n), x(n_ + n));
    return s;
  }

  double certificate_inf_norm(const RealVector& x, CxVector* resid) const {
    const CxVector res = y_ - gram_ * complex_estimate(x);
    if (resid) *resid = res;
    return res.cwiseAbs().maxCoeff();
  }
};

struct KktFactor {
  Eigen::LLT<RealMatrix> llt;
  RealMatrix schur;                // unregularized Schur matrix (for IR)
  std::vector<double> c1, c2, dt;  // epigraph coupling / t diagonal
  RealVector equil;                // symmetric equilibration of the Schur block
  int n = 0;

  // Cholesky of the regularized, equilibrated matrix plus iterative
  // refinement against the true Schur matrix; the static regularization
  // keeps the factorization stable when cones touch their apex.
  RealVector solve_schur(const RealVector& ruw) const {
    RealVector y =
        equil.asDiagonal() * llt.solve(RealVector(equil.asDiagonal() * ruw));
    for (int pass = 0; pass < 2; ++pass) {
      const RealVector res = ruw - schur.selfadjointView<Eigen::Lower>() * y;
      y += equil.asDiagonal() *
           llt.solve(RealVector(equil.asDiagonal() * res));
    }
    return y;
  }

  RealVector solve(const RealVector& rhs) const {
    RealVector ruw = rhs.head(2 * n);
    for (int i = 0; i < n; ++i) {
      const double rt = rhs(2 * n + i);
      ruw(i) -= c1[i] / dt[i] * rt;
      ruw(n + i) -= c2[i] / dt[i] * rt;
    }
    RealVector out(3 * n);
    out.head(2 * n) = solve_schur(ruw);
    for (int i = 0; i < n; ++i) {
      out(2 * n + i) =
          (rhs(2 * n + i) - c1[i] * out(i) - c2[i] * out(n + i)) / dt[i];
    }
    return out;
  }
};

RecoveryResult DantzigIpm::run() {
  RecoveryResult result;
  result.mu_used = mu_;
  result.estimate = CxVector::Zero(n_);

  if (mu_ <= 0.0) {
    if (mu_ < 0.0) {
      result.status = SolveStatus::infeasible;
      return result;
    }
    throw std::invalid_argument("dantzig: mu must be positive");
  }

  // Trivial-solution regime: s = 0 is feasible and has minimal l1 norm.
  const double y_inf = y_.size() ? y_.cwiseAbs().maxCoeff() : 0.0;
  if (y_inf <= mu_) {
    result.residual_inf_norm = y_inf;
    result.status = SolveStatus::optimal;
    return result;
  }

  const int nvar = 3 * n_;
  const int ncones = 2 * n_;

  RealVector h = RealVector::Zero(6 * n_);
  for (int n = 0; n < n_; ++n) {
    h(3 * (n_ + n) + 0) = mu_;
    h(3 * (n_ + n) + 1) = y_(n).real();
    h(3 * (n_ + n) + 2) = y_(n).imag();
  }
  const double h_norm = std::max(1.0, h.norm());
  const double c_norm = std::max(1.0, std::sqrt(static_cast<double>(n_)));

  std::vector<ConeScaling> scal(ncones);
  RealMatrix huw(2 * n_, 2 * n_);
  RealMatrix m_scaled(2 * n_, 2 * n_);
  KktFactor kkt;
  kkt.n = n_;
  kkt.c1.assign(n_, 0.0);
  kkt.c2.assign(n_, 0.0);
  kkt.dt.assign(n_, 1.0);

  auto factor_kkt = [&](bool identity_scaling) -> bool {
    if (identity_scaling) {
      m_scaled = b_;
    } else {
      for (int n = 0; n < n_; ++n) {
        const Mat3& v = scal[n_ + n].w2_inv;
        double a, bq, c;
        sqrt2x2(v(1, 1), v(1, 2), v(2, 2), a, bq, c);
        m_scaled.row(n) = a * b_.row(n) + bq * b_.row(n_ + n);
        m_scaled.row(n_ + n) = bq * b_.row(n) + c * b_.row(n_ + n);
      }
    }
    huw.setZero();
    huw.selfadjointView<Eigen::Lower>().rankUpdate(m_scaled.transpose());
    huw = huw.selfadjointView<Eigen::Lower>();

    for (int n = 0; n < n_; ++n) {
      Mat3 ve = Mat3::Identity();
      if (!identity_scaling) ve = scal[n].w2_inv;
      const double d = ve(0, 0);
      kkt.dt[n] = d;
      kkt.c1[n] = ve(1, 0);
      kkt.c2[n] = ve(2, 0);
      huw(n, n) += ve(1, 1) - ve(1, 0) * ve(0, 1) / d;
      huw(n_ + n, n_ + n) += ve(2, 2) - ve(2, 0) * ve(0, 2) / d;
      const double off = ve(1, 2) - ve(1, 0) * ve(0, 2) / d;
      huw(n, n_ + n) += off;
      huw(n_ + n, n) += off;
    }

    kkt.schur = huw;
    kkt.equil = (huw.diagonal().array().max(1e-300)).rsqrt();
    huw = kkt.equil.asDiagonal() * huw * kkt.equil.asDiagonal();

    double jitter = 1e-13;  // static regularization (equilibrated diag is 1)
    for (int attempt = 0; attempt < 8; ++attempt) {
      huw.diagonal().array() += jitter;
      jitter *= 100.0;
      kkt.llt.compute(huw);
      if (kkt.llt.info() == Eigen::Success) return true;
    }
    return false;
  };

  // --- initial point (identity scaling) -------------------------------
  if (!factor_kkt(true)) {
    result.status = SolveStatus::infeasible;
    return result;
  }
  const RealVector c_vec = [&] {
    RealVector c = RealVector::Zero(nvar);
    c.tail(n_).setOnes();
    return c;
  }();

  RealVector x = kkt.solve(apply_gt(h));
  RealVector s = h - apply_g(x);
  RealVector z = apply_g(kkt.solve(-c_vec));
  {
    auto shift_into_cone = [&](RealVector& vec) {
      double worst = -kInf;
      for (int i = 0; i < ncones; ++i) {
        const double margin =
            std::hypot(vec(3 * i + 1), vec(3 * i + 2)) - vec(3 * i);
        worst = std::max(worst, margin);
      }
      if (worst >= 0.0) {
        for (int i = 0; i < ncones; ++i) vec(3 * i) += 1.0 + worst;
      }
    };
    shift_into_cone(s);
    shift_into_cone(z);
  }

  for (int i = 0; i < ncones; ++i) {
    if (!nt_scaling_ok(s.segment<3>(3 * i), z.segment<3>(3 * i))) {
      result.status = SolveStatus::infeasible;
      return result;
    }
    scal[i] = nt_scaling(s.segment<3>(3 * i), z.segment<3>(3 * i));
  }

  RealVector ds2(6 * n_), bz(6 * n_), dx(nvar), dz(6 * n_), ds(6 * n_);
  RealVector dz_aff(6 * n_), ds_aff(6 * n_);
  int stall = 0;

  const double cert_limit = mu_ * (1.0 + config_.feasibility_tol);
  RealVector x_best = x;
  double best_merit = kInf;
  bool best_optimal = false;
  bool failed = false;

  for (int iter = 0; iter <= config_.max_iterations; ++iter) {
    const RealVector rx = apply_gt(z) + c_vec;
    const RealVector rz = apply_g(x) + s - h;
    const double gap = s.dot(z);
    const double pobj = x.tail(n_).sum();

    const double pres = rz.norm() / h_norm;
    const double dres = rx.norm() / c_norm;
    const double relgap = gap / std::max(1.0, std::abs(pobj));
    const double cert = certificate_inf_norm(x, nullptr);

    if (std::getenv("CSRADAR_SOLVER_TRACE")) {
      std::fprintf(stderr,
                   "it=%3d pobj=%.6e gap=%.3e pres=%.3e dres=%.3e cert=%.6e "
                   "mu=%.3e\n",
                   iter, pobj, gap, pres, dres, cert, mu_);
    }

    const double merit =
        std::max({pres / config_.feasibility_tol, dres / config_.feasibility_tol,
                  relgap / config_.duality_gap_tol,
                  (cert - mu_) / std::max(cert_limit - mu_, 1e-300)});
    if (std::isfinite(merit) && merit < best_merit) {
      best_merit = merit;
      x_best = x;
      result.iterations = iter;
      result.duality_gap = gap;
      best_optimal = pres <= config_.feasibility_tol &&
                     dres <= config_.feasibility_tol &&
                     relgap <= config_.duality_gap_tol && cert <= cert_limit;
    }
    if (best_optimal) break;
    if (iter == config_.max_iterations || stall >= 2) break;

    if (!factor_kkt(false)) {
      failed = best_merit == kInf;
      break;
    }

    // One pass of iterative refinement keeps the directions accurate once
    // the scalings become ill-conditioned near the solution.
    auto solve_kkt_once = [&](const RealVector& bx, const RealVector& bz_rhs,
                              const RealVector& bs_scaled, RealVector& ox,
                              RealVector& oz, RealVector& os) {
      for (int i = 0; i < ncones; ++i) {
        const Vec3 d2 = jordan_div(scal[i].lambda, bs_scaled.segment<3>(3 * i));
        ds2.segment<3>(3 * i) = scal[i].w * d2;  // W * (lambda \ bs)
      }
      const RealVector rhs_z = bz_rhs - ds2;
      RealVector scaled(6 * n_);
      for (int i = 0; i < ncones; ++i) {
        scaled.segment<3>(3 * i) = scal[i].w2_inv * rhs_z.segment<3>(3 * i);
      }
      ox = kkt.solve(bx + apply_gt(scaled));
      const RealVector gdx = apply_g(ox);
      for (int i = 0; i < ncones; ++i) {
        oz.segment<3>(3 * i) =
            scal[i].w2_inv * (gdx.segment<3>(3 * i) - rhs_z.segment<3>(3 * i));
      }
      os = bz_rhs - gdx;
    };

    auto kkt_defect = [&](const RealVector& bx, const RealVector& bz_rhs,
                          const RealVector& bs_scaled, RealVector& r1,
                          RealVector& r2, RealVector& r3) {
      r1 = bx - apply_gt(dz);
      r2 = bz_rhs - apply_g(dx) - ds;
      for (int i = 0; i < ncones; ++i) {
        const Vec3 combo = scal[i].w_inv * ds.segment<3>(3 * i) +
                           scal[i].w * dz.segment<3>(3 * i);
        r3.segment<3>(3 * i) = bs_scaled.segment<3>(3 * i) -
                               jordan_prod(scal[i].lambda, combo);
      }
      return std::sqrt(r1.squaredNorm() + r2.squaredNorm() + r3.squaredNorm());
    };

    auto solve_direction = [&](const RealVector& bs_scaled) {
      const RealVector bx = -rx;
      bz = -rz;
      solve_kkt_once(bx, bz, bs_scaled, dx, dz, ds);
      // refinement passes, kept only while they shrink the block residuals
      RealVector r1(nvar), r2(6 * n_), r3(6 * n_);
      RealVector cx(nvar), cz(6 * n_), cs(6 * n_);
      double defect = kkt_defect(bx, bz, bs_scaled, r1, r2, r3);
      for (int pass = 0; pass < 2 && std::isfinite(defect); ++pass) {
        solve_kkt_once(r1, r2, r3, cx, cz, cs);
        if (!cx.allFinite() || !cz.allFinite() || !cs.allFinite()) break;
        const RealVector px = dx, pz = dz, ps = ds;
        dx += cx;
        dz += cz;
        ds += cs;
        const double refined = kkt_defect(bx, bz, bs_scaled, r1, r2, r3);
        if (!(refined < defect)) {
          dx = px;
          dz = pz;
          ds = ps;
          break;
        }
        defect = refined;
      }
    };

    // Scaled directions per cone (W^-1 ds, W dz); margins come from the
    // lambda Jordan frame and ds's dz' is accumulated on the scaled pair.
    RealVector ws_all(6 * n_), wz_all(6 * n_);
    auto step_and_dsdz = [&](double& margin, double& dsdz) {
      margin = 0.0;
      dsdz = 0.0;
      for (int i = 0; i < ncones; ++i) {
        const Vec3 ws = scal[i].w_inv * ds.segment<3>(3 * i);
        const Vec3 wz = scal[i].w * dz.segment<3>(3 * i);
        ws_all.segment<3>(3 * i) = ws;
        wz_all.segment<3>(3 * i) = wz;
        margin = std::max(margin, scaled_step_margin(scal[i].lambda, ws));
        margin = std::max(margin, scaled_step_margin(scal[i].lambda, wz));
        dsdz += ws.dot(wz);
      }
    };

    // Affine (predictor) direction.
    RealVector bs(6 * n_);
    for (int i = 0; i < ncones; ++i) {
      bs.segment<3>(3 * i) =
          -jordan_prod(scal[i].lambda, scal[i].lambda);
    }
    solve_direction(bs);
    if (!dx.allFinite() || !dz.allFinite() || !ds.allFinite()) break;

    double margin_aff = 0.0, dsdz_aff = 0.0;
    step_and_dsdz(margin_aff, dsdz_aff);
    const double alpha_aff =
        margin_aff <= 0.0 ? 1.0 : std::min(1.0, 1.0 / margin_aff);
    // Analytic Mehrotra model of the stepped gap; the computed linear term
    // is exact by construction, so small direction errors do not flip sigma.
    double sigma = std::clamp(
        1.0 - alpha_aff + alpha_aff * alpha_aff * dsdz_aff / gap, 0.0, 1.0);
    sigma = sigma * sigma * sigma;
    const double mu_hat = gap / ncones;

    // Combined (corrector) direction; the correction term reuses the scaled
    // affine pair.
    auto build_combined = [&](double centering, bool with_corrector) {
      for (int i = 0; i < ncones; ++i) {
        Vec3 target = -jordan_prod(scal[i].lambda, scal[i].lambda);
        if (with_corrector) {
          target -= jordan_prod(ws_all.segment<3>(3 * i),
                                wz_all.segment<3>(3 * i));
        }
        target(0) += centering * mu_hat;
        bs.segment<3>(3 * i) = target;
      }
    };
    build_combined(sigma, true);
    solve_direction(bs);
    if (!dx.allFinite() || !dz.allFinite() || !ds.allFinite()) break;

    double margin = 0.0, dsdz = 0.0;
    step_and_dsdz(margin, dsdz);
    double alpha = margin <= 0.0 ? 1.0 : std::min(1.0, 0.99 / margin);
    // The second-order correction can block the step near degenerate apex
    // cones; retreat to a centered first-order direction when it does.
    if (alpha < 0.2 * alpha_aff) {
      build_combined(std::max(sigma, 0.5), false);
      solve_direction(bs);
      if (!dx.allFinite() || !dz.allFinite() || !ds.allFinite()) break;
      step_and_dsdz(margin, dsdz);
      alpha = margin <= 0.0 ? 1.0 : std::min(1.0, 0.99 / margin);
    }
    if (!std::isfinite(alpha)) break;

    // Reject steps that blow up the residuals (defective directions at the
    // numerical end of the path); retry shorter, then give up on this path.
    {
      const RealVector gtdz = apply_gt(dz);
      const RealVector gdx_ds = apply_g(dx) + ds;
      const double old_bad =
          std::max({pres / config_.feasibility_tol,
                    dres / config_.feasibility_tol,
                    relgap / config_.duality_gap_tol});
      bool accepted = false;
      for (int attempt = 0; attempt < 3; ++attempt) {
        const double pres_new = (rz + alpha * gdx_ds).norm() / h_norm;
        const double dres_new = (rx + alpha * gtdz).norm() / c_norm;
        const double gap_new = (s + alpha * ds).dot(z + alpha * dz);
        const double relgap_new = gap_new / std::max(1.0, std::abs(pobj));
        const double new_bad =
            std::max({pres_new / config_.feasibility_tol,
                      dres_new / config_.feasibility_tol,
                      relgap_new / config_.duality_gap_tol});
        if (new_bad <= 3.0 * old_bad && gap_new > 0.0) {
          accepted = true;
          break;
        }
        alpha *= 0.1;
      }
      if (!accepted) break;
    }

    stall = alpha < 1e-7 ? stall + 1 : 0;
    if (std::getenv("CSRADAR_SOLVER_TRACE")) {
      std::fprintf(stderr, "      alpha_aff=%.3e sigma=%.3e alpha=%.3e\n",
                   alpha_aff, sigma, alpha);
    }

    x += alpha * dx;
    s += alpha * ds;
    z += alpha * dz;

    bool degenerate = false;
    for (int i = 0; i < ncones; ++i) {
      const Vec3 st = scal[i].lambda + alpha * ws_all.segment<3>(3 * i);
      const Vec3 zt = scal[i].lambda + alpha * wz_all.segment<3>(3 * i);
      if (!update_scaling(scal[i], st, zt)) {
        degenerate = true;
        break;
      }
    }
    if (degenerate) break;
  }

  if (failed) {
    result.status = SolveStatus::infeasible;
    return result;
  }
  x = x_best;
  result.status = best_optimal ? SolveStatus::optimal : SolveStatus::max_iter;
  if (std::getenv("CSRADAR_SOLVER_TRACE")) {
    std::fprintf(stderr, "exit: best_merit=%.3e optimal=%d at iter=%d\n",
                 best_merit, best_optimal ? 1 : 0, result.iterations);
  }

  // Feasibility polish: nudge toward the minimum-norm interpolating point
  // when the certificate is not met (max_iter path).
  CxVector est = complex_estimate(x);
  double cert = certificate_inf_norm(x, nullptr);
  if (cert > cert_limit) {
    CxMatrix reg = gram_;
    const double eps = 1e-10 * std::max(1.0, gram_.real().trace()) / n_;
    reg.diagonal().array() += eps;
    const CxVector s_mn = Eigen::LDLT<CxMatrix>(reg).solve(y_);
    const CxVector res_mn = y_ - gram_ * s_mn;
    if (s_mn.allFinite() && res_mn.cwiseAbs().maxCoeff() < mu_) {
      double lo = 0.0, hi = 1.0;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        const CxVector blend = (1.0 - mid) * est + mid * s_mn;
        if ((y_ - gram_ * blend).cwiseAbs().maxCoeff() <= cert_limit) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      est = (1.0 - hi) * est + hi * s_mn;
      cert = (y_ - gram_ * est).cwiseAbs().maxCoeff();
    }
  }

  result.estimate = est;
  result.objective = est.cwiseAbs().sum();
  result.residual_inf_norm = cert;
  return result;
}

}  // namespace

MuBounds mu_bounds(const SensingProblem& problem,
                   double noise_variance_effective) {
  if (noise_variance_effective < 0) {
    throw std::invalid_argument("noise variance must be nonnegative");
  }
  MuBounds bounds;
  const double sigma_tilde_sq =
      noise_variance_effective * problem.mean_row_energy;
  bounds.lower = std::sqrt(2.0 * std::log(static_cast<double>(
                               std::max(problem.grid.size(), 2))) *
                           sigma_tilde_sq) *
                 problem.sigma_max;
  bounds.upper = (problem.theta.adjoint() * problem.observations)
                     .cwiseAbs()
                     .maxCoeff();
  return bounds;
}

RecoveryResult solve_dantzig_gram(const CxMatrix& gram,
                                  const CxVector& correlated, double mu,
                                  const DantzigConfig& config) {
  if (gram.rows() != gram.cols() || gram.rows() != correlated.size()) {
    throw std::invalid_argument("gram/correlated dimension mismatch");
  }
  CxMatrix sym = 0.5 * (gram + gram.adjoint());
  DantzigIpm ipm(sym, correlated, mu, config);
  return ipm.run();
}

RecoveryResult solve_dantzig(const SensingProblem& problem,
                             const DantzigConfig& config) {
  if (problem.theta.size() == 0) {
    throw std::invalid_argument("empty sensing problem");
  }
  double mu = config.mu;
  if (config.mu_policy == MuPolicy::lower_bound_scaled) {
    const MuBounds bounds =
        mu_bounds(problem, config.noise_variance_effective);
    mu = (1.0 + 1.0 / config.t_scalar) * bounds.lower;
  }
  const CxMatrix gram = problem.theta.adjoint() * problem.theta;
  const CxVector correlated = problem.theta.adjoint() * problem.observations;
  return solve_dantzig_gram(gram, correlated, mu, config);
}

RefineResult refine_grid(
    const std::function<SensingProblem(const AngleDopplerGrid&)>& rebuild,
    const AngleDopplerGrid& initial_grid, const RecoveryResult& initial,
    int refinement_factor, double angle_window_rad, double doppler_window_hz,
    const DantzigConfig& config, double candidate_fraction) {
  if (refinement_factor < 2) {
    throw std::invalid_argument("refinement_factor must be >= 2");
  }
  if (initial.estimate.size() != initial_grid.size()) {
    throw std::invalid_argument("estimate does not match initial grid");
  }

  RefineResult out;
  const double peak = initial.estimate.size()
                          ? initial.estimate.cwiseAbs().maxCoeff()
                          : 0.0;
  if (peak <= 0.0) {
    out.detection = false;
    out.grid = initial_grid;
    out.result = initial;
    out.result.estimate = CxVector::Zero(initial_grid.size());
    out.result.objective = 0.0;
    return out;
  }

  const double fine_a = initial_grid.angle_step_rad / refinement_factor;
  const double fine_b = initial_grid.doppler_step_hz > 0
                            ? initial_grid.doppler_step_hz / refinement_factor
                            : 0.0;

  std::set<std::pair<long long, long long>> keys;
  std::vector<GridPoint> points;
  for (int n = 0; n < initial_grid.size(); ++n) {
    if (std::abs(initial.estimate(n)) < candidate_fraction * peak) continue;
    const GridPoint& center = initial_grid.points[n];
    const int na = static_cast<int>(std::floor(angle_window_rad / fine_a + 0.5));
    const int nb = fine_b > 0
                       ? static_cast<int>(std::floor(doppler_window_hz / fine_b + 0.5))
                       : 0;
    for (int ib = -nb; ib <= nb; ++ib) {
      for (int ia = -na; ia <= na; ++ia) {
        GridPoint gp;
        gp.azimuth_rad = center.azimuth_rad + ia * fine_a;
        gp.doppler_hz = center.doppler_hz + ib * fine_b;
        const long long ka = std::llround(gp.azimuth_rad / fine_a);
        const long long kb =
            fine_b > 0 ? std::llround(gp.doppler_hz / fine_b) : 0;
        if (keys.insert({ka, kb}).second) points.push_back(gp);
      }
    }
  }
  std::sort(points.begin(), points.end(), [](const GridPoint& a, const GridPoint& b) {
    if (a.doppler_hz != b.doppler_hz) return a.doppler_hz < b.doppler_hz;
    return a.azimuth_rad < b.azimuth_rad;
  });

  out.detection = true;
  out.grid.points = std::move(points);
  out.grid.angle_step_rad = fine_a;
  out.grid.doppler_step_hz = fine_b;
  const SensingProblem refined = rebuild(out.grid);
  out.result = solve_dantzig(refined, config);
  return out;
}

}  // namespace csradar
