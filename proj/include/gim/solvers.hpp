#pragma once

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <string_view>
#include <utility>
#include <vector>

#include "gim/errors.hpp"

namespace gim {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

struct SolverConfig {
  double epsilon = 1e-9;
  int max_iterations = 50000;

  void validate() const {
    if (!(epsilon > 0.0)) throw ValidationError("solver epsilon must be positive");
    if (max_iterations < 1) throw ValidationError("solver max_iterations must be >= 1");
  }
};

enum class Termination { kTolerance, kMaxIterations, kBreakdown };

inline std::string_view termination_name(Termination t) {
  switch (t) {
    case Termination::kTolerance: return "tolerance";
    case Termination::kMaxIterations: return "max_iterations";
    case Termination::kBreakdown: return "breakdown";
  }
  return "?";
}

struct SolverReport {
  int iterations = 0;
  bool converged = false;
  Termination termination = Termination::kTolerance;
  // SYMMLQ residual estimates at exit.
  double lq_norm = 0.0;
  double cg_norm = 0.0;
  double qr_norm = 0.0;
  // CGNR: normal-equation residual at exit and ||apply(b_k) - f|| per iterate.
  double normal_residual = 0.0;
  std::vector<double> residual_history;
};

template <typename Scalar>
struct SolveResult {
  VectorX<Scalar> x;
  SolverReport report;
};

namespace detail {
template <typename Scalar>
void require_finite(Scalar value, const char* what) {
  if (!std::isfinite(double(value))) throw SolverError(std::string("non-finite ") + what);
}
}  // namespace detail

/// SYMMLQ for M x = b with M symmetric, possibly indefinite or singular (b
/// must lie in the range of M). `apply(in)` returns M * in; it is the only
/// access to M. Iterations count Lanczos steps, i.e. products with M beyond
/// the initial residual.
template <typename Scalar, typename Apply>
SolveResult<Scalar> symmlq(Apply&& apply, const VectorX<Scalar>& b,
                           VectorX<Scalar> x, const SolverConfig& cfg) {
  cfg.validate();
  using std::abs;
  using std::sqrt;
  SolveResult<Scalar> result;
  SolverReport& report = result.report;

  // Initial Lanczos step.
  VectorX<Scalar> u = apply(x);
  VectorX<Scalar> w = b - u;
  const Scalar beta0 = w.norm();
  detail::require_finite(beta0, "initial residual");
  if (beta0 == Scalar(0)) {
    report.converged = true;
    result.x = std::move(x);
    return result;
  }
  w /= beta0;
  u = apply(w);
  ++report.iterations;
  Scalar alpha = w.dot(u);
  u -= alpha * w;

  Scalar beta1 = beta0;
  Scalar beta2 = u.norm();
  Scalar lq = beta1, cg = beta1, qr = beta1;
  Scalar rhs1 = beta1, rhs2 = 0;
  Scalar gbar = alpha, dbar = beta2;
  Scalar sn_prod = 1;
  Scalar t_norm2 = alpha * alpha + beta2 * beta2;
  Scalar z_norm2 = 0;
  // wbar starts at the first Lanczos vector so the b-direction component of
  // x is carried through the rotations.
  VectorX<Scalar> wbar = w;
  VectorX<Scalar> v(b.size());
  const Scalar eps2 = Scalar(cfg.epsilon) * Scalar(cfg.epsilon);
  Scalar d = 0;

  while (true) {
    d = gbar;
    if (d == Scalar(0)) d = sqrt(t_norm2);
    lq = sqrt(rhs1 * rhs1 + rhs2 * rhs2);
    qr = beta0 * sn_prod;
    cg = beta2 * qr / abs(d);
    if (cg * cg <= t_norm2 * z_norm2 * eps2) {
      report.termination = Termination::kTolerance;
      report.converged = true;
      break;
    }
    // Lucky breakdown: the Krylov space is invariant, up to rounding.
    if (beta2 <= Scalar(1e-300) ||
        beta2 <= std::numeric_limits<Scalar>::epsilon() * sqrt(t_norm2)) {
      report.termination = Termination::kBreakdown;
      report.converged = true;
      break;
    }
    if (report.iterations >= cfg.max_iterations) {
      report.termination = Termination::kMaxIterations;
      break;
    }

    // Lanczos step.
    u /= beta2;
    v = apply(u);
    ++report.iterations;
    alpha = u.dot(v);
    {
      Scalar sq = 0;
      for (Eigen::Index i = 0; i < v.size(); ++i) {
        v[i] -= alpha * u[i] + beta2 * w[i];
        sq += v[i] * v[i];
      }
      beta1 = beta2;
      beta2 = sqrt(sq);
    }
    detail::require_finite(beta2, "Lanczos vector");
    t_norm2 += alpha * alpha + beta1 * beta1 + beta2 * beta2;

    // Next plane rotation.
    const Scalar gamma = sqrt(gbar * gbar + beta1 * beta1);
    const Scalar cs = gbar / gamma;
    const Scalar sn = beta1 / gamma;
    const Scalar delta = cs * dbar + sn * alpha;
    gbar = sn * dbar - cs * alpha;
    dbar = -cs * beta2;

    const Scalar zeta = rhs1 / gamma;
    const Scalar s = cs * zeta;
    const Scalar t = sn * zeta;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      x[i] += s * wbar[i] + t * u[i];
      wbar[i] = sn * wbar[i] - cs * u[i];
    }

    sn_prod *= sn;
    z_norm2 += zeta * zeta;
    rhs1 = rhs2 - delta * zeta;
    rhs2 = -sn * beta2 * zeta;
    detail::require_finite(rhs1, "LQ recurrence");

    // w <- u, u <- v; the old w becomes scratch.
    std::swap(w, u);
    std::swap(u, v);
  }

  // Transfer to the CG point when its residual estimate is smaller.
  if (cg <= lq) x += (rhs1 / d) * wbar;

  report.lq_norm = double(lq);
  report.cg_norm = double(cg);
  report.qr_norm = double(qr);
  result.x = std::move(x);
  return result;
}

/// Conjugate gradients on the normal equations R^T R b = R^T f. Stops when
/// ||R^T (f - R b)|| <= epsilon * (its initial value).
template <typename Scalar, typename Apply, typename ApplyAdjoint>
SolveResult<Scalar> cgnr(Apply&& apply, ApplyAdjoint&& apply_adjoint,
                         const VectorX<Scalar>& f, VectorX<Scalar> b,
                         const SolverConfig& cfg) {
  cfg.validate();
  SolveResult<Scalar> result;
  SolverReport& report = result.report;

  VectorX<Scalar> r = f - apply(b);
  VectorX<Scalar> z = apply_adjoint(r);
  report.residual_history.push_back(double(r.norm()));
  Scalar zz = z.squaredNorm();
  detail::require_finite(zz, "normal residual");
  const Scalar stop = Scalar(cfg.epsilon) * std::sqrt(zz);
  report.normal_residual = double(std::sqrt(zz));
  if (zz == Scalar(0)) {
    report.converged = true;
    result.x = std::move(b);
    return result;
  }

  VectorX<Scalar> p = z;
  report.termination = Termination::kMaxIterations;
  while (report.iterations < cfg.max_iterations) {
    const VectorX<Scalar> q = apply(p);
    const Scalar qq = q.squaredNorm();
    detail::require_finite(qq, "search direction image");
    if (qq == Scalar(0)) {
      report.termination = Termination::kBreakdown;
      break;
    }
    const Scalar step = zz / qq;
    b += step * p;
    r -= step * q;
    ++report.iterations;
    report.residual_history.push_back(double(r.norm()));

    z = apply_adjoint(r);
    const Scalar zz_next = z.squaredNorm();
    detail::require_finite(zz_next, "normal residual");
    report.normal_residual = double(std::sqrt(zz_next));
    if (std::sqrt(zz_next) <= stop) {
      report.termination = Termination::kTolerance;
      report.converged = true;
      break;
    }
    p = z + (zz_next / zz) * p;
    zz = zz_next;
  }
  result.x = std::move(b);
  return result;
}

}  // namespace gim
