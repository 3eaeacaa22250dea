#include "respotopt/mma.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "respotopt/kernels/kernels.hpp"

namespace respotopt {

namespace {

constexpr double kRaa0 = 1e-7;    // convexity floor on the objective approximation
constexpr double kAlbefa = 0.1;   // bound offset from the asymptotes
constexpr double kLamCap = 1e30;  // multiplier cap; beyond this the subproblem
                                  // is treated as infeasible

struct Subproblem {
  Eigen::VectorXd low, upp, alfa, beta, p0, q0;
  std::vector<Eigen::VectorXd> P, Q;
  std::vector<double> b;
  int n = 0;
  int m = 0;
};

// x(lam) and the residual of constraint i at combined multipliers; constraint
// i enters through the kernel's lam slot, the others are folded into p0/q0.
double eval_at(const Subproblem& sp, const Eigen::VectorXd& lam, int i,
               double lam_i, Eigen::VectorXd& x) {
  if (sp.m == 0) {
    kernels::mma_eval(sp.n, sp.p0.data(), sp.q0.data(), nullptr, nullptr,
                      sp.low.data(), sp.upp.data(), sp.alfa.data(), sp.beta.data(),
                      0.0, x.data());
    return 0.0;
  }
  const Eigen::VectorXd* p_base = &sp.p0;
  const Eigen::VectorXd* q_base = &sp.q0;
  Eigen::VectorXd p_eff, q_eff;
  if (sp.m > 1) {
    p_eff = sp.p0;
    q_eff = sp.q0;
    for (int k = 0; k < sp.m; ++k) {
      if (k == i) continue;
      p_eff += lam[k] * sp.P[k];
      q_eff += lam[k] * sp.Q[k];
    }
    p_base = &p_eff;
    q_base = &q_eff;
  }
  const double sum = kernels::mma_eval(sp.n, p_base->data(), q_base->data(),
                                       sp.P[i].data(), sp.Q[i].data(), sp.low.data(),
                                       sp.upp.data(), sp.alfa.data(), sp.beta.data(),
                                       lam_i, x.data());
  return sum - sp.b[i];
}

// Bisection on multiplier i holding the others fixed. Returns true when the
// subproblem looks infeasible in this coordinate (residual > 0 at the cap).
bool bisect_multiplier(const Subproblem& sp, Eigen::VectorXd& lam, int i,
                       Eigen::VectorXd& x) {
  if (eval_at(sp, lam, i, 0.0, x) <= 0.0) {
    lam[i] = 0.0;
    return false;
  }
  double hi = 1.0;
  while (eval_at(sp, lam, i, hi, x) > 0.0) {
    hi *= 10.0;
    if (hi > kLamCap) {
      lam[i] = kLamCap;
      eval_at(sp, lam, i, kLamCap, x);
      return true;
    }
  }
  double lo = hi > 1.0 ? hi / 10.0 : 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (eval_at(sp, lam, i, mid, x) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  // Settle on the feasible side so the (conservative) approximated constraint,
  // and hence the true linear constraint, holds at the returned point.
  eval_at(sp, lam, i, hi, x);
  lam[i] = hi;
  return false;
}

}  // namespace

Eigen::VectorXd mma_update(const Eigen::VectorXd& x, const Eigen::VectorXd& xmin,
                           const Eigen::VectorXd& xmax, const Eigen::VectorXd& dobj,
                           const std::vector<MmaConstraint>& constraints,
                           MmaState& state) {
  const int n = static_cast<int>(x.size());
  if (xmin.size() != n || xmax.size() != n || dobj.size() != n)
    throw std::invalid_argument("mma_update: length mismatch");
  if (((xmax - xmin).array() <= 0.0).any())
    throw std::invalid_argument("mma_update: box must have positive width");
  if (!dobj.allFinite())
    throw std::invalid_argument("mma_update: objective gradient not finite");
  for (const auto& c : constraints) {
    if (c.gradient.size() != n)
      throw std::invalid_argument("mma_update: constraint gradient length mismatch");
    if (!c.gradient.allFinite() || !std::isfinite(c.value))
      throw std::invalid_argument("mma_update: constraint not finite");
  }

  const MmaOptions& opt = state.options;
  const Eigen::VectorXd range = xmax - xmin;

  Subproblem sp;
  sp.n = n;
  sp.m = static_cast<int>(constraints.size());
  if (state.iteration < 2) {
    sp.low = x - opt.asymptote_init * range;
    sp.upp = x + opt.asymptote_init * range;
  } else {
    sp.low.resize(n);
    sp.upp.resize(n);
    for (int j = 0; j < n; ++j) {
      const double zzz = (x[j] - state.x_prev[j]) * (state.x_prev[j] - state.x_prev2[j]);
      double factor = 1.0;
      if (zzz > 0.0) factor = opt.asymptote_incr;
      if (zzz < 0.0) factor = opt.asymptote_decr;
      double lo = x[j] - factor * (state.x_prev[j] - state.lower_asymptotes[j]);
      double up = x[j] + factor * (state.upper_asymptotes[j] - state.x_prev[j]);
      // A loose minimum distance (1e-6 of the box) keeps the subproblem well
      // posed while letting sustained oscillation contract the asymptotes far
      // enough for fine convergence.
      lo = std::clamp(lo, x[j] - 10.0 * range[j], x[j] - 1e-6 * range[j]);
      up = std::clamp(up, x[j] + 1e-6 * range[j], x[j] + 10.0 * range[j]);
      sp.low[j] = lo;
      sp.upp[j] = up;
    }
  }

  sp.alfa.resize(n);
  sp.beta.resize(n);
  for (int j = 0; j < n; ++j) {
    sp.alfa[j] = std::max({xmin[j], sp.low[j] + kAlbefa * (x[j] - sp.low[j]),
                           x[j] - opt.move_limit * range[j]});
    sp.beta[j] = std::min({xmax[j], sp.upp[j] - kAlbefa * (sp.upp[j] - x[j]),
                           x[j] + opt.move_limit * range[j]});
  }

  const Eigen::ArrayXd ux1 = (sp.upp - x).array();
  const Eigen::ArrayXd xl1 = (x - sp.low).array();
  const Eigen::ArrayXd ux2 = ux1 * ux1;
  const Eigen::ArrayXd xl2 = xl1 * xl1;

  {
    const Eigen::ArrayXd pg = dobj.array().max(0.0);
    const Eigen::ArrayXd qg = (-dobj.array()).max(0.0);
    const Eigen::ArrayXd pq =
        0.001 * (pg + qg) + kRaa0 / range.array().max(1e-5);
    sp.p0 = ((pg + pq) * ux2).matrix();
    sp.q0 = ((qg + pq) * xl2).matrix();
  }
  for (const auto& c : constraints) {
    const Eigen::ArrayXd Pg = c.gradient.array().max(0.0);
    const Eigen::ArrayXd Qg = (-c.gradient.array()).max(0.0);
    sp.P.push_back((Pg * ux2).matrix());
    sp.Q.push_back((Qg * xl2).matrix());
    sp.b.push_back((sp.P.back().array() / ux1 + sp.Q.back().array() / xl1).sum() -
                   c.value);
  }

  Eigen::VectorXd x_new(n);
  Eigen::VectorXd lam = Eigen::VectorXd::Zero(std::max(sp.m, 1));
  bool infeasible = false;
  if (sp.m == 0) {
    eval_at(sp, lam, 0, 0.0, x_new);
  } else if (sp.m == 1) {
    infeasible = bisect_multiplier(sp, lam, 0, x_new);
  } else {
    // Cyclic dual ascent; each sweep re-bisects every multiplier.
    Eigen::VectorXd lam_old = lam;
    for (int sweep = 0; sweep < 60; ++sweep) {
      infeasible = false;
      for (int i = 0; i < sp.m; ++i)
        infeasible = bisect_multiplier(sp, lam, i, x_new) || infeasible;
      if ((lam - lam_old).lpNorm<Eigen::Infinity>() <=
          1e-12 * (1.0 + lam.lpNorm<Eigen::Infinity>()))
        break;
      lam_old = lam;
    }
    // Recover the primal at the final multipliers.
    eval_at(sp, lam, 0, lam[0], x_new);
  }

  state.lower_asymptotes = sp.low;
  state.upper_asymptotes = sp.upp;
  state.x_prev2 = state.iteration >= 1 ? state.x_prev : x;
  state.x_prev = x;
  state.iteration += 1;
  state.last_infeasible = infeasible;
  return x_new;
}

}  // namespace respotopt
