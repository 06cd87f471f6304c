#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>

#include "manrect/geom.hpp"

// Nonlinear conjugate-gradient minimizer over R^2, built for the robust
// vanishing-point cost: Polak-Ribiere+ directions with restart to steepest
// descent, Armijo backtracking line search. Deterministic; always returns the
// best point seen, so the result never costs more than the start.

namespace manrect {

struct OptimizerConfig {
  int max_iters = 200;
  double grad_tol = 1e-8;   // scaled by (1 + initial cost) inside minimize
  double step_tol = 1e-6;   // pixels
  double ls_shrink = 0.5;   // backtracking ratio
  int ls_max = 40;          // line-search evaluations per iteration
  double ls_c1 = 1e-4;      // Armijo sufficient-decrease constant

  void validate() const {
    if (max_iters <= 0 || ls_max <= 0 || !(grad_tol > 0.0) || !(step_tol > 0.0) ||
        !(ls_c1 > 0.0) || !(ls_shrink > 0.0) || !(ls_shrink < 1.0))
      throw std::invalid_argument("OptimizerConfig: fields must be positive, ls_shrink in (0,1)");
  }
};

struct MinimizeResult {
  Point2 x;
  double cost;
  int iterations;
};

// f: Point2 -> (cost, gradient). Terminates on gradient norm below
// grad_tol * (1 + |initial cost|), accepted step below step_tol, a failed
// line search along steepest descent, or max_iters.
template <typename F>
MinimizeResult minimize(F&& f, Point2 x0, const OptimizerConfig& cfg = {}) {
  cfg.validate();
  auto [cost, grad] = f(x0);
  if (!std::isfinite(cost)) throw std::invalid_argument("minimize: cost not finite at start");

  Point2 best_x = x0;
  double best_cost = cost;
  const double gtol = cfg.grad_tol * (1.0 + std::abs(cost));

  Point2 x = x0;
  Point2 dir = -1.0 * grad;
  double trial = 1.0 / (1.0 + norm(grad));
  int iter = 0;
  for (; iter < cfg.max_iters; ++iter) {
    if (norm(grad) < gtol || !is_finite(grad)) break;
    if (dot(dir, grad) >= 0.0) dir = -1.0 * grad;  // restart: lost descent direction

    // Backtracking Armijo search along dir; on failure retry once along
    // steepest descent (the robust cost has conical kinks where a stale
    // conjugate direction can point uphill in every nearby scale).
    const double slope0 = dot(grad, dir);
    double t = trial;
    double new_cost = 0.0;
    Point2 new_grad;
    bool accepted = false;
    for (int k = 0; k < cfg.ls_max; ++k) {
      const Point2 cand = x + t * dir;
      auto [c, g] = f(cand);
      if (std::isfinite(c) && c <= cost + cfg.ls_c1 * t * slope0) {
        new_cost = c;
        new_grad = g;
        accepted = true;
        break;
      }
      t *= cfg.ls_shrink;
    }
    if (!accepted) {
      if (dot(dir, grad) < 0.0 && (dir.x != -grad.x || dir.y != -grad.y)) {
        dir = -1.0 * grad;
        trial = 1.0 / (1.0 + norm(grad));
        continue;
      }
      break;  // no progress even along -grad
    }

    const Point2 step = t * dir;
    const Point2 prev_grad = grad;
    x = x + step;
    cost = new_cost;
    grad = new_grad;
    if (cost < best_cost) {
      best_cost = cost;
      best_x = x;
    }

    // Polak-Ribiere+ update.
    const double denom = dot(prev_grad, prev_grad);
    const double beta = denom > 0.0 ? std::max(0.0, dot(grad, grad - prev_grad) / denom) : 0.0;
    dir = -1.0 * grad + beta * dir;
    trial = 2.0 * t;
    if (norm(step) < cfg.step_tol) break;
  }
  return {best_x, best_cost, iter};
}

}  // namespace manrect
