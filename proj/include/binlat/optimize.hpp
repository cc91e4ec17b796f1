#pragma once

#include <Eigen/Core>
#include <functional>

namespace binlat {

struct NelderMeadOptions {
  int max_iter = 4000;
  double f_tol = 1e-12;   // relative spread of simplex values at which to stop
  double init_step = 0.1; // initial simplex edge, scaled by max(1, |x0_i|)
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double f = 0;
  int iterations = 0;
  bool converged = false;
};

// Derivative-free simplex search. Callers embed constraints in the objective
// (penalty or projection); the search itself is unconstrained.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                             const Eigen::VectorXd& x0, const NelderMeadOptions& options = {});

struct GoldenSectionResult {
  double x = 0;
  double f = 0;
  int iterations = 0;
  bool converged = false;
};

// Unimodal minimization on [a, b] to interval width x_tol.
GoldenSectionResult golden_section(const std::function<double(double)>& objective, double a,
                                   double b, double x_tol, int max_iter = 200);

// Componentwise clamp into [lo, hi].
Eigen::VectorXd clamp_box(const Eigen::VectorXd& x, const Eigen::VectorXd& lo,
                          const Eigen::VectorXd& hi);

}  // namespace binlat
