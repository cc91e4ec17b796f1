#include "binlat/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "binlat/errors.hpp"

namespace binlat {

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                             const Eigen::VectorXd& x0, const NelderMeadOptions& options) {
  const int n = static_cast<int>(x0.size());
  if (n < 1) throw ValidationError("nelder_mead: empty start point");

  constexpr double kReflect = 1.0;
  constexpr double kExpand = 2.0;
  constexpr double kContract = 0.5;
  constexpr double kShrink = 0.5;

  std::vector<Eigen::VectorXd> simplex;
  std::vector<double> values;
  simplex.reserve(n + 1);
  values.reserve(n + 1);
  simplex.push_back(x0);
  values.push_back(objective(x0));
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd v = x0;
    v[i] += options.init_step * std::max(1.0, std::abs(x0[i]));
    simplex.push_back(v);
    values.push_back(objective(v));
  }

  std::vector<int> order(n + 1);
  NelderMeadResult result;
  for (int iter = 0; iter < options.max_iter; ++iter) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return values[a] < values[b]; });
    const int best = order[0];
    const int worst = order[n];
    const int second_worst = order[n - 1];

    result.iterations = iter;
    const double spread = values[worst] - values[best];
    if (spread <= options.f_tol * (std::abs(values[best]) + options.f_tol)) {
      result.converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i <= n; ++i)
      if (i != worst) centroid += simplex[i];
    centroid /= n;

    const Eigen::VectorXd reflected = centroid + kReflect * (centroid - simplex[worst]);
    const double f_reflected = objective(reflected);

    if (f_reflected < values[best]) {
      const Eigen::VectorXd expanded = centroid + kExpand * (reflected - centroid);
      const double f_expanded = objective(expanded);
      if (f_expanded < f_reflected) {
        simplex[worst] = expanded;
        values[worst] = f_expanded;
      } else {
        simplex[worst] = reflected;
        values[worst] = f_reflected;
      }
      continue;
    }
    if (f_reflected < values[second_worst]) {
      simplex[worst] = reflected;
      values[worst] = f_reflected;
      continue;
    }
    const Eigen::VectorXd contracted = centroid + kContract * (simplex[worst] - centroid);
    const double f_contracted = objective(contracted);
    if (f_contracted < values[worst]) {
      simplex[worst] = contracted;
      values[worst] = f_contracted;
      continue;
    }
    for (int i = 0; i <= n; ++i) {
      if (i == best) continue;
      simplex[i] = simplex[best] + kShrink * (simplex[i] - simplex[best]);
      values[i] = objective(simplex[i]);
    }
  }

  const auto best_it = std::min_element(values.begin(), values.end());
  result.x = simplex[static_cast<std::size_t>(best_it - values.begin())];
  result.f = *best_it;
  return result;
}

GoldenSectionResult golden_section(const std::function<double(double)>& objective, double a,
                                   double b, double x_tol, int max_iter) {
  if (!(a < b)) throw ValidationError("golden_section: need a < b");
  if (!(x_tol > 0)) throw ValidationError("golden_section: x_tol must be positive");
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = objective(x1);
  double f2 = objective(x2);
  GoldenSectionResult result;
  for (int iter = 0; iter < max_iter; ++iter) {
    result.iterations = iter + 1;
    if (b - a <= x_tol) {
      result.converged = true;
      break;
    }
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = objective(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = objective(x2);
    }
  }
  if (f1 <= f2) {
    result.x = x1;
    result.f = f1;
  } else {
    result.x = x2;
    result.f = f2;
  }
  return result;
}

Eigen::VectorXd clamp_box(const Eigen::VectorXd& x, const Eigen::VectorXd& lo,
                          const Eigen::VectorXd& hi) {
  if (x.size() != lo.size() || x.size() != hi.size())
    throw ValidationError("clamp_box: size mismatch");
  return x.cwiseMax(lo).cwiseMin(hi);
}

}  // namespace binlat
