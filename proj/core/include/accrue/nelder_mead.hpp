#ifndef ACCRUE_NELDER_MEAD_HPP_
#define ACCRUE_NELDER_MEAD_HPP_

#include <Eigen/Dense>
#include <algorithm>
#include <functional>
#include <vector>

namespace accrue {

struct NelderMeadOptions {
  int max_iterations = 5000;
  double f_tolerance = 1e-10;
  double x_tolerance = 1e-8;
  double initial_step = 0.5;
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Downhill simplex minimisation with standard coefficients.
inline NelderMeadResult nelder_mead(
    const std::function<double(const Eigen::VectorXd&)>& objective,
    const Eigen::VectorXd& start, const NelderMeadOptions& options = {}) {
  const int n = static_cast<int>(start.size());
  std::vector<Eigen::VectorXd> simplex(n + 1, start);
  std::vector<double> values(n + 1);
  for (int i = 0; i < n; ++i) simplex[i + 1][i] += options.initial_step;
  for (int i = 0; i <= n; ++i) values[i] = objective(simplex[i]);

  NelderMeadResult result;
  auto order = [&] {
    std::vector<int> idx(n + 1);
    for (int i = 0; i <= n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(),
              [&](int a, int b) { return values[a] < values[b]; });
    std::vector<Eigen::VectorXd> s2(n + 1);
    std::vector<double> v2(n + 1);
    for (int i = 0; i <= n; ++i) {
      s2[i] = simplex[idx[i]];
      v2[i] = values[idx[i]];
    }
    simplex.swap(s2);
    values.swap(v2);
  };

  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    order();
    double spread = 0.0;
    for (int i = 1; i <= n; ++i)
      spread = std::max(spread, (simplex[i] - simplex[0]).lpNorm<Eigen::Infinity>());
    if (std::fabs(values[n] - values[0]) <
            options.f_tolerance * (1.0 + std::fabs(values[0])) &&
        spread < options.x_tolerance) {
      result.converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) centroid += simplex[i];
    centroid /= n;

    Eigen::VectorXd reflected = centroid + (centroid - simplex[n]);
    double f_reflected = objective(reflected);
    if (f_reflected < values[0]) {
      Eigen::VectorXd expanded = centroid + 2.0 * (centroid - simplex[n]);
      double f_expanded = objective(expanded);
      if (f_expanded < f_reflected) {
        simplex[n] = expanded;
        values[n] = f_expanded;
      } else {
        simplex[n] = reflected;
        values[n] = f_reflected;
      }
      continue;
    }
    if (f_reflected < values[n - 1]) {
      simplex[n] = reflected;
      values[n] = f_reflected;
      continue;
    }
    Eigen::VectorXd contracted;
    double f_contracted;
    if (f_reflected < values[n]) {
      contracted = centroid + 0.5 * (reflected - centroid);
      f_contracted = objective(contracted);
      if (f_contracted <= f_reflected) {
        simplex[n] = contracted;
        values[n] = f_contracted;
        continue;
      }
    } else {
      contracted = centroid + 0.5 * (simplex[n] - centroid);
      f_contracted = objective(contracted);
      if (f_contracted < values[n]) {
        simplex[n] = contracted;
        values[n] = f_contracted;
        continue;
      }
    }
    // shrink towards the best vertex
    for (int i = 1; i <= n; ++i) {
      simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0]);
      values[i] = objective(simplex[i]);
    }
  }
  order();
  result.x = simplex[0];
  result.value = values[0];
  result.iterations = iter;
  return result;
}

}  // namespace accrue

#endif  // ACCRUE_NELDER_MEAD_HPP_
