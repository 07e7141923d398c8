#include "twiqrnn/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "twiqrnn/states.hpp"

namespace twiqrnn {

namespace {

void clamp_to_box(std::vector<double>& x, const NelderMeadConfig& cfg) {
  if (cfg.lower.empty() && cfg.upper.empty()) return;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!cfg.lower.empty()) x[i] = std::max(x[i], cfg.lower[i]);
    if (!cfg.upper.empty()) x[i] = std::min(x[i], cfg.upper[i]);
  }
}

}  // namespace

MinimizeResult derivative_free_minimize(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& x0, const NelderMeadConfig& cfg) {
  const std::size_t dim = x0.size();
  if (dim == 0) throw std::invalid_argument("derivative_free_minimize: empty x0");
  if (cfg.max_evals < static_cast<int>(dim) + 2) {
    throw std::invalid_argument("derivative_free_minimize: max_evals too small");
  }
  if ((!cfg.lower.empty() && cfg.lower.size() != dim) ||
      (!cfg.upper.empty() && cfg.upper.size() != dim)) {
    throw std::invalid_argument("derivative_free_minimize: bound size mismatch");
  }

  MinimizeResult best;
  best.x = x0;
  best.f = std::numeric_limits<double>::infinity();
  int evals = 0;

  auto eval = [&](const std::vector<double>& x) {
    const double v = f(x);
    ++evals;
    if (std::isnan(v)) {
      throw NumericalError("objective returned NaN after " +
                           std::to_string(evals) + " evaluations");
    }
    if (v < best.f) {
      best.f = v;
      best.x = x;
    }
    return v;
  };

  // Dimension-adaptive coefficients (Gao & Han).
  const double n = static_cast<double>(dim);
  const double alpha = 1.0;
  const double beta = 1.0 + 2.0 / n;
  const double gamma = 0.75 - 0.5 / n;
  const double delta = 1.0 - 1.0 / n;

  std::vector<std::vector<double>> simplex(dim + 1, x0);
  for (std::size_t i = 0; i < dim; ++i) {
    simplex[i + 1][i] += cfg.initial_step;
    clamp_to_box(simplex[i + 1], cfg);
  }
  std::vector<double> fvals(dim + 1);
  for (std::size_t i = 0; i <= dim; ++i) {
    if (evals >= cfg.max_evals) break;
    fvals[i] = eval(simplex[i]);
  }

  std::vector<std::size_t> order(dim + 1);
  while (evals < cfg.max_evals) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fvals[a] < fvals[b]; });
    const std::size_t lo = order.front();
    const std::size_t hi = order.back();
    const std::size_t second_hi = order[dim - 1];
    if (std::abs(fvals[hi] - fvals[lo]) <= cfg.f_tol) break;

    std::vector<double> centroid(dim, 0.0);
    for (std::size_t i = 0; i <= dim; ++i) {
      if (i == hi) continue;
      for (std::size_t k = 0; k < dim; ++k) centroid[k] += simplex[i][k];
    }
    for (double& c : centroid) c /= n;

    auto move = [&](double coeff) {
      std::vector<double> x(dim);
      for (std::size_t k = 0; k < dim; ++k) {
        x[k] = centroid[k] + coeff * (centroid[k] - simplex[hi][k]);
      }
      clamp_to_box(x, cfg);
      return x;
    };

    std::vector<double> reflected = move(alpha);
    const double f_reflected = eval(reflected);
    if (evals >= cfg.max_evals) break;

    if (f_reflected < fvals[lo]) {
      std::vector<double> expanded = move(beta);
      const double f_expanded = eval(expanded);
      if (f_expanded < f_reflected) {
        simplex[hi] = std::move(expanded);
        fvals[hi] = f_expanded;
      } else {
        simplex[hi] = std::move(reflected);
        fvals[hi] = f_reflected;
      }
    } else if (f_reflected < fvals[second_hi]) {
      simplex[hi] = std::move(reflected);
      fvals[hi] = f_reflected;
    } else {
      const bool outside = f_reflected < fvals[hi];
      std::vector<double> contracted = move(outside ? gamma : -gamma);
      const double f_contracted = eval(contracted);
      if (f_contracted < std::min(f_reflected, fvals[hi])) {
        simplex[hi] = std::move(contracted);
        fvals[hi] = f_contracted;
      } else {
        // Shrink toward the best vertex.
        for (std::size_t i = 0; i <= dim; ++i) {
          if (i == lo) continue;
          for (std::size_t k = 0; k < dim; ++k) {
            simplex[i][k] =
                simplex[lo][k] + delta * (simplex[i][k] - simplex[lo][k]);
          }
          clamp_to_box(simplex[i], cfg);
          if (evals >= cfg.max_evals) break;
          fvals[i] = eval(simplex[i]);
        }
      }
    }
    if (evals >= cfg.max_evals) break;
  }

  best.evals = evals;
  return best;
}

void adam_step(std::vector<double>& params, const std::vector<double>& grads,
               AdamState& state, const AdamConfig& cfg) {
  if (params.size() != grads.size()) {
    throw std::invalid_argument("adam_step: param/grad size mismatch");
  }
  if (state.m.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  if (state.m.size() != params.size()) {
    throw std::invalid_argument("adam_step: state size mismatch");
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grads[i];
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grads[i] * grads[i];
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
  }
}

}  // namespace twiqrnn
