#include "baoi/model_core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "baoi/errors.hpp"

namespace baoi::model {

namespace {

// (e^x - 1 - x) / x^2, accurate for small |x|.
double exp_remainder2(double x) {
  if (std::abs(x) < 1e-2) {
    return 0.5 + x * (1.0 / 6 + x * (1.0 / 24 + x * (1.0 / 120 + x / 720)));
  }
  return (std::expm1(x) - x) / (x * x);
}

}  // namespace

NetworkParams::NetworkParams(double density, double range, int w_min, int frame_length)
    : density_(density), range_(range), w_min_(w_min), frame_length_(frame_length) {
  if (!(density > 0.0) || !std::isfinite(density)) {
    throw DomainError("density must be positive and finite, got " + std::to_string(density));
  }
  if (!(range > 0.0) || !std::isfinite(range)) {
    throw DomainError("transmit range must be positive and finite, got " + std::to_string(range));
  }
  if (w_min < 2) {
    throw DomainError("w_min must be at least 2, got " + std::to_string(w_min));
  }
  if (frame_length < 1) {
    throw DomainError("frame length must be at least 1, got " + std::to_string(frame_length));
  }
  const double l = lambda();
  if (!(l > 0.0) || !std::isfinite(l)) {
    throw DomainError("density * pi * range^2 must be positive and finite");
  }
}

double NetworkParams::lambda() const { return density_ * std::numbers::pi * range_ * range_; }

double p_tx_of_collision(double p_cl, int w_min) {
  if (!(p_cl >= 0.0 && p_cl < 0.5)) {
    throw DomainError("collision probability must lie in [0, 0.5), got " + std::to_string(p_cl));
  }
  if (w_min < 2) {
    throw DomainError("w_min must be at least 2");
  }
  const double a = 1.0 - 2.0 * p_cl;
  return 2.0 * a / (w_min * (1.0 - p_cl) + a);
}

double p_cl_given_neighbors(double p_tx, std::int64_t n_nb) {
  if (!(p_tx >= 0.0 && p_tx <= 1.0)) {
    throw DomainError("transmission probability must lie in [0, 1]");
  }
  if (n_nb < 0) {
    throw DomainError("neighbor count must be non-negative");
  }
  if (n_nb <= 1) return 0.0;
  if (p_tx == 1.0) return 1.0;
  return -std::expm1(static_cast<double>(n_nb - 1) * std::log1p(-p_tx));
}

double neighbor_pmf(double lambda, std::int64_t n) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw DomainError("neighbor pmf requires lambda > 0");
  }
  if (n < 0) return 0.0;
  const double k = static_cast<double>(n) + 1.0;
  const double log_p =
      k * std::log(lambda) - lambda - std::lgamma(k + 1.0) - std::log(-std::expm1(-lambda));
  return std::exp(log_p);
}

double avg_collision_prob(double p_tx, double lambda) {
  if (!(p_tx >= 0.0 && p_tx <= 1.0)) {
    throw DomainError("transmission probability must lie in [0, 1]");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw DomainError("lambda must be non-negative and finite");
  }
  if (p_tx == 0.0 || lambda == 0.0) return 0.0;
  const double q = 1.0 - p_tx;
  if (q == 0.0) {
    // Every neighbor transmits: only isolated nodes avoid collision.
    return 1.0 - lambda / std::expm1(lambda);
  }

  // 1 - p_cl = [lambda + (e^{lambda q} - 1 - lambda q) / q^2] / (e^lambda - 1)
  double no_collision;
  if (lambda <= 30.0) {
    no_collision = lambda * (1.0 + lambda * exp_remainder2(lambda * q)) / std::expm1(lambda);
  } else {
    const double e = std::exp(-lambda);
    no_collision = (lambda * e + (std::exp(-lambda * p_tx) - e * (1.0 + lambda * q)) / (q * q)) /
                   (-std::expm1(-lambda));
  }
  return 1.0 - no_collision;
}

double fixed_point_map(double p_tx, double lambda, int w_min) {
  const double p_cl = avg_collision_prob(p_tx, lambda);
  if (p_cl >= 0.5) return 0.0;
  return p_tx_of_collision(p_cl, w_min);
}

EquivalentModel solve_fixed_point(const NetworkParams& params, const SolverOptions& options) {
  if (!(options.tol > 0.0)) throw DomainError("solver tolerance must be positive");
  if (!(options.damping > 0.0 && options.damping <= 1.0)) {
    throw DomainError("damping must lie in (0, 1]");
  }
  const double lambda = params.lambda();
  const int w_min = params.w_min();
  const double p_free = 2.0 / (w_min + 1.0);

  auto finish = [&](double p_tx, FixedPointMethod method, int iterations) {
    EquivalentModel m;
    m.p_tx = p_tx;
    m.p_cl_avg = avg_collision_prob(p_tx, lambda);
    if (m.p_cl_avg >= 0.5) {
      throw InfeasibleRegime("fixed point has average collision probability " +
                             std::to_string(m.p_cl_avg) + " >= 0.5");
    }
    m.mu = (1.0 - m.p_cl_avg) * m.p_tx;
    m.lambda_nb = lambda;
    m.method = method;
    m.iterations = iterations;
    return m;
  };

  double p_tx = p_free;
  for (int i = 0; i < options.max_iter; ++i) {
    const double p_cl = avg_collision_prob(p_tx, lambda);
    if (p_cl >= 0.5) break;
    const double next = p_tx_of_collision(p_cl, w_min);
    if (std::abs(next - p_tx) < options.tol) {
      return finish(p_tx, FixedPointMethod::kDampedIteration, i + 1);
    }
    p_tx = (1.0 - options.damping) * p_tx + options.damping * next;
  }

  // Residual p - F(p) is strictly increasing: negative at 0, non-negative at p_free.
  auto residual = [&](double p) { return p - fixed_point_map(p, lambda, w_min); };
  double lo = 0.0;
  double hi = p_free;
  int it = 0;
  for (; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (residual(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double r_lo = std::abs(residual(lo));
  const double r_hi = std::abs(residual(hi));
  const double best = r_lo <= r_hi ? lo : hi;
  const double p_cl = avg_collision_prob(best, lambda);
  if (p_cl >= 0.5) {
    throw InfeasibleRegime("no fixed point with average collision probability below 0.5");
  }
  if (std::min(r_lo, r_hi) >= options.tol) {
    throw NoConvergence("fixed-point solver residual " + std::to_string(std::min(r_lo, r_hi)) +
                        " above tolerance");
  }
  return finish(best, FixedPointMethod::kBisection, options.max_iter + it);
}

double service_pmf(double mu, std::int64_t j) {
  if (!(mu > 0.0 && mu <= 1.0)) throw DomainError("service rate must lie in (0, 1]");
  if (j < 1) throw DomainError("service time is at least one slot");
  if (mu == 1.0) return j == 1 ? 1.0 : 0.0;
  return mu * std::exp(static_cast<double>(j - 1) * std::log1p(-mu));
}

}  // namespace baoi::model
