#pragma once

// Equivalent transmission model of a slotted CSMA/CA network with Poisson
// node placement: saturated per-slot transmission probability under
// unbounded binary exponential backoff, the neighbor-count distribution,
// and the resulting geometric service process.

#include <cstdint>

namespace baoi::model {

/// Network-wide inputs. Validated at construction; an invalid combination
/// throws baoi::DomainError.
class NetworkParams {
 public:
  NetworkParams(double density, double range, int w_min, int frame_length);

  double density() const { return density_; }
  double range() const { return range_; }
  int w_min() const { return w_min_; }
  int frame_length() const { return frame_length_; }

  /// Mean number of nodes inside a disc of radius `range`: rho * pi * r^2.
  double lambda() const;

 private:
  double density_;
  double range_;
  int w_min_;
  int frame_length_;
};

/// Defaults used throughout: w_min = 16, r = 4, T_F = 50.
inline constexpr int kDefaultWMin = 16;
inline constexpr double kDefaultRange = 4.0;
inline constexpr int kDefaultFrameLength = 50;

enum class FixedPointMethod { kDampedIteration, kBisection };

struct EquivalentModel {
  double p_tx = 0.0;
  double p_cl_avg = 0.0;
  double mu = 0.0;         // (1 - p_cl_avg) * p_tx
  double lambda_nb = 0.0;  // rho * pi * r^2
  FixedPointMethod method = FixedPointMethod::kDampedIteration;
  int iterations = 0;
};

/// Attempt probability of a saturated node whose attempts collide with
/// probability p_cl. Throws DomainError unless 0 <= p_cl < 0.5 and w_min >= 2.
double p_tx_of_collision(double p_cl, int w_min);

/// Collision probability of a node with n_nb neighbors when each neighbor
/// transmits with probability p_tx. n_nb <= 1 yields 0.
double p_cl_given_neighbors(double p_tx, std::int64_t n_nb);

/// Pr{N_nb = n} where N_nb + 1 is Poisson(lambda) conditioned on >= 1.
/// Evaluated in log space.
double neighbor_pmf(double lambda, std::int64_t n);

/// Collision probability averaged over the neighbor-count distribution
/// (closed form of the series sum_n neighbor_pmf(n) * p_cl_given_neighbors).
double avg_collision_prob(double p_tx, double lambda);

struct SolverOptions {
  double tol = 1e-10;
  int max_iter = 10000;
  double damping = 0.5;
};

/// Solves the coupled system p_tx = p_tx_of_collision(p_cl),
/// p_cl = avg_collision_prob(p_tx).
///
/// Runs damped fixed-point iteration from the collision-free attempt
/// probability 2 / (w_min + 1). If that does not settle within
/// `max_iter` steps (or leaves the p_cl < 0.5 region), falls back to
/// bisection on the scalar residual p_tx - F(p_tx), which is strictly
/// increasing on (0, 2 / (w_min + 1)].
///
/// Throws NoConvergence or InfeasibleRegime.
EquivalentModel solve_fixed_point(const NetworkParams& params,
                                  const SolverOptions& options = {});

/// Composite map p_tx -> p_tx_of_collision(avg_collision_prob(p_tx)).
/// Returns 0 where the averaged collision probability reaches 0.5.
double fixed_point_map(double p_tx, double lambda, int w_min);

/// Pr{S = j} for geometric service with per-slot success probability mu.
double service_pmf(double mu, std::int64_t j);

}  // namespace baoi::model
