#pragma once

// Discrete-time GI/Geo/1 analysis of one node's update queue: triangular
// inter-arrival times (one update at a uniform slot of every frame),
// geometric service, and the resulting average broadcast age.

#include <cstdint>

#include "baoi/model_core.hpp"

namespace baoi::queue {

/// Inter-arrival time X = T_F + (difference of two uniform slot offsets),
/// supported on {1, ..., 2 T_F - 1}.
class ArrivalModel {
 public:
  explicit ArrivalModel(int frame_length);

  int frame_length() const { return frame_length_; }
  std::int64_t max_support() const { return 2 * static_cast<std::int64_t>(frame_length_) - 1; }

  double pmf(std::int64_t j) const;
  /// T_F
  double mean() const;
  /// (7 T_F^2 - 1) / 6
  double second_moment() const;

 private:
  int frame_length_;
};

/// Removable singularities at x = 1 (and z = nu in the departure PGF) are
/// evaluated through explicit series inside this distance.
inline constexpr double kSeriesSwitchDistance = 1e-2;

/// h(x) = sum_k T_F^2 Pr{X = k} x^k = (x - 2x^{T+1} + x^{2T+1}) / (1 - x)^2.
/// Defined on [0, 1]; h(1) = T_F^2.
double aux_h(double x, int frame_length);

/// f(x) = sum_{k=1}^{T} k x^k.
double aux_f(double x, int frame_length);

/// g(x) = sum_{k=T+1}^{2T-1} (2T - k) x^k. f + g = h.
double aux_g(double x, int frame_length);

/// dh/dx. h'(1) = T_F^3.
double aux_h_prime(double x, int frame_length);

/// PGF of the inter-arrival time: h(z) / T_F^2.
double pgf_x(double z, int frame_length);

/// True iff mu * T_F > 1 + 1e-9.
bool is_stable(double mu, int frame_length);

/// Root alpha in [0, 1) of z = G_X(1 - mu (1 - z)). Throws Unstable when the
/// queue has no stationary regime.
double solve_alpha(double mu, int frame_length, double tol = 1e-12);

/// How the inter-departure distribution is assembled.
///  kConsistent: E[z^S] (P + A(z)), a proper PGF (G_Y(1) = 1).
///  kPaper: E[z^S] (P + (1 - P) A(z)), the published expression, whose
///          value at z = 1 is P + (1 - P)^2.
/// with P = Pr{X < T} = h(nu) / T_F^2 and
/// A(z) = (1 - nu)(h(z) - h(nu)) / (T_F^2 (z - nu)).
enum class Mode { kConsistent, kPaper };

const char* to_string(Mode mode);

/// Pr{X_k < T_{k-1}} for geometric system time with parameter nu.
double prob_arrival_before_departure(double nu, int frame_length);

double pgf_y(double z, double mu, double nu, int frame_length, Mode mode = Mode::kConsistent);

/// Mean inter-departure time.
///  kConsistent: T_F (flow conservation of a stable queue).
///  kPaper: the published closed form, evaluated verbatim.
double mean_interdeparture(double mu, double nu, int frame_length,
                           Mode mode = Mode::kConsistent);

/// Analytic G_Y'(1) of the consistent-mode PGF:
/// 1/mu + T_F - (1 - P) / (1 - nu). Equals T_F whenever alpha = G_X(nu).
double consistent_pgf_derivative_at_one(double mu, double nu, int frame_length);

/// E[X_k W_k] = nu h'(nu) / (T_F^2 (1 - nu)).
double mean_xw(double mu, double nu, int frame_length);

struct QueueSolution {
  Mode mode = Mode::kConsistent;
  double mu = 0.0;
  double alpha = 0.0;
  double nu = 0.0;
  double mean_system_time = 0.0;    // 1 / (1 - nu)
  double mean_interdeparture = 0.0;  // E[Y] for `mode`
  double e_xw = 0.0;
  double baoi_avg = 0.0;
  double velocity = 0.0;  // 1 / baoi_avg, hops per slot
};

/// Average broadcast age:
///   (T_F/2 + (7 T_F^2 - 1)/12 + T_F/mu + E[XW]) / E[Y].
QueueSolution average_baoi(double mu, int frame_length, Mode mode = Mode::kConsistent);

QueueSolution average_baoi(const model::EquivalentModel& model, int frame_length,
                           Mode mode = Mode::kConsistent);

}  // namespace baoi::queue
