#include "baoi/queue_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "baoi/errors.hpp"

namespace baoi::queue {

namespace {

void check_frame(int frame_length) {
  if (frame_length < 1) throw DomainError("frame length must be at least 1");
}

void check_unit(double x, const char* what) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw DomainError(std::string(what) + " must lie in [0, 1], got " + std::to_string(x));
  }
}

// T_F^2 Pr{X = k}.
long double weight(std::int64_t k, std::int64_t t) { return k <= t ? k : 2 * t - k; }

bool near_one(double x) { return 1.0 - x < kSeriesSwitchDistance; }

template <typename Coef>
double power_series(double x, std::int64_t first, std::int64_t last, Coef coef) {
  long double sum = 0.0L;
  long double p = std::pow(static_cast<long double>(x), static_cast<int>(first));
  for (std::int64_t k = first; k <= last; ++k) {
    sum += coef(k) * p;
    p *= x;
  }
  return static_cast<double>(sum);
}

// (h(z) - h(nu)) / (z - nu) as sum_k c_k (z^k - nu^k) / (z - nu); exact at z = nu.
double h_divided_difference(double z, double nu, int frame_length) {
  const std::int64_t t = frame_length;
  long double d = 0.0L;         // (z^k - nu^k) / (z - nu)
  long double nu_pow = 1.0L;    // nu^{k-1}
  long double sum = 0.0L;
  for (std::int64_t k = 1; k <= 2 * t - 1; ++k) {
    d = z * d + nu_pow;
    nu_pow *= nu;
    sum += weight(k, t) * d;
  }
  return static_cast<double>(sum);
}

// Requires 0 <= nu < 1 from an upstream alpha solve.
void check_nu(double mu, double nu) {
  if (!(mu > 0.0 && mu <= 1.0)) throw DomainError("service rate must lie in (0, 1]");
  if (!(nu >= 0.0 && nu < 1.0)) throw DomainError("nu must lie in [0, 1)");
}

}  // namespace

ArrivalModel::ArrivalModel(int frame_length) : frame_length_(frame_length) {
  check_frame(frame_length);
}

double ArrivalModel::pmf(std::int64_t j) const {
  const std::int64_t t = frame_length_;
  if (j < 1 || j > 2 * t - 1) return 0.0;
  return static_cast<double>(weight(j, t)) / static_cast<double>(t * t);
}

double ArrivalModel::mean() const { return frame_length_; }

double ArrivalModel::second_moment() const {
  const double t = frame_length_;
  return (7.0 * t * t - 1.0) / 6.0;
}

double aux_h(double x, int frame_length) {
  check_frame(frame_length);
  check_unit(x, "x");
  const std::int64_t t = frame_length;
  if (x == 1.0) return static_cast<double>(t * t);
  if (near_one(x)) {
    return power_series(x, 1, 2 * t - 1, [t](std::int64_t k) { return weight(k, t); });
  }
  // x - 2x^{T+1} + x^{2T+1} = x (1 - x^T)^2
  const long double xl = x;
  const long double s = (1.0L - std::pow(xl, frame_length)) / (1.0L - xl);
  return static_cast<double>(xl * s * s);
}

double aux_f(double x, int frame_length) {
  check_frame(frame_length);
  check_unit(x, "x");
  const std::int64_t t = frame_length;
  if (near_one(x)) {
    return power_series(x, 1, t, [](std::int64_t k) { return static_cast<long double>(k); });
  }
  const long double xl = x;
  const long double tl = t;
  const long double xt1 = std::pow(xl, frame_length + 1);
  const long double num = xl - (1.0L + tl) * xt1 + tl * xt1 * xl;
  return static_cast<double>(num / ((1.0L - xl) * (1.0L - xl)));
}

double aux_g(double x, int frame_length) {
  check_frame(frame_length);
  check_unit(x, "x");
  const std::int64_t t = frame_length;
  if (near_one(x)) {
    return power_series(x, t + 1, 2 * t - 1,
                        [t](std::int64_t k) { return static_cast<long double>(2 * t - k); });
  }
  const long double xl = x;
  const long double tl = t;
  const long double xt1 = std::pow(xl, frame_length + 1);
  const long double x2t1 = std::pow(xl, 2 * frame_length + 1);
  const long double num = (tl - 1.0L) * xt1 - tl * xt1 * xl + x2t1;
  return static_cast<double>(num / ((1.0L - xl) * (1.0L - xl)));
}

double aux_h_prime(double x, int frame_length) {
  check_frame(frame_length);
  check_unit(x, "x");
  const std::int64_t t = frame_length;
  if (near_one(x)) {
    if (x == 1.0) return static_cast<double>(t * t * t);
    return power_series(x, 0, 2 * t - 2,
                        [t](std::int64_t k) { return (k + 1) * weight(k + 1, t); });
  }
  const long double xl = x;
  const long double tl = t;
  const long double xt = std::pow(xl, frame_length);
  const long double x2t = xt * xt;
  const long double num = (2 * tl + 1) * x2t - (2 + 2 * tl) * xt + 1.0L + xl +
                          (2 * tl - 2) * xt * xl + (1 - 2 * tl) * x2t * xl;
  const long double d = 1.0L - xl;
  return static_cast<double>(num / (d * d * d));
}

double pgf_x(double z, int frame_length) {
  const double t = frame_length;
  return aux_h(z, frame_length) / (t * t);
}

bool is_stable(double mu, int frame_length) { return mu * frame_length > 1.0 + 1e-9; }

double solve_alpha(double mu, int frame_length, double tol) {
  check_frame(frame_length);
  if (!(mu > 0.0 && mu <= 1.0)) throw DomainError("service rate must lie in (0, 1]");
  if (!(tol > 0.0)) throw DomainError("root tolerance must be positive");
  if (!is_stable(mu, frame_length)) {
    throw Unstable("queue is unstable: mu * T_F = " + std::to_string(mu * frame_length) +
                   " <= 1");
  }
  auto phi = [&](double z) { return pgf_x(1.0 - mu * (1.0 - z), frame_length); };

  double lo = 0.0;
  if (phi(lo) == 0.0) return 0.0;

  // phi(z) - z is convex, positive at 0, zero at alpha and 1, negative between.
  double hi = -1.0;
  for (int k = 1; k <= 45; ++k) {
    const double z = 1.0 - std::ldexp(1.0, -k);
    if (phi(z) - z < 0.0) {
      hi = z;
      break;
    }
  }
  if (hi < 0.0) {
    throw Unstable("no root of z = G_X(1 - mu (1 - z)) resolvable below 1 (mu * T_F = " +
                   std::to_string(mu * frame_length) + ")");
  }

  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (phi(mid) - mid > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-3 * tol) break;
  }
  const double r_lo = std::abs(phi(lo) - lo);
  const double r_hi = std::abs(phi(hi) - hi);
  const double alpha = r_lo <= r_hi ? lo : hi;
  if (std::min(r_lo, r_hi) >= tol) {
    throw NoConvergence("alpha root residual above tolerance");
  }
  return alpha;
}

const char* to_string(Mode mode) {
  return mode == Mode::kConsistent ? "consistent" : "paper";
}

double prob_arrival_before_departure(double nu, int frame_length) {
  return pgf_x(nu, frame_length);
}

double pgf_y(double z, double mu, double nu, int frame_length, Mode mode) {
  check_frame(frame_length);
  check_unit(z, "z");
  check_nu(mu, nu);
  const double t2 = static_cast<double>(frame_length) * frame_length;
  const double service = z * mu / (1.0 - z + z * mu);
  const double p = prob_arrival_before_departure(nu, frame_length);

  double ratio;  // (h(z) - h(nu)) / (z - nu)
  if (std::abs(z - nu) < kSeriesSwitchDistance) {
    ratio = h_divided_difference(z, nu, frame_length);
  } else {
    ratio = (aux_h(z, frame_length) - aux_h(nu, frame_length)) / (z - nu);
  }
  const double a = (1.0 - nu) * ratio / t2;
  if (mode == Mode::kConsistent) return service * (p + a);
  return service * (p + (1.0 - p) * a);
}

double mean_interdeparture(double mu, double nu, int frame_length, Mode mode) {
  check_frame(frame_length);
  check_nu(mu, nu);
  const double t = frame_length;
  if (mode == Mode::kConsistent) return t;
  const double h = aux_h(nu, frame_length);
  return t - h / t + (2.0 * mu + nu - 1.0) * h / (mu * (1.0 - nu) * t * t) +
         (1.0 - mu - nu) * (t * t * t * t + h) / (mu * (1.0 - nu) * t);
}

double consistent_pgf_derivative_at_one(double mu, double nu, int frame_length) {
  check_frame(frame_length);
  check_nu(mu, nu);
  const double p = prob_arrival_before_departure(nu, frame_length);
  return 1.0 / mu + frame_length - (1.0 - p) / (1.0 - nu);
}

double mean_xw(double mu, double nu, int frame_length) {
  check_frame(frame_length);
  check_nu(mu, nu);
  const double t2 = static_cast<double>(frame_length) * frame_length;
  return nu * aux_h_prime(nu, frame_length) / (t2 * (1.0 - nu));
}

QueueSolution average_baoi(double mu, int frame_length, Mode mode) {
  QueueSolution s;
  s.mode = mode;
  s.mu = mu;
  s.alpha = solve_alpha(mu, frame_length);
  s.nu = 1.0 - mu * (1.0 - s.alpha);
  s.mean_system_time = 1.0 / (1.0 - s.nu);
  s.mean_interdeparture = mean_interdeparture(mu, s.nu, frame_length, mode);
  s.e_xw = mean_xw(mu, s.nu, frame_length);
  const double t = frame_length;
  const double numerator = t / 2.0 + (7.0 * t * t - 1.0) / 12.0 + t / mu + s.e_xw;
  s.baoi_avg = numerator / s.mean_interdeparture;
  s.velocity = 1.0 / s.baoi_avg;
  return s;
}

QueueSolution average_baoi(const model::EquivalentModel& model, int frame_length, Mode mode) {
  return average_baoi(model.mu, frame_length, mode);
}

}  // namespace baoi::queue
