#pragma once

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "bcast/core.hpp"

namespace bcast {

template <class T>
struct FixedPointReport {
  std::vector<T> points;  // sorted ascending
  std::vector<T> derivative_at_each;
  std::vector<bool> stable_flags;

  std::size_t size() const { return points.size(); }
};

namespace detail {

inline void require_delta(double delta) {
  if (!(delta >= 0.0 && delta <= 0.5)) {
    std::ostringstream msg;
    msg << "noise level must lie in [0, 1/2], got " << delta;
    throw input_error(msg.str());
  }
}

template <class T>
void require_delta(const T& delta) {
  require_delta(static_cast<double>(delta));
}

// delta at or above the threshold, allowing a few ulps of rounding in the threshold itself
template <class T>
bool at_or_above(const T& delta, const T& threshold) {
  return delta >= threshold - 8 * std::numeric_limits<T>::epsilon();
}

inline void require_arity(int d) {
  if (d < 1) throw input_error("arity must be at least 1");
}

template <class T>
T binomial(int n, int k) {
  if (k < 0 || k > n) return T(0);
  if (k > n - k) k = n - k;
  T c = 1;
  for (int i = 1; i <= k; ++i) c = c * T(n - k + i) / T(i);
  return c;
}

template <class T>
T log_binomial(int n, int k) {
  using std::log;
  if (k > n - k) k = n - k;
  T c = 0;
  for (int i = 1; i <= k; ++i) c += log(T(n - k + i)) - log(T(i));
  return c;
}

// pmf[k] = P(Binomial(d, p) = k)
template <class T>
std::vector<T> binomial_pmf(int d, const T& p) {
  using std::exp;
  using std::log;
  using std::pow;
  std::vector<T> pmf(static_cast<std::size_t>(d) + 1, T(0));
  if (p <= 0) {
    pmf[0] = 1;
    return pmf;
  }
  if (p >= 1) {
    pmf[static_cast<std::size_t>(d)] = 1;
    return pmf;
  }
  const T q = 1 - p;
  if (d <= 64) {
    for (int k = 0; k <= d; ++k)
      pmf[static_cast<std::size_t>(k)] = binomial<T>(d, k) * pow(p, k) * pow(q, d - k);
  } else {
    const T lp = log(p), lq = log(q);
    for (int k = 0; k <= d; ++k)
      pmf[static_cast<std::size_t>(k)] = exp(log_binomial<T>(d, k) + T(k) * lp + T(d - k) * lq);
  }
  return pmf;
}

// P(Bin(d,p) > d/2) + 1/2 P(Bin(d,p) = d/2)
template <class T>
T majority_tail(int d, const T& p) {
  auto pmf = binomial_pmf<T>(d, p);
  T s = 0;
  for (int k = 0; k <= d; ++k) {
    if (2 * k > d)
      s += pmf[static_cast<std::size_t>(k)];
    else if (2 * k == d)
      s += pmf[static_cast<std::size_t>(k)] / 2;
  }
  return s;
}

// d/dp of majority_tail
template <class T>
T majority_tail_prime(int d, const T& p) {
  using std::exp;
  using std::log;
  using std::pow;
  const T pq = p * (1 - p);
  int e;
  T coef;
  if (d % 2 == 0) {
    e = d / 2 - 1;
    coef = T(d) / 4 * binomial<T>(d, d / 2);
    if (d > 64) coef = T(d) / 4 * exp(log_binomial<T>(d, d / 2));
  } else {
    e = (d - 1) / 2;
    coef = T((d + 1) / 2) * binomial<T>(d, (d + 1) / 2);
    if (d > 64) coef = T((d + 1) / 2) * exp(log_binomial<T>(d, (d + 1) / 2));
  }
  if (e == 0) return coef;
  if (pq <= 0) return T(0);
  if (d > 64) return exp(log(coef) + T(e) * log(pq));
  return coef * pow(pq, e);
}

}  // namespace detail

// ---- majority ----

template <class T>
T majority_g(const T& sigma, const T& delta, int d) {
  detail::require_arity(d);
  detail::require_delta(delta);
  return detail::majority_tail<T>(d, bsc_convolve<T>(sigma, delta));
}

inline double majority_g(double sigma, double delta, int d) {
  return majority_g<double>(sigma, delta, d);
}

template <class T>
T majority_g_prime(const T& sigma, const T& delta, int d) {
  detail::require_arity(d);
  detail::require_delta(delta);
  return (1 - 2 * delta) * detail::majority_tail_prime<T>(d, bsc_convolve<T>(sigma, delta));
}

inline double majority_g_prime(double sigma, double delta, int d) {
  return majority_g_prime<double>(sigma, delta, d);
}

template <class T>
T lipschitz_maj(const T& delta, int d) {
  using std::pow;
  detail::require_arity(d);
  detail::require_delta(delta);
  const int h = (d + 1) / 2;
  return (1 - 2 * delta) * pow(T(0.5), d - 1) * T(h) * detail::binomial<T>(d, h);
}

inline double lipschitz_maj(double delta, int d) { return lipschitz_maj<double>(delta, d); }

template <class T = double>
T delta_maj(int d) {
  using std::pow;
  if (d < 3) throw domain_error("majority threshold needs d >= 3");
  const int h = (d + 1) / 2;
  return T(0.5) - pow(T(2), d - 2) / (T(h) * detail::binomial<T>(d, h));
}

template <class T>
T majority_g_iterate(const T& sigma0, const T& delta, int d, int k) {
  if (k < 0) throw input_error("iteration count must be non-negative");
  T s = sigma0;
  for (int i = 0; i < k; ++i) s = majority_g<T>(s, delta, d);
  return s;
}

template <class T>
FixedPointReport<T> fixed_points_maj(const T& delta, int d) {
  using std::abs;
  if (d < 3) throw domain_error("majority fixed points need d >= 3");
  detail::require_delta(delta);
  FixedPointReport<T> report;
  const T half(0.5);
  auto add = [&](const T& x) {
    T gp = majority_g_prime<T>(x, delta, d);
    report.points.push_back(x);
    report.derivative_at_each.push_back(gp);
    report.stable_flags.push_back(abs(gp) < 1);
  };
  if (detail::at_or_above<T>(delta, delta_maj<T>(d))) {
    add(half);
    return report;
  }
  // g(x) - x is concave on [1/2, 1], zero at 1/2 with positive slope, negative at 1
  T lo = half, hi = T(1);
  if (majority_g<T>(hi, delta, d) - hi >= 0) {
    lo = hi;
  } else {
    while (hi - lo > T(1e-13)) {
      T mid = (lo + hi) / 2;
      if (majority_g<T>(mid, delta, d) - mid > 0)
        lo = mid;
      else
        hi = mid;
    }
  }
  const T top = (lo + hi) / 2;
  add(1 - top);
  add(half);
  add(top);
  return report;
}

inline FixedPointReport<double> fixed_points_maj(double delta, int d) {
  return fixed_points_maj<double>(delta, d);
}

// gamma(eps) = g(s - eps) - (s - eps) below the top fixed point s
template <class T>
T gamma_maj(const T& delta, int d, const T& eps) {
  auto fp = fixed_points_maj<T>(delta, d);
  if (fp.size() != 3) throw domain_error("gamma needs delta below the majority threshold");
  const T top = fp.points.back();
  if (!(eps > 0) || !(eps < top - T(0.5)))
    throw domain_error("epsilon must lie in (0, top fixed point - 1/2)");
  const T x = top - eps;
  T gamma = majority_g<T>(x, delta, d) - x;
  if (!(gamma > 0)) throw domain_error("gamma(eps) is not positive");
  return gamma;
}

template <class T>
T constant_maj(const T& delta, int d, const T& eps) {
  T gamma = gamma_maj<T>(delta, d, eps);
  return 1 / (gamma * gamma);
}

// ---- AND-OR ----

template <class T>
T andor_g0(const T& sigma, const T& delta) {
  detail::require_delta(delta);
  T p = bsc_convolve<T>(sigma, delta);
  return p * p;
}

template <class T>
T andor_g1(const T& sigma, const T& delta) {
  detail::require_delta(delta);
  T q = 1 - bsc_convolve<T>(sigma, delta);
  return 1 - q * q;
}

template <class T>
T andor_g(const T& sigma, const T& delta) {
  return andor_g0<T>(andor_g1<T>(sigma, delta), delta);
}

inline double andor_g0(double s, double delta) { return andor_g0<double>(s, delta); }
inline double andor_g1(double s, double delta) { return andor_g1<double>(s, delta); }
inline double andor_g(double s, double delta) { return andor_g<double>(s, delta); }

template <class T>
T andor_g_prime(const T& sigma, const T& delta) {
  detail::require_delta(delta);
  const T a = 1 - 2 * delta;
  return 4 * a * a * bsc_convolve<T>(andor_g1<T>(sigma, delta), delta) *
         (1 - bsc_convolve<T>(sigma, delta));
}

inline double andor_g_prime(double s, double delta) { return andor_g_prime<double>(s, delta); }

template <class T = double>
T andor_lipschitz_breakpoint() {
  using std::sqrt;
  return (9 - sqrt(T(33))) / 12;
}

template <class T>
T lipschitz_andor(const T& delta) {
  using std::pow;
  detail::require_delta(delta);
  const T a = 1 - 2 * delta;
  if (delta <= andor_lipschitz_breakpoint<T>())
    return pow(4 * (1 - delta) * a / 3, T(1.5));
  return 4 * delta * (1 - delta) * (1 - delta) * a * a * (3 - 2 * delta);
}

inline double lipschitz_andor(double delta) { return lipschitz_andor<double>(delta); }

template <class T = double>
T delta_andor() {
  using std::sqrt;
  return (3 - sqrt(T(7))) / 4;
}

template <class T>
FixedPointReport<T> fixed_points_andor(const T& delta) {
  using std::abs;
  using std::sqrt;
  detail::require_delta(delta);
  if (delta >= T(0.5)) throw domain_error("AND-OR fixed points need delta < 1/2");
  FixedPointReport<T> report;
  const T a = 1 - 2 * delta;
  const T two_a = 2 * (1 - delta) * a;
  const T denom = 2 * a * a;
  auto add = [&](const T& x) {
    T gp = andor_g_prime<T>(x, delta);
    report.points.push_back(x);
    report.derivative_at_each.push_back(gp);
    report.stable_flags.push_back(abs(gp) < 1);
  };
  const T t = (two_a + 1 - sqrt(2 * two_a + 1)) / denom;
  if (detail::at_or_above<T>(delta, delta_andor<T>())) {
    add(t);
    return report;
  }
  T disc = 2 * two_a - 3;
  if (disc < 0) disc = 0;
  const T t0 = (two_a - 1 - sqrt(disc)) / denom;
  const T t1 = (two_a - 1 + sqrt(disc)) / denom;
  if (!(t0 <= t && t <= t1)) throw domain_error("AND-OR fixed points out of order");
  add(t0);
  add(t);
  add(t1);
  return report;
}

inline FixedPointReport<double> fixed_points_andor(double delta) {
  return fixed_points_andor<double>(delta);
}

template <class T>
T gamma_andor(const T& delta, const T& eps) {
  auto fp = fixed_points_andor<T>(delta);
  if (fp.size() != 3) throw domain_error("gamma needs delta below the AND-OR threshold");
  const T t = fp.points[1], t1 = fp.points[2];
  if (!(eps > 0) || !(eps < t1 - t))
    throw domain_error("epsilon must lie in (0, t1 - t)");
  const T x = t1 - eps;
  T gamma = andor_g<T>(x, delta) - x;
  if (!(gamma > 0)) throw domain_error("gamma(eps) is not positive");
  return gamma;
}

template <class T>
T constant_andor(const T& delta, const T& eps) {
  T gamma = gamma_andor<T>(delta, eps);
  return 16 / (gamma * gamma);
}

// ---- von Neumann recursion ----

template <class T>
T von_neumann_h(const T& sigma, int d) {
  detail::require_arity(d);
  return detail::majority_tail<T>(d, sigma);
}

template <class T>
T von_neumann_f(const T& sigma, const T& delta, int d) {
  if (d < 3 || d % 2 == 0) throw domain_error("von Neumann recursion needs odd d >= 3");
  detail::require_delta(delta);
  return bsc_convolve<T>(von_neumann_h<T>(sigma, d), delta);
}

inline double von_neumann_f(double s, double delta, int d) {
  return von_neumann_f<double>(s, delta, d);
}

// f^(k)(0)
template <class T>
T von_neumann_iterate(const T& delta, int d, int k) {
  if (d < 3 || d % 2 == 0) throw domain_error("von Neumann recursion needs odd d >= 3");
  if (k < 0) throw input_error("iteration count must be non-negative");
  T s = 0;
  for (int i = 0; i < k; ++i) s = von_neumann_f<T>(s, delta, d);
  return s;
}

inline double von_neumann_iterate(double delta, int d, int k) {
  return von_neumann_iterate<double>(delta, d, k);
}

}  // namespace bcast
