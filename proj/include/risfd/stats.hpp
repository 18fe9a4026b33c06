#ifndef RISFD_STATS_HPP
#define RISFD_STATS_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "risfd/errors.hpp"

namespace risfd::stats {

inline double mean(const std::vector<double>& x) {
  if (x.empty()) throw DomainError("mean of an empty sample");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

/// Unbiased sample standard deviation (n - 1 denominator).
inline double sample_sd(const std::vector<double>& x) {
  if (x.size() < 2) throw DomainError("sd needs at least two observations");
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(x.size() - 1));
}

/// One-sided 95% critical values of Student's t; beyond the table the
/// normal quantile is used.
inline double t_critical_one_sided_95(int df) {
  static const double table[] = {
      6.313752, 2.919986, 2.353363, 2.131847, 2.015048, 1.943180,
      1.894579, 1.859548, 1.833113, 1.812461, 1.795885, 1.782288,
      1.770933, 1.761310, 1.753050, 1.745884, 1.739607, 1.734064,
      1.729133, 1.724718, 1.720743, 1.717144, 1.713872, 1.710882,
      1.708141, 1.705618, 1.703288, 1.701131, 1.699127, 1.697261};
  if (df < 1) throw DomainError("degrees of freedom must be >= 1");
  if (df <= 30) return table[df - 1];
  return 1.644854;
}

/// Two-sided 95% critical values (0.975 quantile).
inline double t_critical_two_sided_95(int df) {
  static const double table[] = {
      12.706205, 4.302653, 3.182446, 2.776445, 2.570582, 2.446912,
      2.364624,  2.306004, 2.262157, 2.228139, 2.200985, 2.178813,
      2.160369,  2.144787, 2.131450, 2.119905, 2.109816, 2.100922,
      2.093024,  2.085963, 2.079614, 2.073873, 2.068658, 2.063899,
      2.059539,  2.055529, 2.051831, 2.048407, 2.045230, 2.042272};
  if (df < 1) throw DomainError("degrees of freedom must be >= 1");
  if (df <= 30) return table[df - 1];
  return 1.959964;
}

struct PairedTTest {
  double mean_diff = 0.0;
  double sd_diff = 0.0;
  double t_stat = 0.0;
  int df = 0;
  bool significant_95 = false;  ///< one-sided: mean(x - y) > 0
};

/// Tests H1: mean(x - y) > 0 via a paired one-sided t test at 95%.
/// A zero-variance difference counts as significant iff every paired
/// difference is positive.
inline PairedTTest paired_one_sided_t(const std::vector<double>& x,
                                      const std::vector<double>& y) {
  if (x.size() != y.size()) throw ShapeError("paired samples differ in length");
  if (x.size() < 2) throw DomainError("paired test needs at least two pairs");
  std::vector<double> d(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - y[i];
  PairedTTest r;
  r.mean_diff = mean(d);
  r.sd_diff = sample_sd(d);
  r.df = static_cast<int>(d.size()) - 1;
  if (r.sd_diff == 0.0) {
    r.t_stat = (r.mean_diff > 0.0) ? std::numeric_limits<double>::infinity()
                                   : -std::numeric_limits<double>::infinity();
    r.significant_95 = r.mean_diff > 0.0;
    return r;
  }
  r.t_stat = r.mean_diff / (r.sd_diff / std::sqrt(static_cast<double>(d.size())));
  r.significant_95 = r.t_stat > t_critical_one_sided_95(r.df);
  return r;
}

/// 95% confidence interval for a mean, m +/- t * s / sqrt(n).
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

inline Interval mean_ci_95(const std::vector<double>& x) {
  const double m = mean(x);
  const double s = sample_sd(x);
  const double half = t_critical_two_sided_95(static_cast<int>(x.size()) - 1) *
                      s / std::sqrt(static_cast<double>(x.size()));
  return {m - half, m + half};
}

inline bool intervals_overlap(const Interval& a, const Interval& b) {
  return a.lo <= b.hi && b.lo <= a.hi;
}

}  // namespace risfd::stats

#endif  // RISFD_STATS_HPP
