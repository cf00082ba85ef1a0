#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace spikenet::stats {

class stats_error : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Neumaier-compensated sum, accumulated in index order.
inline double sum(std::span<const double> xs) noexcept {
  double s = 0.0;
  double c = 0.0;
  for (const double x : xs) {
    const double t = s + x;
    c += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
    s = t;
  }
  return s + c;
}

inline double mean(std::span<const double> xs) {
  if (xs.empty()) throw stats_error("mean of an empty sample");
  return sum(xs) / static_cast<double>(xs.size());
}

// Unbiased (n-1) variance, two-pass.
inline double variance(std::span<const double> xs) {
  if (xs.size() < 2) throw stats_error("variance needs at least two samples");
  const double m = mean(xs);
  std::vector<double> sq(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) sq[i] = (xs[i] - m) * (xs[i] - m);
  return sum(sq) / static_cast<double>(xs.size() - 1);
}

// Samples divided by their empirical mean.
inline std::vector<double> renormalize(std::span<const double> xs) {
  if (xs.empty()) throw stats_error("cannot renormalize an empty sample");
  const double m = mean(xs);
  if (!(m > 0.0) || !std::isfinite(m)) throw stats_error("renormalize needs a positive finite mean");
  std::vector<double> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = xs[i] / m;
  return out;
}

// Kolmogorov-Smirnov distance between the empirical CDF of `xs` and a
// continuous reference CDF: sup over the sorted sample of
// max(i/n - F(x_(i)), F(x_(i)) - (i-1)/n).
template <class Cdf>
double ks_distance(std::span<const double> xs, Cdf&& cdf) {
  if (xs.empty()) throw stats_error("KS distance of an empty sample");
  std::vector<double> sorted(xs.begin(), xs.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    const double above = static_cast<double>(i + 1) / n - f;
    const double below = f - static_cast<double>(i) / n;
    d = std::max(d, std::max(above, below));
  }
  return d;
}

inline double unit_exponential_cdf(double x) noexcept { return x <= 0.0 ? 0.0 : -std::expm1(-x); }

inline double ks_distance_exp1(std::span<const double> xs) {
  return ks_distance(xs, unit_exponential_cdf);
}

struct Histogram {
  std::vector<double> edges;
  std::vector<double> densities;

  friend bool operator==(const Histogram&, const Histogram&) = default;
};

// Equal-width bins over [0, max(xs)], normalized to unit area. The last bin
// is closed on the right.
inline Histogram histogram(std::span<const double> xs, std::size_t bin_count) {
  if (xs.empty()) throw stats_error("histogram of an empty sample");
  if (bin_count < 1) throw stats_error("histogram needs at least one bin");
  const double hi = *std::max_element(xs.begin(), xs.end());
  if (*std::min_element(xs.begin(), xs.end()) < 0.0)
    throw stats_error("histogram samples must be nonnegative");
  if (!(hi > 0.0) || !std::isfinite(hi))
    throw stats_error("histogram needs a positive finite maximum");
  const double width = hi / static_cast<double>(bin_count);
  Histogram h;
  h.edges.resize(bin_count + 1);
  for (std::size_t b = 0; b <= bin_count; ++b) h.edges[b] = width * static_cast<double>(b);
  h.edges.back() = hi;
  std::vector<std::size_t> counts(bin_count, 0);
  for (const double x : xs) {
    auto b = static_cast<std::size_t>(x / width);
    ++counts[std::min(b, bin_count - 1)];
  }
  h.densities.resize(bin_count);
  const double n = static_cast<double>(xs.size());
  for (std::size_t b = 0; b < bin_count; ++b)
    h.densities[b] = static_cast<double>(counts[b]) / (n * (h.edges[b + 1] - h.edges[b]));
  return h;
}

inline double histogram_area(const Histogram& h) {
  double a = 0.0;
  for (std::size_t b = 0; b < h.densities.size(); ++b)
    a += h.densities[b] * (h.edges[b + 1] - h.edges[b]);
  return a;
}

struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  std::optional<double> variance;
  std::optional<double> renormalized_variance;

  friend bool operator==(const Summary&, const Summary&) = default;
};

// Variances are absent for fewer than two samples. The renormalized variance
// is the variance of xs / mean(xs), computed on the rescaled samples.
inline Summary summarize(std::span<const double> xs) {
  Summary s;
  s.count = xs.size();
  s.mean = mean(xs);
  if (xs.size() >= 2) {
    s.variance = variance(xs);
    const auto r = renormalize(xs);
    s.renormalized_variance = variance(r);
  }
  return s;
}

struct LogFit {
  double C = 0.0;          // slope against log(n)
  double intercept = 0.0;
  double r_squared = 0.0;
  double C_no_intercept = 0.0;  // least-squares slope of y = C log(n)

  friend bool operator==(const LogFit&, const LogFit&) = default;
};

struct ScalingPoint {
  double n = 0.0;
  double mean = 0.0;
};

// Ordinary least squares of mean against log(n), with intercept.
inline LogFit fit_log_growth(std::span<const ScalingPoint> points) {
  if (points.size() < 3) throw stats_error("log fit needs at least three points");
  std::vector<double> x(points.size()), y(points.size());
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (!(points[k].n >= 1.0)) throw stats_error("neuron counts must be >= 1");
    x[k] = std::log(points[k].n);
    y[k] = points[k].mean;
  }
  const double mx = mean(x);
  const double my = mean(y);
  std::vector<double> sxx(x.size()), sxy(x.size()), syy(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx[k] = (x[k] - mx) * (x[k] - mx);
    sxy[k] = (x[k] - mx) * (y[k] - my);
    syy[k] = (y[k] - my) * (y[k] - my);
  }
  const double Sxx = sum(sxx);
  if (!(Sxx > 0.0)) throw stats_error("log fit needs at least two distinct neuron counts");
  LogFit fit;
  fit.C = sum(sxy) / Sxx;
  fit.intercept = my - fit.C * mx;
  std::vector<double> res(x.size()), xx(x.size()), xy(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double r = y[k] - (fit.intercept + fit.C * x[k]);
    res[k] = r * r;
    xx[k] = x[k] * x[k];
    xy[k] = x[k] * y[k];
  }
  const double Syy = sum(syy);
  const double ss_res = sum(res);
  fit.r_squared = Syy > 0.0 ? 1.0 - ss_res / Syy : (ss_res == 0.0 ? 1.0 : 0.0);
  const double Sxx0 = sum(xx);
  fit.C_no_intercept = Sxx0 > 0.0 ? sum(xy) / Sxx0 : 0.0;
  return fit;
}

}  // namespace spikenet::stats
