// Codimension-one (n+1)-webs in closed form x_{n+1} = F(x_1, ..., x_n).
//
// The n coordinate foliations are x_alpha = const and the last one is the
// level sets of F. With the co-frame omega_alpha = F_alpha dx_alpha the
// structure equations give
//
//   c_ab = -F_ab / (F_a F_b)          (a != b)
//   a_ab = c_ab - mean_{g != d} c_gd
//
// for the torsion, the connection form absorbing the common part of c.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "webred/expr.hpp"

namespace webred {

struct Interval {
  double lo = -1.0;
  double hi = 1.0;
};

/// Point outside the regular set: some first partial of F is below margin.
class RegularityError : public std::runtime_error {
 public:
  RegularityError(const std::string& what, int variable)
      : std::runtime_error(what), variable_(variable) {}
  int variable() const { return variable_; }

 private:
  int variable_;
};

/// Rejection sampling gave up after too many consecutive misses.
class SamplingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A web x_{n+1} = F(x_1..x_n) with a sampling box and regularity margin.
///
/// First and second partials of F are derived once at construction and kept
/// alongside F; all variable indices in the public API are 1-based.
class WebSpec {
 public:
  static constexpr double default_margin = 1e-3;

  WebSpec(int n, Expr function, std::vector<Interval> box = {}, double margin = default_margin)
      : n_(n), function_(std::move(function)), box_(std::move(box)), margin_(margin) {
    if (n_ < 2) throw std::invalid_argument("web dimension must be at least 2");
    const auto vars = variables(function_);
    if (!vars.empty() && *vars.rbegin() > n_) {
      throw std::invalid_argument("web function references x" + std::to_string(*vars.rbegin()) +
                                  " but n = " + std::to_string(n_));
    }
    if (!slots(function_).empty()) {
      throw std::invalid_argument("web function contains unsubstituted slots");
    }
    if (box_.empty()) box_.assign(n_, Interval{});
    if (box_.size() != static_cast<std::size_t>(n_)) {
      throw std::invalid_argument("sampling box must have one interval per coordinate");
    }
    for (const auto& iv : box_) {
      if (!(iv.lo <= iv.hi) || !std::isfinite(iv.lo) || !std::isfinite(iv.hi))
        throw std::invalid_argument("sampling box interval must satisfy lo <= hi");
    }
    if (!(margin_ > 0)) throw std::invalid_argument("regularity margin must be positive");

    first_.reserve(n_);
    for (int a = 1; a <= n_; ++a) first_.push_back(diff(function_, a));
    second_.resize(static_cast<std::size_t>(n_) * n_);
    for (int a = 1; a <= n_; ++a) {
      for (int b = a; b <= n_; ++b) {
        Expr d = diff(first_[a - 1], b);
        second_[(a - 1) * n_ + (b - 1)] = d;
        second_[(b - 1) * n_ + (a - 1)] = d;
      }
    }
  }

  int dimension() const { return n_; }
  const Expr& function() const { return function_; }
  const std::vector<Interval>& box() const { return box_; }
  double margin() const { return margin_; }

  /// dF/dx_alpha.
  const Expr& first(int alpha) const { return first_.at(alpha - 1); }
  /// d2F/dx_alpha dx_beta.
  const Expr& second(int alpha, int beta) const {
    check_index(alpha);
    check_index(beta);
    return second_[(alpha - 1) * n_ + (beta - 1)];
  }

  void check_point(std::span<const double> pt) const {
    if (pt.size() != static_cast<std::size_t>(n_)) {
      throw std::invalid_argument("point has " + std::to_string(pt.size()) +
                                  " coordinates, web dimension is " + std::to_string(n_));
    }
  }

 private:
  void check_index(int alpha) const {
    if (alpha < 1 || alpha > n_) throw std::out_of_range("variable index out of range");
  }

  int n_;
  Expr function_;
  std::vector<Interval> box_;
  double margin_;
  std::vector<Expr> first_;
  std::vector<Expr> second_;
};

struct SamplePlan {
  int count = 50;
  std::uint64_t seed = 42;
  int max_rejections = 10000;
};

/// Gradient of F at pt.
inline std::vector<double> gradient(const WebSpec& web, std::span<const double> pt) {
  web.check_point(pt);
  std::vector<double> g(web.dimension());
  for (int a = 1; a <= web.dimension(); ++a) g[a - 1] = eval(web.first(a), pt);
  return g;
}

/// First variable whose partial is below the margin, or 0 when pt is regular.
inline int first_singular_variable(const WebSpec& web, std::span<const double> pt) {
  web.check_point(pt);
  for (int a = 1; a <= web.dimension(); ++a) {
    if (!(std::abs(eval(web.first(a), pt)) >= web.margin())) return a;
  }
  return 0;
}

inline bool is_regular(const WebSpec& web, std::span<const double> pt) {
  return first_singular_variable(web, pt) == 0;
}

inline void require_regular(const WebSpec& web, std::span<const double> pt) {
  if (int a = first_singular_variable(web, pt); a != 0) {
    throw RegularityError("point is not regular: |dF/dx" + std::to_string(a) + "| < margin", a);
  }
}

namespace detail {

// splitmix64; fixed so that point sequences do not depend on the standard
// library's distribution implementations.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

}  // namespace detail

/// plan.count regular points drawn uniformly from the web's box.
/// Points where F or a partial cannot be evaluated count as rejections.
inline std::vector<Point> sample(const WebSpec& web, const SamplePlan& plan) {
  if (plan.count < 1) throw std::invalid_argument("sample count must be positive");
  if (plan.max_rejections < 1) throw std::invalid_argument("max_rejections must be positive");
  for (const auto& iv : web.box()) {
    if (!(iv.lo < iv.hi)) throw std::invalid_argument("sampling box is degenerate");
  }

  detail::SplitMix64 rng(plan.seed);
  std::vector<Point> points;
  points.reserve(plan.count);
  Point pt(web.dimension());
  int misses = 0;
  while (static_cast<int>(points.size()) < plan.count) {
    for (int i = 0; i < web.dimension(); ++i) {
      const auto& iv = web.box()[i];
      pt[i] = iv.lo + (iv.hi - iv.lo) * rng.uniform();
    }
    bool ok = false;
    try {
      ok = is_regular(web, pt);
      if (ok) (void)eval(web.function(), pt);
    } catch (const EvalError&) {
      ok = false;
    }
    if (ok) {
      points.push_back(pt);
      misses = 0;
    } else if (++misses >= plan.max_rejections) {
      throw SamplingError("no regular point found after " + std::to_string(misses) +
                          " consecutive draws; check the box and margin");
    }
  }
  return points;
}

/// Torsion components a_ab at one point, stored with a zero diagonal.
class TorsionTable {
 public:
  TorsionTable(Point point, std::vector<double> values)
      : point_(std::move(point)), values_(std::move(values)) {
    n_ = static_cast<int>(point_.size());
    if (values_.size() != static_cast<std::size_t>(n_) * n_)
      throw std::invalid_argument("torsion table must be n x n");
  }

  int dimension() const { return n_; }
  const Point& point() const { return point_; }
  /// a_{alpha beta}, 1-based.
  double operator()(int alpha, int beta) const {
    if (alpha < 1 || alpha > n_ || beta < 1 || beta > n_)
      throw std::out_of_range("torsion index out of range");
    return values_[(alpha - 1) * n_ + (beta - 1)];
  }
  const std::vector<double>& values() const { return values_; }

  double max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }
  /// Sum over all ordered pairs; vanishes for a torsion tensor.
  double total() const {
    double s = 0.0;
    for (double v : values_) s += v;
    return s;
  }

 private:
  Point point_;
  std::vector<double> values_;
  int n_ = 0;
};

/// c_ab = -F_ab / (F_a F_b) for a != b, zero on the diagonal.
inline std::vector<double> log_hessian_ratios(const WebSpec& web, std::span<const double> pt) {
  require_regular(web, pt);
  const int n = web.dimension();
  const auto g = gradient(web, pt);
  std::vector<double> c(static_cast<std::size_t>(n) * n, 0.0);
  for (int a = 1; a <= n; ++a) {
    for (int b = a + 1; b <= n; ++b) {
      const double v = -eval(web.second(a, b), pt) / (g[a - 1] * g[b - 1]);
      c[(a - 1) * n + (b - 1)] = v;
      c[(b - 1) * n + (a - 1)] = v;
    }
  }
  return c;
}

inline TorsionTable torsion(const WebSpec& web, std::span<const double> pt) {
  const int n = web.dimension();
  auto c = log_hessian_ratios(web, pt);

  // upper triangle only, so that both halves subtract the identical mean
  double sum = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) sum += c[a * n + b];
  const double mean = sum / (n * (n - 1) / 2);

  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      const double v = c[a * n + b] - mean;
      c[a * n + b] = v;
      c[b * n + a] = v;
    }
  }
  return TorsionTable(Point(pt.begin(), pt.end()), std::move(c));
}

}  // namespace webred
