// Reduct (l+1,k)-reducibility of a codimension-one web.
//
// A role partition splits the variables into P (the x_1..x_l roles), A (the
// arguments of the inner function g) and S (the variables held fixed on the
// subweb's leaves). The subweb is reducible iff F = f(x_P, g(x_A, x_S), x_S),
// which is detected three ways:
//
//   torsion:  a_pa == a_pb                    for p in P, a,b in A
//   pde:      F_pa F_b - F_pb F_a == 0        (same triples)
//   full:     torsion, plus a_sa == a_sb for s in S (F = f(x_P, g(x_A), x_S))
//
// Verdicts are sampling based: "reducible" means the relative residual
// vanished to rounding level at every sampled regular point.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <limits>
#include <set>
#include <tuple>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "webred/expr.hpp"
#include "webred/web.hpp"

namespace webred {

/// Relative residual at or below this is rounding noise.
inline constexpr double reducible_tolerance = 1e-9;
/// Relative residual above this is structural. Between the two: inconclusive.
inline constexpr double inconclusive_tolerance = 1e-6;

class RolePartition {
 public:
  /// Explicit blocks. An empty S means "every index not in P or A".
  RolePartition(int n, std::vector<int> p, std::vector<int> a, std::optional<std::vector<int>> s = {})
      : n_(n), p_(std::move(p)), a_(std::move(a)) {
    if (n_ < 2) throw std::invalid_argument("partition dimension must be at least 2");
    std::sort(p_.begin(), p_.end());
    std::sort(a_.begin(), a_.end());
    if (s) {
      s_ = std::move(*s);
      std::sort(s_.begin(), s_.end());
    } else {
      for (int i = 1; i <= n_; ++i) {
        if (!std::binary_search(p_.begin(), p_.end(), i) && !std::binary_search(a_.begin(), a_.end(), i))
          s_.push_back(i);
      }
    }
    validate();
  }

  /// Contiguous blocks P = {1..l}, A = {l+1..k}, S = {k+1..n}.
  static RolePartition contiguous(int n, int l, int k) {
    if (!(1 <= l && l < k && k <= n)) throw std::invalid_argument("need 1 <= l < k <= n");
    std::vector<int> p, a, s;
    for (int i = 1; i <= l; ++i) p.push_back(i);
    for (int i = l + 1; i <= k; ++i) a.push_back(i);
    for (int i = k + 1; i <= n; ++i) s.push_back(i);
    return RolePartition(n, std::move(p), std::move(a), std::move(s));
  }

  int n() const { return n_; }
  const std::vector<int>& p() const { return p_; }
  const std::vector<int>& a() const { return a_; }
  const std::vector<int>& s() const { return s_; }
  int l() const { return static_cast<int>(p_.size()); }
  int k() const { return static_cast<int>(p_.size() + a_.size()); }

  friend bool operator==(const RolePartition&, const RolePartition&) = default;

  std::string to_string() const {
    auto list = [](const std::vector<int>& v) {
      std::string out;
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(v[i]);
      }
      return out;
    };
    return "P={" + list(p_) + "} A={" + list(a_) + "} S={" + list(s_) + "}";
  }

 private:
  void validate() const {
    if (p_.empty()) throw std::invalid_argument("block P must be non-empty");
    if (a_.size() < 2) throw std::invalid_argument("block A must have at least 2 indices");
    std::set<int> seen;
    for (const auto* block : {&p_, &a_, &s_}) {
      for (int i : *block) {
        if (i < 1 || i > n_) throw std::invalid_argument("partition index " + std::to_string(i) + " out of range");
        if (!seen.insert(i).second) throw std::invalid_argument("partition index " + std::to_string(i) + " repeated");
      }
    }
    if (static_cast<int>(seen.size()) != n_) throw std::invalid_argument("partition does not cover 1..n");
  }

  int n_;
  std::vector<int> p_, a_, s_;
};

enum class Verdict { reducible, not_reducible, inconclusive };
enum class Criterion { torsion, pde, full };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::reducible: return "reducible";
    case Verdict::not_reducible: return "not_reducible";
    default: return "inconclusive";
  }
}

inline const char* to_string(Criterion c) {
  switch (c) {
    case Criterion::torsion: return "torsion_eq14";
    case Criterion::pde: return "pde_eq20";
    default: return "full_eq18";
  }
}

inline Verdict classify(double relative_residual) {
  if (relative_residual <= reducible_tolerance) return Verdict::reducible;
  if (relative_residual <= inconclusive_tolerance) return Verdict::inconclusive;
  return Verdict::not_reducible;
}

/// Worst (p, a, b) triple and where it occurred. For the full criterion p
/// may be an S index.
struct Witness {
  Point point;
  int p = 0;
  int a = 0;
  int b = 0;
};

struct ReducibilityReport {
  RolePartition partition;
  Criterion criterion = Criterion::pde;
  Verdict verdict = Verdict::inconclusive;
  double max_residual = 0.0;    // residual at the worst sample
  double residual_scale = 1.0;  // its normaliser
  double relative_residual = 0.0;
  int samples = 0;
  std::uint64_t seed = 0;
  std::optional<Witness> witness{};
  std::string message{};
};

/// F_pa F_b - F_pb F_a together with |F_pa F_b| + |F_pb F_a| + 1.
struct PdeResidual {
  double value;
  double scale;
};

inline PdeResidual residual_pde(const WebSpec& web, int p, int a, int b, std::span<const double> pt) {
  require_regular(web, pt);
  const double fpa = eval(web.second(p, a), pt);
  const double fpb = eval(web.second(p, b), pt);
  const double fa = eval(web.first(a), pt);
  const double fb = eval(web.first(b), pt);
  return {fpa * fb - fpb * fa, std::abs(fpa * fb) + std::abs(fpb * fa) + 1.0};
}

namespace detail {

struct Worst {
  double relative = -1.0;
  double residual = 0.0;
  double scale = 1.0;
  Witness witness;

  void offer(double residual_value, double scale_value, const Point& pt, int p, int a, int b) {
    const double rel = std::abs(residual_value) / scale_value;
    if (rel > relative || std::isnan(rel)) {
      relative = std::isnan(rel) ? std::numeric_limits<double>::infinity() : rel;
      residual = std::abs(residual_value);
      scale = scale_value;
      witness = Witness{pt, p, a, b};
    }
  }
};

inline ReducibilityReport finish(const RolePartition& part, Criterion criterion, const SamplePlan& plan,
                                 int samples, const Worst& worst) {
  ReducibilityReport r{part, criterion};
  r.samples = samples;
  r.seed = plan.seed;
  r.max_residual = worst.residual;
  r.residual_scale = worst.scale;
  r.relative_residual = std::max(worst.relative, 0.0);
  r.verdict = classify(r.relative_residual);
  r.witness = worst.witness;
  if (r.verdict == Verdict::inconclusive)
    r.message = "relative residual in the gray zone between tolerances";
  else if (r.verdict == Verdict::reducible)
    r.message = "residual vanished at every sampled regular point";
  return r;
}

inline ReducibilityReport sampling_failed(const RolePartition& part, Criterion criterion,
                                          const SamplePlan& plan, const std::string& why) {
  ReducibilityReport r{part, criterion};
  r.verdict = Verdict::inconclusive;
  r.seed = plan.seed;
  r.message = "sampling failed: " + why;
  return r;
}

inline void require_matching(const WebSpec& web, const RolePartition& part) {
  if (part.n() != web.dimension()) throw std::invalid_argument("partition and web dimensions differ");
}

// Max over pairs a<b of |t(s,a) - t(s,b)| for each s in rows.
inline void torsion_gaps(const TorsionTable& t, const std::vector<int>& rows, const std::vector<int>& cols,
                         double scale, Worst& worst) {
  for (int s : rows) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      for (std::size_t j = i + 1; j < cols.size(); ++j) {
        worst.offer(t(s, cols[i]) - t(s, cols[j]), scale, t.point(), s, cols[i], cols[j]);
      }
    }
  }
}

inline ReducibilityReport torsion_check(const WebSpec& web, const RolePartition& part, const SamplePlan& plan,
                                        Criterion criterion) {
  require_matching(web, part);
  std::vector<Point> points;
  try {
    points = sample(web, plan);
  } catch (const SamplingError& e) {
    return sampling_failed(part, criterion, plan, e.what());
  }
  Worst worst;
  for (const auto& pt : points) {
    const TorsionTable t = torsion(web, pt);
    const double scale = t.max_abs() + 1.0;
    torsion_gaps(t, part.p(), part.a(), scale, worst);
    if (criterion == Criterion::full) torsion_gaps(t, part.s(), part.a(), scale, worst);
  }
  return finish(part, criterion, plan, static_cast<int>(points.size()), worst);
}

}  // namespace detail

/// Torsion criterion on the subweb: a_pa == a_pb.
inline ReducibilityReport check_subweb(const WebSpec& web, const RolePartition& part, const SamplePlan& plan) {
  return detail::torsion_check(web, part, plan, Criterion::torsion);
}

/// Torsion criterion on the whole web: a_pa == a_pb and a_sa == a_sb.
inline ReducibilityReport check_full(const WebSpec& web, const RolePartition& part, const SamplePlan& plan) {
  return detail::torsion_check(web, part, plan, Criterion::full);
}

/// Second-order PDE residual F_pa F_b - F_pb F_a over every triple.
inline ReducibilityReport check_pde(const WebSpec& web, const RolePartition& part, const SamplePlan& plan) {
  detail::require_matching(web, part);
  std::vector<Point> points;
  try {
    points = sample(web, plan);
  } catch (const SamplingError& e) {
    return detail::sampling_failed(part, Criterion::pde, plan, e.what());
  }
  const auto& a = part.a();
  detail::Worst worst;
  for (const auto& pt : points) {
    for (int p : part.p()) {
      for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = i + 1; j < a.size(); ++j) {
          const auto r = residual_pde(web, p, a[i], a[j], pt);
          worst.offer(r.value, r.scale, pt, p, a[i], a[j]);
        }
      }
    }
  }
  return detail::finish(part, Criterion::pde, plan, static_cast<int>(points.size()), worst);
}

inline ReducibilityReport check(Criterion criterion, const WebSpec& web, const RolePartition& part,
                                const SamplePlan& plan) {
  switch (criterion) {
    case Criterion::torsion: return check_subweb(web, part, plan);
    case Criterion::pde: return check_pde(web, part, plan);
    default: return check_full(web, part, plan);
  }
}

/// F = f(x_P, g(x_A, x_S), x_S).
///
/// f is written over slots: u1..ul take x_P in order, u(l+1) takes g, and
/// u(l+2).. take x_S in order. g is written over the x variables of A and S.
inline WebSpec compose(const Expr& f, const Expr& g, const RolePartition& part,
                       std::vector<Interval> box = {}, double margin = WebSpec::default_margin) {
  if (!variables(f).empty())
    throw std::invalid_argument("outer function f must use slots u1..u" +
                                std::to_string(part.l() + 1 + part.s().size()) + " only");
  const std::size_t arity = part.l() + 1 + part.s().size();
  const auto used = slots(f);
  if (!used.empty() && static_cast<std::size_t>(*used.rbegin()) > arity)
    throw std::invalid_argument("outer function f uses u" + std::to_string(*used.rbegin()) +
                                " but takes only " + std::to_string(arity) + " arguments");

  if (!slots(g).empty()) throw std::invalid_argument("inner function g must not use slots");
  for (int v : variables(g)) {
    const bool in_a = std::binary_search(part.a().begin(), part.a().end(), v);
    const bool in_s = std::binary_search(part.s().begin(), part.s().end(), v);
    if (!in_a && !in_s)
      throw std::invalid_argument("inner function g uses x" + std::to_string(v) + " outside blocks A and S");
  }

  std::vector<Expr> args;
  args.reserve(arity);
  for (int p : part.p()) args.push_back(Expr::variable(p));
  args.push_back(g);
  for (int s : part.s()) args.push_back(Expr::variable(s));
  return WebSpec(part.n(), substitute_slots(f, args), std::move(box), margin);
}

/// Every partition with 1 <= |P| <= max_p and |A| >= 2, blocks unordered.
inline std::vector<RolePartition> enumerate_partitions(int n, int max_p) {
  if (n > 8) throw std::invalid_argument("partition scan is limited to n <= 8");
  std::vector<RolePartition> out;
  // role of each index: 0 = P, 1 = A, 2 = S, enumerated in base 3
  int total = 1;
  for (int i = 0; i < n; ++i) total *= 3;
  std::vector<int> p, a, s;
  for (int code = 0; code < total; ++code) {
    p.clear();
    a.clear();
    s.clear();
    int c = code;
    for (int i = 1; i <= n; ++i, c /= 3) {
      (c % 3 == 0 ? p : c % 3 == 1 ? a : s).push_back(i);
    }
    if (p.empty() || static_cast<int>(p.size()) > max_p || a.size() < 2) continue;
    out.emplace_back(n, p, a, s);
  }
  std::sort(out.begin(), out.end(), [](const RolePartition& x, const RolePartition& y) {
    return std::tie(x.p(), x.a(), x.s()) < std::tie(y.p(), y.a(), y.s());
  });
  return out;
}

struct ScanEntry {
  RolePartition partition;
  ReducibilityReport report;
};

/// Runs one criterion over every admissible partition; results ordered by
/// relative residual, ties by partition.
inline std::vector<ScanEntry> scan(const WebSpec& web, const SamplePlan& plan, int max_p,
                                   Criterion criterion = Criterion::pde) {
  std::vector<ScanEntry> out;
  for (auto& part : enumerate_partitions(web.dimension(), max_p)) {
    auto report = check(criterion, web, part, plan);
    out.push_back({std::move(part), std::move(report)});
  }
  std::stable_sort(out.begin(), out.end(), [](const ScanEntry& x, const ScanEntry& y) {
    const bool xi = x.report.samples == 0;
    const bool yi = y.report.samples == 0;
    if (xi != yi) return yi;  // failed sampling last
    return x.report.relative_residual < y.report.relative_residual;
  });
  return out;
}

}  // namespace webred
