// Integrability of the distribution attached to a role partition.
//
// The distribution is cut out by dx_s = 0 (s in S) and
// theta = sum_{a in A} F_a dx_a = 0. It is spanned by
//
//   X_p      = d/dx_p                      p in P
//   Y_{a,a'} = F_a' d/dx_a - F_a d/dx_a'   consecutive a, a' in A
//
// and is integrable iff every Lie bracket of spanning fields is annihilated
// again. The large variant drops the dx_s forms and adds d/dx_s to the span.
// Note theta([X_p, Y_{a,a'}]) = F_a F_pa' - F_a' F_pa, the negated PDE residual.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "webred/expr.hpp"
#include "webred/reducibility.hpp"
#include "webred/web.hpp"

namespace webred {

/// Components along d/dx_1 .. d/dx_n.
using VectorField = std::vector<Expr>;
/// Coefficients of dx_1 .. dx_n.
using OneForm = std::vector<Expr>;

struct NamedField {
  std::string label;
  VectorField components;
};

struct NamedForm {
  std::string label;
  OneForm coefficients;
};

struct DistributionFrame {
  RolePartition partition;
  bool large = false;
  std::vector<NamedForm> annihilators{};
  std::vector<NamedField> fields{};
};

inline DistributionFrame build_frame(const WebSpec& web, const RolePartition& part, bool large = false) {
  if (part.n() != web.dimension()) throw std::invalid_argument("partition and web dimensions differ");
  const int n = web.dimension();
  const Expr zero = Expr::constant(0.0);
  const Expr one = Expr::constant(1.0);
  DistributionFrame frame{part, large};

  if (!large) {
    for (int s : part.s()) {
      OneForm form(n, zero);
      form[s - 1] = one;
      frame.annihilators.push_back({"dx" + std::to_string(s), std::move(form)});
    }
  }
  OneForm theta(n, zero);
  for (int a : part.a()) theta[a - 1] = web.first(a);
  frame.annihilators.push_back({"theta", std::move(theta)});

  auto coordinate_field = [&](int i) {
    VectorField v(n, zero);
    v[i - 1] = one;
    return NamedField{"d" + std::to_string(i), std::move(v)};
  };
  for (int p : part.p()) frame.fields.push_back(coordinate_field(p));
  const auto& a = part.a();
  for (std::size_t i = 0; i + 1 < a.size(); ++i) {
    VectorField y(n, zero);
    y[a[i] - 1] = web.first(a[i + 1]);
    y[a[i + 1] - 1] = neg(web.first(a[i]));
    frame.fields.push_back({"Y" + std::to_string(a[i]) + "," + std::to_string(a[i + 1]), std::move(y)});
  }
  if (large) {
    for (int s : part.s()) frame.fields.push_back(coordinate_field(s));
  }
  return frame;
}

/// [V, W]^i = V^j d_j W^i - W^j d_j V^i, built symbolically.
inline VectorField lie_bracket(const VectorField& v, const VectorField& w) {
  if (v.size() != w.size()) throw std::invalid_argument("vector fields of different dimension");
  const int n = static_cast<int>(v.size());
  VectorField out(n, Expr::constant(0.0));
  for (int i = 0; i < n; ++i) {
    Expr c = Expr::constant(0.0);
    for (int j = 0; j < n; ++j) {
      c = c + v[j] * diff(w[i], j + 1) - w[j] * diff(v[i], j + 1);
    }
    out[i] = c;
  }
  return out;
}

inline std::vector<double> evaluate(const std::vector<Expr>& components, std::span<const double> pt) {
  std::vector<double> out;
  out.reserve(components.size());
  for (const auto& c : components) out.push_back(eval(c, pt));
  return out;
}

/// theta(V) at a point, and sum |theta_i| |V^i| + 1 for scaling.
struct Pairing {
  double value;
  double scale;
};

inline Pairing pair(const OneForm& form, const VectorField& field, std::span<const double> pt) {
  const auto f = evaluate(form, pt);
  const auto v = evaluate(field, pt);
  double value = 0.0, scale = 1.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    value += f[i] * v[i];
    scale += std::abs(f[i]) * std::abs(v[i]);
  }
  return {value, scale};
}

enum class Integrability { integrable, not_integrable, inconclusive };

inline const char* to_string(Integrability v) {
  switch (v) {
    case Integrability::integrable: return "integrable";
    case Integrability::not_integrable: return "not_integrable";
    default: return "inconclusive";
  }
}

/// Same meaning as a reducibility verdict, for cross-criterion comparison.
inline Verdict as_verdict(Integrability v) {
  switch (v) {
    case Integrability::integrable: return Verdict::reducible;
    case Integrability::not_integrable: return Verdict::not_reducible;
    default: return Verdict::inconclusive;
  }
}

struct BracketWitness {
  Point point;
  std::string first;
  std::string second;
  std::string form;
};

struct FrobeniusReport {
  RolePartition partition;
  bool large = false;
  Integrability verdict = Integrability::inconclusive;
  double max_defect = 0.0;
  double defect_scale = 1.0;
  double relative_defect = 0.0;
  int samples = 0;
  std::uint64_t seed = 0;
  std::optional<BracketWitness> witness{};
  std::string message{};
};

inline FrobeniusReport check_integrability(const WebSpec& web, const RolePartition& part, const SamplePlan& plan,
                                           bool large = false) {
  const DistributionFrame frame = build_frame(web, part, large);
  FrobeniusReport report{part, large};
  report.seed = plan.seed;

  std::vector<Point> points;
  try {
    points = sample(web, plan);
  } catch (const SamplingError& e) {
    report.message = std::string("sampling failed: ") + e.what();
    return report;
  }

  struct Bracket {
    std::size_t i, j;
    VectorField field;
  };
  std::vector<Bracket> brackets;
  for (std::size_t i = 0; i < frame.fields.size(); ++i)
    for (std::size_t j = i + 1; j < frame.fields.size(); ++j)
      brackets.push_back({i, j, lie_bracket(frame.fields[i].components, frame.fields[j].components)});

  double worst = -1.0;
  for (const auto& pt : points) {
    for (const auto& b : brackets) {
      for (const auto& form : frame.annihilators) {
        const Pairing d = pair(form.coefficients, b.field, pt);
        double rel = std::abs(d.value) / d.scale;
        if (std::isnan(rel)) rel = std::numeric_limits<double>::infinity();
        if (rel > worst) {
          worst = rel;
          report.max_defect = std::abs(d.value);
          report.defect_scale = d.scale;
          report.witness = BracketWitness{pt, frame.fields[b.i].label, frame.fields[b.j].label, form.label};
        }
      }
    }
  }
  report.samples = static_cast<int>(points.size());
  report.relative_defect = std::max(worst, 0.0);
  switch (classify(report.relative_defect)) {
    case Verdict::reducible: report.verdict = Integrability::integrable; break;
    case Verdict::not_reducible: report.verdict = Integrability::not_integrable; break;
    default:
      report.verdict = Integrability::inconclusive;
      report.message = "relative defect in the gray zone between tolerances";
  }
  return report;
}

}  // namespace webred
