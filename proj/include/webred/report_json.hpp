// JSON rendering of reports. Key order is fixed, so identical inputs give
// byte-identical documents.
#pragma once

#include <nlohmann/json.hpp>

#include "webred/frobenius.hpp"
#include "webred/reducibility.hpp"
#include "webred/web.hpp"

namespace webred {

using ordered_json = nlohmann::ordered_json;

inline ordered_json to_json(const RolePartition& part) {
  return ordered_json{{"n", part.n()}, {"P", part.p()}, {"A", part.a()}, {"S", part.s()}};
}

inline ordered_json to_json(const ReducibilityReport& r) {
  ordered_json j;
  j["criterion"] = to_string(r.criterion);
  j["verdict"] = to_string(r.verdict);
  j["max_residual"] = r.max_residual;
  j["scale"] = r.residual_scale;
  j["relative_residual"] = r.relative_residual;
  j["partition"] = to_json(r.partition);
  j["samples"] = r.samples;
  j["seed"] = r.seed;
  if (r.witness) {
    j["worst_witness"] = ordered_json{
        {"point", r.witness->point}, {"p", r.witness->p}, {"a", r.witness->a}, {"b", r.witness->b}};
  } else {
    j["worst_witness"] = nullptr;
  }
  j["message"] = r.message;
  return j;
}

inline ordered_json to_json(const FrobeniusReport& r) {
  ordered_json j;
  j["criterion"] = r.large ? "frobenius_large" : "frobenius";
  j["verdict"] = to_string(r.verdict);
  j["max_residual"] = r.max_defect;
  j["scale"] = r.defect_scale;
  j["relative_residual"] = r.relative_defect;
  j["partition"] = to_json(r.partition);
  j["samples"] = r.samples;
  j["seed"] = r.seed;
  if (r.witness) {
    j["worst_witness"] = ordered_json{{"point", r.witness->point},
                                      {"fields", {r.witness->first, r.witness->second}},
                                      {"form", r.witness->form}};
  } else {
    j["worst_witness"] = nullptr;
  }
  j["message"] = r.message;
  return j;
}

inline ordered_json to_json(const TorsionTable& t) {
  ordered_json rows = ordered_json::array();
  for (int a = 1; a <= t.dimension(); ++a) {
    ordered_json row = ordered_json::array();
    for (int b = 1; b <= t.dimension(); ++b) row.push_back(t(a, b));
    rows.push_back(std::move(row));
  }
  return ordered_json{{"point", t.point()}, {"torsion", std::move(rows)}};
}

}  // namespace webred
