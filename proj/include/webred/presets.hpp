// Built-in reducible webs of Goursat type, F = f(x1, g(x2, x3, x4..xn), x4..xn),
// with P = {1}, A = {2, 3}.
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "webred/expr.hpp"
#include "webred/reducibility.hpp"
#include "webred/web.hpp"

namespace webred {

struct Preset {
  std::string name;
  std::string outer;  // f over slots
  std::string inner;  // g over x variables
  RolePartition partition;
  WebSpec web;
};

inline Preset make_goursat(std::string name, int n, std::string outer, std::string inner) {
  RolePartition part = RolePartition::contiguous(n, 1, 3);
  WebSpec web = compose(parse(outer), parse(inner), part);
  return Preset{std::move(name), std::move(outer), std::move(inner), std::move(part), std::move(web)};
}

/// n = 4: F = x1*((x2+x3)*x4) + x4.
inline Preset goursat4() { return make_goursat("goursat4", 4, "u1*u2+u3", "(x2+x3)*x4"); }

/// n = 5: f and g both of four arguments.
inline Preset goursat5() {
  return make_goursat("goursat5", 5, "u1*u2+sin(u3)*u4+u3", "x2*x3+x3*x4+x2*x5+x5");
}

inline std::vector<std::string> preset_names() { return {"goursat4", "goursat5"}; }

inline std::optional<Preset> find_preset(std::string_view name) {
  if (name == "goursat4") return goursat4();
  if (name == "goursat5") return goursat5();
  return std::nullopt;
}

}  // namespace webred
