// Builds a Goursat-type web from f and g, then runs the three subweb
// criteria and prints their verdicts side by side.
#include <iostream>

#include "webred/frobenius.hpp"
#include "webred/presets.hpp"
#include "webred/reducibility.hpp"

int main() {
  using namespace webred;

  const Preset g = goursat5();
  std::cout << "F = " << g.web.function() << "\n"
            << "    f = " << g.outer << ", g = " << g.inner << "\n\n";

  const SamplePlan plan{.count = 50, .seed = 42};
  for (const auto& part : {g.partition, RolePartition(5, {1}, {2, 4})}) {
    const auto torsion = check_subweb(g.web, part, plan);
    const auto pde = check_pde(g.web, part, plan);
    const auto frob = check_integrability(g.web, part, plan);
    std::cout << part.to_string() << "\n"
              << "  torsion   " << to_string(torsion.verdict) << "  (" << torsion.relative_residual << ")\n"
              << "  pde       " << to_string(pde.verdict) << "  (" << pde.relative_residual << ")\n"
              << "  frobenius " << to_string(frob.verdict) << "  (" << frob.relative_defect << ")\n";
  }
}
