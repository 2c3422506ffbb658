#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "corpus.hpp"
#include "oracles.hpp"
#include "webred/reducibility.hpp"

using namespace webred;

namespace {

WebSpec web(int n, const char* F) { return WebSpec(n, parse(F)); }
RolePartition part(int n, std::vector<int> p, std::vector<int> a) { return RolePartition(n, std::move(p), std::move(a)); }

const SamplePlan plan{.count = 50, .seed = 42};

}  // namespace

TEST(RolePartition, Validation) {
  const RolePartition r(4, {1}, {3, 2});
  EXPECT_EQ(r.a(), (std::vector<int>{2, 3}));
  EXPECT_EQ(r.s(), (std::vector<int>{4}));
  EXPECT_EQ(r.l(), 1);
  EXPECT_EQ(r.k(), 3);
  EXPECT_THROW(part(4, {}, {2, 3}), std::invalid_argument);
  EXPECT_THROW(part(4, {1}, {2}), std::invalid_argument);
  EXPECT_THROW(part(4, {1}, {1, 2}), std::invalid_argument);
  EXPECT_THROW(part(4, {1}, {2, 5}), std::invalid_argument);
  EXPECT_THROW(RolePartition(4, {1}, {2, 3}, std::vector<int>{}), std::invalid_argument);
  EXPECT_THROW(RolePartition::contiguous(4, 2, 3), std::invalid_argument);
  EXPECT_THROW(RolePartition::contiguous(4, 0, 3), std::invalid_argument);
  EXPECT_EQ(RolePartition::contiguous(5, 2, 4), RolePartition(5, {1, 2}, {3, 4}, std::vector<int>{5}));
}

TEST(ResidualPde, ProductWebVanishes) {
  const WebSpec w = web(4, "x1*(x2+x3)*x4");
  for (const auto& p : sample(w, plan)) EXPECT_EQ(residual_pde(w, 1, 2, 3, p).value, 0.0);
}

TEST(ResidualPde, BilinearWebIsOne) {
  // F_12 = 1, F_3 = 1, F_13 = 0, F_2 = x1
  const WebSpec w = web(4, "x1*x2+x3+x4");
  for (const auto& p : sample(w, plan)) {
    const auto r = residual_pde(w, 1, 2, 3, p);
    EXPECT_EQ(r.value, 1.0);
    EXPECT_EQ(r.scale, 2.0);
  }
}

TEST(ResidualPde, GoursatFormVanishes) {
  const auto g = goursat4();
  for (const auto& p : sample(g.web, plan)) {
    const auto r = residual_pde(g.web, 1, 2, 3, p);
    EXPECT_LE(std::abs(r.value) / r.scale, 1e-14);
  }
}

TEST(ResidualPde, RequiresRegularPoint) {
  EXPECT_THROW(residual_pde(web(4, "x1*x2+x3+x4"), 1, 2, 3, Point{0, 1, 1, 1}), RegularityError);
}

TEST(CheckSubweb, Examples) {
  const auto r = check_subweb(web(4, "x1*(x2+x3)*x4"), part(4, {1}, {2, 3}), plan);
  EXPECT_EQ(r.verdict, Verdict::reducible);
  EXPECT_EQ(r.criterion, Criterion::torsion);
  EXPECT_EQ(r.samples, 50);
  EXPECT_EQ(check_subweb(web(4, "x1*x2+x3+x4"), part(4, {1}, {2, 3}), plan).verdict, Verdict::not_reducible);
  for (const auto& p : enumerate_partitions(4, 2))
    EXPECT_EQ(check_subweb(web(4, "x1+x2+x3+x4"), p, plan).verdict, Verdict::reducible);
}

TEST(CheckPde, SameVerdictsAsTorsion) {
  EXPECT_EQ(check_pde(web(4, "x1*(x2+x3)*x4"), part(4, {1}, {2, 3}), plan).verdict, Verdict::reducible);
  const auto bad = check_pde(web(4, "x1*x2+x3+x4"), part(4, {1}, {2, 3}), plan);
  EXPECT_EQ(bad.verdict, Verdict::not_reducible);
  ASSERT_TRUE(bad.witness);
  EXPECT_EQ(bad.witness->p, 1);
  EXPECT_EQ(bad.max_residual, 1.0);
  EXPECT_EQ(bad.residual_scale, 2.0);
  EXPECT_EQ(bad.relative_residual, 0.5);
  for (const auto& p : enumerate_partitions(4, 2))
    EXPECT_EQ(check_pde(web(4, "x1+x2+x3+x4"), p, plan).verdict, Verdict::reducible);
}

TEST(CheckFull, Examples) {
  EXPECT_EQ(check_full(web(4, "x1*(x2+x3)*x4"), part(4, {1}, {2, 3}), plan).verdict, Verdict::reducible);
  EXPECT_EQ(check_full(web(4, "x1+x2+x3+x4"), part(4, {1}, {2, 3}), plan).verdict, Verdict::reducible);

  // g = x2*x3 + x3*x4 couples to x4: the subweb reduces, the whole web does not
  const WebSpec coupled = web(4, "x1+x2*x3+x3*x4+x4");
  EXPECT_EQ(check_subweb(coupled, part(4, {1}, {2, 3}), plan).verdict, Verdict::reducible);
  const auto full = check_full(coupled, part(4, {1}, {2, 3}), plan);
  EXPECT_EQ(full.verdict, Verdict::not_reducible);
  ASSERT_TRUE(full.witness);
  EXPECT_EQ(full.witness->p, 4);

  // frozen from the FD torsion oracle at the report's witness point
  const auto ref = oracle::torsion(coupled.function(), full.witness->point, 4);
  const double gap = std::abs(ref[3 * 4 + 1] - ref[3 * 4 + 2]);
  EXPECT_GT(gap, 1e-3);
}

TEST(CheckFull, StrengthensSubwebCriterion) {
  for (const auto& e : corpus::all_webs()) {
    for (const auto& p : enumerate_partitions(e.web.dimension(), 2)) {
      if (check_full(e.web, p, {.count = 10, .seed = 5}).verdict == Verdict::reducible) {
        EXPECT_EQ(check_subweb(e.web, p, {.count = 10, .seed = 5}).verdict, Verdict::reducible) << e.name;
      }
    }
  }
}

TEST(Check, SamplingFailureIsInconclusive) {
  const WebSpec w(2 + 2, parse("x1*x2*x3*x4"), {}, 0.9);
  const auto r = check_pde(w, part(4, {1}, {2, 3}), {.count = 50, .seed = 1, .max_rejections = 100});
  EXPECT_EQ(r.verdict, Verdict::inconclusive);
  EXPECT_EQ(r.samples, 0);
  EXPECT_NE(r.message.find("sampling failed"), std::string::npos);
  EXPECT_EQ(check_subweb(w, part(4, {1}, {2, 3}), {.count = 50, .seed = 1, .max_rejections = 100}).verdict,
            Verdict::inconclusive);
}

TEST(Check, Classification) {
  EXPECT_EQ(classify(0.0), Verdict::reducible);
  EXPECT_EQ(classify(1e-9), Verdict::reducible);
  EXPECT_EQ(classify(1e-8), Verdict::inconclusive);
  EXPECT_EQ(classify(1e-6), Verdict::inconclusive);
  EXPECT_EQ(classify(2e-6), Verdict::not_reducible);
}

TEST(Check, DimensionMismatch) {
  EXPECT_THROW(check_pde(web(3, "x1+x2+x3"), part(4, {1}, {2, 3}), plan), std::invalid_argument);
}

TEST(Compose, Substitution) {
  const WebSpec w = compose(parse("u1*u2"), parse("(x2+x3)*x4"), part(4, {1}, {2, 3}));
  EXPECT_EQ(to_string(w.function()), "x1*((x2+x3)*x4)");
  EXPECT_EQ(w.dimension(), 4);
}

TEST(Compose, SlotOrder) {
  // u1, u2 -> x_P; u3 -> g; u4, u5 -> x_S
  const RolePartition r(6, {2, 5}, {1, 3}, std::vector<int>{4, 6});
  const WebSpec w = compose(parse("u1+2*u2+3*u3+4*u4+5*u5"), parse("x1*x3"), r);
  EXPECT_EQ(to_string(w.function()), "x2+2*x5+3*(x1*x3)+4*x4+5*x6");
}

TEST(Compose, Errors) {
  const auto r = part(4, {1}, {2, 3});
  EXPECT_THROW(compose(parse("u1*u4"), parse("x2+x3"), r), std::invalid_argument);  // arity: f has 3 slots
  EXPECT_THROW(compose(parse("u1*x2"), parse("x2+x3"), r), std::invalid_argument);
  EXPECT_THROW(compose(parse("u1*u2"), parse("x1+x3"), r), std::invalid_argument);  // x1 is in P
  EXPECT_THROW(compose(parse("u1*u2"), parse("u1+x3"), r), std::invalid_argument);
}

TEST(ComposeProperty, ComposedWebsPassPdeCheck) {
  std::mt19937_64 rng(77);
  int done = 0;
  for (std::uint64_t seed = 1; done < 20; ++seed) {
    const int n = 3 + static_cast<int>(rng() % 3);
    const auto all = enumerate_partitions(n, n - 2);
    const RolePartition r = all[rng() % all.size()];
    const int arity = r.l() + 1 + static_cast<int>(r.s().size());

    // random polynomial f over slots and g over A and S, plus linear terms
    // so that every partial is generically non-zero
    oracle::ExprGenerator fgen(seed, {.variables = arity, .max_depth = 3, .polynomial = true});
    std::vector<Expr> as_slots;
    for (int i = 1; i <= arity; ++i) as_slots.push_back(Expr::slot(i));
    Expr f = substitute_variables(fgen.next(), as_slots);
    for (int i = 1; i <= arity; ++i) f = Expr::binary(Op::add, f, Expr::slot(i));

    oracle::ExprGenerator ggen(seed + 1000, {.variables = n, .max_depth = 3, .polynomial = true});
    std::vector<Expr> to_blocks;
    std::vector<int> allowed = r.a();
    allowed.insert(allowed.end(), r.s().begin(), r.s().end());
    for (int i = 0; i < n; ++i) to_blocks.push_back(Expr::variable(allowed[i % allowed.size()]));
    Expr g = substitute_variables(ggen.next(), to_blocks);
    for (int a : r.a()) g = Expr::binary(Op::add, g, Expr::binary(Op::mul, Expr::constant(a), Expr::variable(a)));

    const WebSpec w = compose(f, g, r);
    const auto report = check_pde(w, r, {.count = 20, .seed = seed, .max_rejections = 500});
    if (report.samples == 0) continue;
    EXPECT_EQ(report.verdict, Verdict::reducible) << to_string(w.function()) << " " << r.to_string();
    ++done;
  }
}

TEST(Scan, EnumeratesAdmissiblePartitions) {
  // n = 4: |P| = 1 gives 4 * (3 + 1), |P| = 2 gives 6 * 1
  EXPECT_EQ(enumerate_partitions(4, 2).size(), 22u);
  EXPECT_EQ(enumerate_partitions(4, 1).size(), 16u);
  EXPECT_EQ(enumerate_partitions(3, 1).size(), 3u);
  EXPECT_THROW(enumerate_partitions(9, 1), std::invalid_argument);

  std::set<std::vector<int>> seen;
  for (const auto& p : enumerate_partitions(5, 3)) {
    std::vector<int> key = p.p();
    key.push_back(0);
    key.insert(key.end(), p.a().begin(), p.a().end());
    EXPECT_TRUE(seen.insert(key).second);
  }
}

TEST(Scan, ProductWebHit) {
  const auto entries = scan(web(4, "x1*(x2+x3)*x4"), plan, 2);
  ASSERT_EQ(entries.size(), 22u);
  const auto target = part(4, {1}, {2, 3});
  const auto it = std::find_if(entries.begin(), entries.end(), [&](const ScanEntry& e) { return e.partition == target; });
  ASSERT_NE(it, entries.end());
  EXPECT_EQ(it->report.verdict, Verdict::reducible);
  for (std::size_t i = 1; i < entries.size(); ++i)
    EXPECT_LE(entries[i - 1].report.relative_residual, entries[i].report.relative_residual);
}

TEST(Scan, ParallelWebAllReducible) {
  for (const auto& e : scan(web(4, "x1+x2+x3+x4"), plan, 2)) EXPECT_EQ(e.report.verdict, Verdict::reducible);
}

TEST(Scan, GenericWebNothingReducible) {
  // every partition clears the non-reducible floor by orders of magnitude
  const auto entries = scan(web(4, "exp(x1)+exp(x2)+exp(x3)+exp(x4)+x1*x2*x3*x4"), plan, 2);
  for (const auto& e : entries) {
    EXPECT_EQ(e.report.verdict, Verdict::not_reducible) << e.partition.to_string();
    EXPECT_GE(e.report.relative_residual, 1e-3);
  }
}

TEST(ReducibilityProperty, BlockPermutationInvariance) {
  // relabel variables inside P and inside A; verdict must not move
  const Expr F = corpus::reducible_webs()[5].web.function();  // six_dim, P={1}, A={2,3,4}
  const RolePartition r(6, {1}, {2, 3, 4});
  std::vector<Expr> swap_a{Expr::variable(1), Expr::variable(4), Expr::variable(2),
                           Expr::variable(3), Expr::variable(5), Expr::variable(6)};
  const WebSpec w(6, F), v(6, substitute_variables(F, swap_a));
  EXPECT_EQ(check_pde(w, r, plan).verdict, Verdict::reducible);
  EXPECT_EQ(check_pde(v, r, plan).verdict, Verdict::reducible);
  EXPECT_EQ(check_subweb(v, r, plan).verdict, Verdict::reducible);

  const WebSpec generic = web(4, "x1*x2*x3+x1*x1*x4+x2*x4+x3+x1");
  const RolePartition q(4, {1, 2}, {3, 4});
  const std::vector<Expr> swap_p{Expr::variable(2), Expr::variable(1), Expr::variable(4), Expr::variable(3)};
  const WebSpec swapped(4, substitute_variables(generic.function(), swap_p));
  EXPECT_EQ(check_pde(generic, q, plan).verdict, check_pde(swapped, q, plan).verdict);
}
