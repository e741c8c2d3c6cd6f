#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "sessrc/miniml.hpp"

using namespace sessrc;
using namespace sessrc::ml;

namespace {

// Keeps stepping thread 0 until it stops; caps the step count.
std::pair<ExprPtr, Heap> evalSingle(ExprPtr e, Heap h, int fuel = 10000) {
  while (fuel-- > 0) {
    auto out = stepThread(e, h);
    if (!out) break;
    REQUIRE_FALSE(out->forked);
    e = out->next;
    h = out->heap;
  }
  return {e, h};
}

}  // namespace

TEST_CASE("alloc picks the minimum free location") {
  SECTION("empty heap") {
    auto out = stepThread(mkAlloc(mkNone()), {});
    REQUIRE(out);
    REQUIRE(equal(out->next, mkLoc(0)));
    REQUIRE(out->heap.size() == 1);
    REQUIRE(equal(out->heap.at(0), mkNone()));
  }
  SECTION("gap gets filled first") {
    // Oracle: the smallest natural not in the domain.
    Heap h;
    h[0] = mkInt(1);
    h[1] = mkInt(2);
    h[3] = mkInt(3);
    LocId expected = 0;
    while (h.count(expected)) ++expected;
    REQUIRE(expected == 2);
    auto out = stepThread(mkAlloc(mkUnit()), h);
    REQUIRE(out);
    REQUIRE(equal(out->next, mkLoc(expected)));
  }
}

TEST_CASE("fetch-and-increment is one atomic step") {
  Heap h;
  h[0] = mkInt(5);
  Config cfg{{mkFai(mkLoc(0))}, h};
  auto succ = successors(cfg);
  REQUIRE(succ.size() == 1);
  // One pool step changed both the redex and the cell.
  REQUIRE(equal(succ[0].second.threads[0], mkInt(5)));
  REQUIRE(equal(succ[0].second.heap.at(0), mkInt(6)));

  SECTION("stuck on a non-integer cell") {
    Heap h2;
    h2[0] = mkBool(true);
    REQUIRE(isStuck(mkFai(mkLoc(0)), h2));
  }
}

TEST_CASE("swap atomically exchanges the cell") {
  Heap h;
  h[0] = mkLoc(9);
  h[1] = mkBool(true);
  Config cfg{{mkSwap(mkLoc(0), mkLoc(1))}, h};
  auto succ = successors(cfg);
  REQUIRE(succ.size() == 1);
  REQUIRE(equal(succ[0].second.threads[0], mkLoc(9)));
  REQUIRE(equal(succ[0].second.heap.at(0), mkLoc(1)));
  REQUIRE(equal(succ[0].second.heap.at(1), mkBool(true)));
}

TEST_CASE("match on options") {
  Heap h;
  auto scrut = mkSome(mkPair(mkLoc(1), mkInt(42)));
  auto out = stepThread(mkMatchOpt(scrut, mkInt(0), "x", mkVar("x")), h);
  REQUIRE(out);
  REQUIRE(equal(out->next, mkPair(mkLoc(1), mkInt(42))));

  auto out2 = stepThread(mkMatchOpt(mkNone(), mkInt(0), "x", mkVar("x")), h);
  REQUIRE(out2);
  REQUIRE(equal(out2->next, mkInt(0)));
}

TEST_CASE("recursive functions substitute both names") {
  // rec f n -> if n == 0 then 0 else f (n + -1)  written with +1 on a negative literal
  auto body = mkIf(mkBinop(BinOp::Eq, mkVar("n"), mkInt(0)), mkInt(0),
                   mkApp(mkVar("f"), mkBinop(BinOp::Add, mkVar("n"), mkInt(-1))));
  auto rec = mkRecFun("f", "n", body);
  auto [result, heap] = evalSingle(mkApp(rec, mkInt(3)), {});
  REQUIRE(equal(result, mkInt(0)));
}

TEST_CASE("pure reductions") {
  Heap h;
  SECTION("let and seq") {
    auto out = stepThread(mkLet("x", mkInt(3), mkBinop(BinOp::Add, mkVar("x"), mkVar("x"))), h);
    REQUIRE(out);
    auto [r, h2] = evalSingle(out->next, h);
    REQUIRE(equal(r, mkInt(6)));
    auto [rs, h3] = evalSingle(mkSeq(mkUnit(), mkInt(2)), h);
    REQUIRE(equal(rs, mkInt(2)));
  }
  SECTION("if on booleans only") {
    auto [r, h2] = evalSingle(mkIf(mkBool(false), mkInt(1), mkInt(2)), h);
    REQUIRE(equal(r, mkInt(2)));
    REQUIRE(isStuck(mkIf(mkInt(1), mkInt(1), mkInt(2)), h));
  }
  SECTION("projections") {
    auto [r1, h1] = evalSingle(mkFst(mkPair(mkInt(1), mkInt(2))), h);
    REQUIRE(equal(r1, mkInt(1)));
    auto [r2, h2] = evalSingle(mkSnd(mkPair(mkInt(1), mkInt(2))), h);
    REQUIRE(equal(r2, mkInt(2)));
  }
  SECTION("case on sums") {
    auto [r, h2] = evalSingle(
        mkCase(mkInr(mkBool(true)), "a", mkInt(0), "b", mkIf(mkVar("b"), mkInt(1), mkInt(2))), h);
    REQUIRE(equal(r, mkInt(1)));
  }
  SECTION("equality is defined on integers only") {
    REQUIRE(isStuck(mkBinop(BinOp::Eq, mkBool(true), mkBool(true)), h));
    auto [r, h2] = evalSingle(mkBinop(BinOp::Eq, mkInt(2), mkInt(2)), h);
    REQUIRE(equal(r, mkBool(true)));
  }
}

TEST_CASE("store returns unit and needs an allocated cell") {
  Heap h;
  h[0] = mkInt(1);
  auto out = stepThread(mkStore(mkLoc(0), mkInt(9)), h);
  REQUIRE(out);
  REQUIRE(equal(out->next, mkUnit()));
  REQUIRE(equal(out->heap.at(0), mkInt(9)));

  REQUIRE(isStuck(mkStore(mkLoc(5), mkInt(9)), h));  // dangling
  REQUIRE(isStuck(mkLoad(mkLoc(5)), h));
  REQUIRE(isStuck(mkLoad(mkInt(0)), h));
}

TEST_CASE("fork appends the child") {
  Config cfg{{mkSeq(mkFork(mkInt(1)), mkInt(2))}, {}};
  auto next = stepPool(cfg, 0);
  REQUIRE(next);
  REQUIRE(next->threads.size() == 2);
  REQUIRE(equal(next->threads[0], mkSeq(mkUnit(), mkInt(2))));
  REQUIRE(equal(next->threads[1], mkInt(1)));
}

TEST_CASE("evaluation is left to right") {
  // (store target evaluates before the stored value)
  Heap h;
  h[0] = mkInt(0);
  auto e = mkStore(mkFst(mkPair(mkLoc(0), mkUnit())), mkBinop(BinOp::Add, mkInt(1), mkInt(1)));
  auto out = stepThread(e, h);
  REQUIRE(out);
  const auto* store = std::get_if<Store>(&out->next->node);
  REQUIRE(store);
  REQUIRE(equal(store->target, mkLoc(0)));  // target reduced first
  REQUIRE_FALSE(isValue(store->value));
}

TEST_CASE("per-thread determinism") {
  std::mt19937 rng(5);
  Heap h;
  h[0] = mkInt(0);
  Config cfg{{mkSeq(mkFork(mkFai(mkLoc(0))), mkSeq(mkFai(mkLoc(0)), mkLoad(mkLoc(0))))}, h};
  for (int step = 0; step < 100; ++step) {
    auto succ = successors(cfg);
    REQUIRE(succ.size() <= cfg.threads.size());
    std::set<int> seen;
    for (auto& [i, c] : succ) REQUIRE(seen.insert(i).second);
    if (succ.empty()) break;
    std::uniform_int_distribution<std::size_t> pick(0, succ.size() - 1);
    cfg = succ[pick(rng)].second;
  }
}
