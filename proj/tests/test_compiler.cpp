#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "sessrc/compiler.hpp"
#include "sessrc/explorer.hpp"
#include "sessrc/refinement.hpp"

using namespace sessrc;

namespace {

src::ExprPtr runningExample() {
  auto proto = sessSend(tyInt(), sessEnd());
  return src::mkLetPair(
      "x", "y", src::mkNewch(proto),
      src::mkForkSeq(src::mkSend(src::mkVar("x"), src::mkInt(42)),
                     src::mkLetPair("c", "v", src::mkRecv(src::mkVar("y")), src::mkVar("v"))));
}

// Random source terms (not necessarily well typed); compilation is
// structural, so these exercise every constructor.
src::ExprPtr randomTerm(std::mt19937& rng, int depth, std::vector<std::string> vars) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 3 : 11);
  auto sub = [&](int d) { return randomTerm(rng, d, vars); };
  switch (pick(rng)) {
    case 0: return src::mkInt(static_cast<int>(rng() % 100));
    case 1: return src::mkUnit();
    case 2: return src::mkNewch(rng() % 2 ? sessSend(tyInt(), sessEnd()) : nullptr);
    case 3:
      if (!vars.empty()) return src::mkVar(vars[rng() % vars.size()]);
      return src::mkInt(7);
    case 4: {
      std::string p = "v" + std::to_string(rng() % 4);
      auto inner = vars;
      inner.push_back(p);
      return src::mkLambda(p, randomTerm(rng, depth - 1, inner));
    }
    case 5: return src::mkApp(sub(depth - 1), sub(depth - 1));
    case 6: return src::mkPair(sub(depth - 1), sub(depth - 1));
    case 7: {
      std::string a = "a" + std::to_string(rng() % 3);
      std::string b = "b" + std::to_string(rng() % 3);
      auto inner = vars;
      inner.push_back(a);
      inner.push_back(b);
      return src::mkLetPair(a, b, sub(depth - 1), randomTerm(rng, depth - 1, inner));
    }
    case 8: return src::mkForkSeq(sub(depth - 1), sub(depth - 1));
    case 9: return src::mkSend(sub(depth - 1), sub(depth - 1));
    case 10: return src::mkRecv(sub(depth - 1));
    default: {
      std::string x = "x" + std::to_string(rng() % 3);
      auto inner = vars;
      inner.push_back(x);
      return src::mkLet(x, sub(depth - 1), randomTerm(rng, depth - 1, inner));
    }
  }
}

}  // namespace

TEST_CASE("heapNewch runs to a shared endpoint pair") {
  ml::Config cfg{{heapNewchTerm()}, {}};
  auto g = explore<MlSemantics>(cfg, {});
  REQUIRE_FALSE(g.truncated);
  std::size_t terminals = 0;
  for (const auto& node : g.nodes) {
    if (!allThreadsValues<MlSemantics>(node.config)) continue;
    ++terminals;
    REQUIRE(ml::equal(node.config.threads[0], ml::mkPair(ml::mkLoc(0), ml::mkLoc(0))));
    REQUIRE(node.config.heap.size() == 1);
    REQUIRE(ml::equal(node.config.heap.at(0), ml::mkNone()));
  }
  REQUIRE(terminals == 1);
}

TEST_CASE("heapSend appends a node and returns the new end") {
  // Oracle for the expected final heap: run the interpreter to termination
  // under the unique schedule (single thread).
  ml::Heap h;
  h[0] = ml::mkNone();
  ml::ExprPtr e = ml::mkApp(heapSendTerm(), ml::mkPair(ml::mkLoc(0), ml::mkInt(42)));
  ml::Heap heap = h;
  ml::ExprPtr cur = e;
  for (int i = 0; i < 100; ++i) {
    auto out = ml::stepThread(cur, heap);
    if (!out) break;
    cur = out->next;
    heap = out->heap;
  }
  REQUIRE(ml::equal(cur, ml::mkLoc(1)));
  REQUIRE(heap.size() == 2);
  REQUIRE(ml::equal(heap.at(0), ml::mkSome(ml::mkPair(ml::mkLoc(1), ml::mkInt(42)))));
  REQUIRE(ml::equal(heap.at(1), ml::mkNone()));
}

TEST_CASE("heapRecv spins forever on an empty endpoint") {
  ml::Heap h;
  h[0] = ml::mkNone();
  ml::Config cfg{{ml::mkApp(heapRecvTerm(), ml::mkLoc(0))}, h};
  auto g = explore<MlSemantics>(cfg, {});
  REQUIRE_FALSE(g.truncated);
  // No terminal configuration; the spin revisits an earlier state.
  for (const auto& node : g.nodes) {
    REQUIRE_FALSE(allThreadsValues<MlSemantics>(node.config));
    REQUIRE(node.expanded);
    REQUIRE_FALSE(node.out.empty());
  }
  REQUIRE(g.nodes.size() < 20);
}

TEST_CASE("compile is homomorphic on literals and fork") {
  REQUIRE(ml::equal(compile(src::mkInt(42)), ml::mkInt(42)));
  REQUIRE(ml::equal(compile(src::mkUnit()), ml::mkUnit()));
  auto forked = compile(src::mkForkSeq(src::mkInt(1), src::mkInt(2)));
  auto expected = ml::mkApp(ml::mkLambda("_", ml::mkInt(2)), ml::mkFork(ml::mkInt(1)));
  REQUIRE(ml::equal(forked, expected));
}

TEST_CASE("compiling the running example gives the expected term") {
  auto expected = ml::mkLetPair(
      "x", "y", ml::mkApp(ml::mkLambda("_", heapNewchTerm()), ml::mkUnit()),
      ml::mkApp(ml::mkLambda("_", ml::mkLetPair("c", "v",
                                                ml::mkApp(heapRecvTerm(), ml::mkVar("y")),
                                                ml::mkVar("v"))),
                ml::mkFork(ml::mkApp(heapSendTerm(),
                                     ml::mkPair(ml::mkVar("x"), ml::mkInt(42))))));
  REQUIRE(ml::equal(compile(runningExample()), expected));
}

TEST_CASE("annotations are erased") {
  auto e = src::mkLambda("x", src::mkVar("x"), tyInt());
  auto t = compile(e);
  const auto* lam = std::get_if<ml::Lambda>(&t->node);
  REQUIRE(lam);
  REQUIRE_FALSE(lam->ann);
}

TEST_CASE("endpoint literals are rejected") {
  REQUIRE_THROWS_AS(compile(src::mkEndpoint(0, Side::Left)), std::invalid_argument);
}

TEST_CASE("compositionality under context constructors") {
  std::mt19937 rng(31);
  for (int i = 0; i < 200; ++i) {
    auto e = randomTerm(rng, 3, {});
    auto f = randomTerm(rng, 3, {});
    REQUIRE(ml::equal(compile(src::mkApp(e, f)), ml::mkApp(compile(e), compile(f))));
    REQUIRE(ml::equal(compile(src::mkPair(e, f)), ml::mkPair(compile(e), compile(f))));
    REQUIRE(ml::equal(compile(src::mkRecv(e)), ml::mkApp(heapRecvTerm(), compile(e))));
    REQUIRE(ml::equal(compile(src::mkSend(e, f)),
                      ml::mkApp(heapSendTerm(), ml::mkPair(compile(e), compile(f)))));
    REQUIRE(ml::equal(compile(src::mkFork(e)), ml::mkFork(compile(e))));
    REQUIRE(ml::equal(compile(src::mkLetPair("p", "q", e, f)),
                      ml::mkLetPair("p", "q", compile(e), compile(f))));
  }
}

TEST_CASE("compiled output preserves free variables and stays in the pure fragment") {
  std::mt19937 rng(37);
  for (int i = 0; i < 500; ++i) {
    auto e = randomTerm(rng, 4, {"g0", "g1"});
    auto t = compile(e);
    REQUIRE(ml::freeVars(t) == src::freeVars(e));
    REQUIRE(compilerOutputShapeOk(t));
  }
}
