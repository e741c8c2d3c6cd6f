#include <catch2/catch_amalgamated.hpp>

#include "sessrc/typecheck.hpp"

using namespace sessrc;
using namespace sessrc::src;

namespace {

ExprPtr runningExample() {
  auto proto = sessSend(tyInt(), sessEnd());
  return mkLetPair(
      "x", "y", mkNewch(proto),
      mkForkSeq(mkSend(mkVar("x"), mkInt(42)),
                mkLetPair("c", "v", mkRecv(mkVar("y")), mkVar("v"))));
}

TypeErrorKind kindOf(const TypeEnv& env, const ExprPtr& e) {
  try {
    typecheck(env, e);
  } catch (const TypeError& err) {
    return err.kind;
  }
  FAIL("expected a type error");
  return TypeErrorKind::Mismatch;
}

}  // namespace

TEST_CASE("running example types at Int with no context use") {
  auto result = typecheck({}, runningExample());
  REQUIRE(typeEqual(result.type, tyInt()));
  REQUIRE(result.used.empty());
}

TEST_CASE("variable rule consumes the binding") {
  TypeEnv env{{"x", tyInt()}};
  auto result = typecheck(env, mkVar("x"));
  REQUIRE(typeEqual(result.type, tyInt()));
  REQUIRE(result.used == std::set<std::string>{"x"});
}

TEST_CASE("affine discipline rejects reuse") {
  // let (x, y) = newch[!Int.end] in (x, x)
  auto e = mkLetPair("x", "y", mkNewch(sessSend(tyInt(), sessEnd())),
                     mkPair(mkVar("x"), mkVar("x")));
  REQUIRE(kindOf({}, e) == TypeErrorKind::VariableReused);

  SECTION("reuse across let sugar") {
    TypeEnv env{{"x", tyInt()}};
    auto reuse = mkLet("y", mkVar("x"), mkVar("x"));
    REQUIRE(kindOf(env, reuse) == TypeErrorKind::VariableReused);
  }
  SECTION("affine weakening allows dropping") {
    TypeEnv env{{"x", tyInt()}};
    auto result = typecheck(env, mkInt(7));
    REQUIRE(result.used.empty());
  }
}

TEST_CASE("typed error cases") {
  REQUIRE(kindOf({}, mkVar("nope")) == TypeErrorKind::UnboundVariable);
  REQUIRE(kindOf({}, mkNewch()) == TypeErrorKind::CannotInferSession);
  REQUIRE(kindOf({}, mkApp(mkInt(1), mkInt(2))) == TypeErrorKind::Mismatch);
  REQUIRE(kindOf({}, mkSend(mkInt(1), mkInt(2))) == TypeErrorKind::Mismatch);
  REQUIRE(kindOf({}, mkEndpoint(0, Side::Left)) == TypeErrorKind::EndpointLiteral);
  REQUIRE(kindOf({}, mkLambda("x", mkVar("x"))) == TypeErrorKind::CannotInfer);
  SECTION("payload type must match the protocol") {
    auto e = mkLetPair("x", "y", mkNewch(sessSend(tyInt(), sessEnd())),
                       mkPair(mkSend(mkVar("x"), mkUnit()), mkVar("y")));
    REQUIRE(kindOf({}, e) == TypeErrorKind::Mismatch);
  }
  SECTION("receive needs a ?-protocol") {
    auto e = mkLetPair("x", "y", mkNewch(sessSend(tyInt(), sessEnd())),
                       mkPair(mkRecv(mkVar("x")), mkVar("y")));
    REQUIRE(kindOf({}, e) == TypeErrorKind::Mismatch);
  }
}

TEST_CASE("newch components are dual") {
  auto proto = sessSend(tyTensor(tyInt(), tyUnit()), sessRecv(tyInt(), sessEnd()));
  auto result = typecheck({}, mkNewch(proto));
  const auto* tensor = std::get_if<TensorType>(&result.type->node);
  REQUIRE(tensor);
  const auto* l = std::get_if<SessionEmbed>(&tensor->first->node);
  const auto* r = std::get_if<SessionEmbed>(&tensor->second->node);
  REQUIRE(l);
  REQUIRE(r);
  REQUIRE(sessionEqual(dual(l->proto), r->proto));
}

TEST_CASE("annotated lambdas infer; let-style application infers unannotated ones") {
  auto lam = mkLambda("x", mkVar("x"), tyInt());
  auto r1 = typecheck({}, lam);
  REQUIRE(typeEqual(r1.type, tyLolli(tyInt(), tyInt())));

  auto letStyle = mkLet("x", mkInt(5), mkVar("x"));
  auto r2 = typecheck({}, letStyle);
  REQUIRE(typeEqual(r2.type, tyInt()));

  auto applied = mkApp(mkLambda("f", mkApp(mkVar("f"), mkInt(3))),
                       mkLambda("n", mkVar("n"), tyInt()));
  auto r3 = typecheck({}, applied);
  REQUIRE(typeEqual(r3.type, tyInt()));
}

TEST_CASE("shadowing rebinding is scoped") {
  // let x = 1 in let x = () in x  : Unit
  auto e = mkLet("x", mkInt(1), mkLet("x", mkUnit(), mkVar("x")));
  auto r = typecheck({}, e);
  REQUIRE(typeEqual(r.type, tyUnit()));

  SECTION("outer binding stays consumable before the shadow") {
    TypeEnv env{{"x", tyInt()}};
    auto ok = mkLet("y", mkVar("x"), mkLet("x", mkUnit(), mkVar("x")));
    auto r2 = typecheck(env, ok);
    REQUIRE(typeEqual(r2.type, tyUnit()));
    REQUIRE(r2.used == std::set<std::string>{"x"});
  }
}

TEST_CASE("fork types the child first with any type") {
  TypeEnv env{{"x", tySession(sessSend(tyInt(), sessEnd()))}};
  auto e = mkForkSeq(mkSend(mkVar("x"), mkInt(1)), mkInt(9));
  auto r = typecheck(env, e);
  REQUIRE(typeEqual(r.type, tyInt()));
  REQUIRE(r.used == std::set<std::string>{"x"});

  SECTION("child and continuation contexts must be disjoint") {
    auto bad = mkForkSeq(mkSend(mkVar("x"), mkInt(1)), mkSend(mkVar("x"), mkInt(2)));
    REQUIRE(kindOf(env, bad) == TypeErrorKind::VariableReused);
  }
}

TEST_CASE("affinity soundness: restricting to the used set preserves the type") {
  TypeEnv env{{"a", tyInt()},
              {"b", tyUnit()},
              {"f", tyLolli(tyInt(), tyInt())},
              {"c", tySession(sessSend(tyInt(), sessEnd()))}};
  std::vector<ExprPtr> programs = {
      mkApp(mkVar("f"), mkVar("a")),
      mkPair(mkVar("a"), mkVar("b")),
      mkSend(mkVar("c"), mkVar("a")),
      mkInt(3),
      mkForkSeq(mkSend(mkVar("c"), mkInt(1)), mkVar("a")),
  };
  for (const auto& e : programs) {
    auto full = typecheck(env, e);
    TypeEnv restricted;
    for (const auto& name : full.used) restricted.emplace(name, env.at(name));
    auto again = typecheck(restricted, e);
    REQUIRE(typeEqual(again.type, full.type));
    REQUIRE(again.used == full.used);
  }
}

TEST_CASE("debug mode records disjoint splits") {
  TypecheckDebug dbg;
  TypeEnv env{{"a", tyInt()}, {"b", tyUnit()}};
  typecheck(env, mkPair(mkVar("a"), mkVar("b")), &dbg);
  REQUIRE_FALSE(dbg.splits.empty());
  for (const auto& split : dbg.splits) {
    for (const auto& name : split.left) REQUIRE_FALSE(split.right.count(name));
  }
}
