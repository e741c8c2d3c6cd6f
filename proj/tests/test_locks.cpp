#include <catch2/catch_amalgamated.hpp>

#include "sessrc/explorer.hpp"
#include "sessrc/locks.hpp"

using namespace sessrc;
using namespace sessrc::locks;

namespace {

ml::ExprPtr letIn(const std::string& x, ml::ExprPtr bound, ml::ExprPtr body) {
  return ml::mkLet(x, std::move(bound), std::move(body));
}

// let lk = <new> () in (<rel> lk; <acq> lk)
ml::ExprPtr releaseFirst(ml::ExprPtr newTerm, ml::ExprPtr relTerm, ml::ExprPtr acqTerm) {
  return letIn("lk", ml::mkApp(std::move(newTerm), ml::mkUnit()),
               ml::mkSeq(ml::mkApp(std::move(relTerm), ml::mkVar("lk")),
                         ml::mkApp(std::move(acqTerm), ml::mkVar("lk"))));
}

std::size_t terminalCount(const ExecGraph<ml::Config>& g) {
  std::size_t n = 0;
  for (const auto& node : g.nodes) {
    if (allThreadsValues<MlSemantics>(node.config)) ++n;
  }
  return n;
}

}  // namespace

TEST_CASE("acquire then release terminates under every schedule") {
  auto prog = letIn("lk", ml::mkApp(ticketNewTerm(), ml::mkUnit()),
                    ml::mkSeq(ml::mkApp(ticketAcqTerm(), ml::mkVar("lk")),
                              ml::mkSeq(ml::mkApp(ticketRelTerm(), ml::mkVar("lk")), ml::mkInt(1))));
  auto g = explore<MlSemantics>(ml::Config{{prog}, {}}, {});
  REQUIRE_FALSE(g.truncated);
  REQUIRE(terminalCount(g) > 0);
  for (const auto& node : g.nodes) {
    if (!allThreadsValues<MlSemantics>(node.config)) continue;
    REQUIRE(ml::equal(node.config.threads[0], ml::mkInt(1)));
  }
  REQUIRE_FALSE(findFairLasso(g));
}

TEST_CASE("releasing a ticket lock before acquiring diverges") {
  auto prog = releaseFirst(ticketNewTerm(), ticketRelTerm(), ticketAcqTerm());
  auto g = explore<MlSemantics>(ml::Config{{prog}, {}}, {});
  REQUIRE_FALSE(g.truncated);
  REQUIRE(terminalCount(g) == 0);
  auto lasso = findFairLasso(g);
  REQUIRE(lasso);
  REQUIRE_FALSE(lasso->cycle.empty());
}

TEST_CASE("the CLH counterpart of the diverging program terminates") {
  auto prog = releaseFirst(clhNewTerm(), clhRelTerm(), clhAcqTerm());
  auto g = explore<MlSemantics>(ml::Config{{prog}, {}}, {});
  REQUIRE_FALSE(g.truncated);
  REQUIRE(terminalCount(g) > 0);
  REQUIRE_FALSE(findFairLasso(g));
}

TEST_CASE("the CLH version is not a termination-preserving refinement") {
  auto ticket = releaseFirst(ticketNewTerm(), ticketRelTerm(), ticketAcqTerm());
  auto clh = releaseFirst(clhNewTerm(), clhRelTerm(), clhAcqTerm());
  auto report = checkRefinementMlMl(clh, ticket, {});
  REQUIRE(report.cond1.verdict == Verdict::Pass);
  REQUIRE(report.cond2.verdict == Verdict::Fail);
  REQUIRE(report.cond3.verdict == Verdict::Pass);
  REQUIRE_FALSE(report.pass());
}

TEST_CASE("translation rules") {
  SECTION("ticketnew becomes CLHnew at Unit -> Lock") {
    auto out = translateLocks({}, ml::mkVar(kTicketNew));
    REQUIRE(ml::equal(out.expr, clhNewTerm()));
    REQUIRE(ml::mlTypeEqual(out.type, ml::tArrow(ml::tUnit(), ml::tLock())));
  }
  SECTION("integers translate to themselves") {
    auto out = translateLocks({}, ml::mkInt(42));
    REQUIRE(ml::equal(out.expr, ml::mkInt(42)));
    REQUIRE(ml::mlTypeEqual(out.type, ml::tInt()));
  }
  SECTION("full ticketsync applications become CLHsync applications") {
    auto prog = ml::mkApp(ml::mkApp(ml::mkVar(kTicketSync),
                                    ml::mkApp(ml::mkVar(kTicketNew), ml::mkUnit())),
                          ml::mkLambda("u", ml::mkBool(true)));
    auto out = translateLocks({}, prog);
    REQUIRE(ml::mlTypeEqual(out.type, ml::tBool()));
    auto expected = ml::mkApp(ml::mkApp(clhSyncTerm(), ml::mkApp(clhNewTerm(), ml::mkUnit())),
                              ml::mkLambda("u", ml::mkBool(true)));
    REQUIRE(ml::equal(out.expr, expected));
  }
  SECTION("the translation is homomorphic elsewhere") {
    auto prog = letIn("x", ml::mkInt(1), ml::mkBinop(ml::BinOp::Eq, ml::mkVar("x"), ml::mkInt(1)));
    auto out = translateLocks({}, prog);
    REQUIRE(ml::equal(out.expr, prog));
    REQUIRE(ml::mlTypeEqual(out.type, ml::tBool()));
  }
}

TEST_CASE("the raw diverging program is outside the translation grammar") {
  // ticketrel / ticketacq are not surface forms, so the release-before-acquire
  // program from the counterexample cannot even be typed.
  auto prog = letIn("lk", ml::mkApp(ml::mkVar(kTicketNew), ml::mkUnit()),
                    ml::mkSeq(ml::mkApp(ml::mkVar("ticketrel"), ml::mkVar("lk")),
                              ml::mkApp(ml::mkVar("ticketacq"), ml::mkVar("lk"))));
  REQUIRE_THROWS_AS(translateLocks({}, prog), LockTypeError);
}

TEST_CASE("grammar restrictions") {
  REQUIRE_THROWS_AS(translateLocks({}, ml::mkFai(ml::mkVar("x"))), LockTypeError);
  REQUIRE_THROWS_AS(translateLocks({}, ml::mkSwap(ml::mkVar("x"), ml::mkInt(1))), LockTypeError);
  REQUIRE_THROWS_AS(translateLocks({}, ml::mkNone()), LockTypeError);
  REQUIRE_THROWS_AS(translateLocks({}, ml::mkVar(kTicketSync)), LockTypeError);
  REQUIRE_THROWS_AS(
      translateLocks({}, ml::mkApp(ml::mkVar(kTicketSync), ml::mkApp(ml::mkVar(kTicketNew), ml::mkUnit()))),
      LockTypeError);
  SECTION("reserved names cannot be rebound") {
    REQUIRE_THROWS_AS(translateLocks({}, letIn(kTicketNew, ml::mkInt(1), ml::mkInt(2))),
                      LockTypeError);
  }
  SECTION("sums need annotations in inference position") {
    REQUIRE_THROWS_AS(translateLocks({}, ml::mkInl(ml::mkInt(1))), LockTypeError);
    auto annotated = ml::mkLet("s", ml::mkInl(ml::mkInt(1)),
                               ml::mkCase(ml::mkVar("s"), "a",
                                          ml::mkBinop(ml::BinOp::Eq, ml::mkVar("a"), ml::mkInt(1)),
                                          "b", ml::mkVar("b")),
                               ml::tSum(ml::tInt(), ml::tBool()));
    auto out = translateLocks({}, annotated);
    REQUIRE(ml::mlTypeEqual(out.type, ml::tBool()));
  }
}

TEST_CASE("resolveTicket closes the surface program") {
  auto prog = ml::mkApp(ml::mkApp(ml::mkVar(kTicketSync),
                                  ml::mkApp(ml::mkVar(kTicketNew), ml::mkUnit())),
                        ml::mkLambda("u", ml::mkBool(true)));
  auto resolved = resolveTicket(prog);
  REQUIRE(ml::freeVars(resolved).empty());
}

TEST_CASE("checkLocks verifies a single-thread sync program") {
  auto prog = letIn("lk", ml::mkApp(ml::mkVar(kTicketNew), ml::mkUnit()),
                    ml::mkApp(ml::mkApp(ml::mkVar(kTicketSync), ml::mkVar("lk")),
                              ml::mkLambda("u", ml::mkBool(true))));
  auto result = checkLocks(prog, {});
  REQUIRE(ml::mlTypeEqual(result.type, ml::tBool()));
  REQUIRE(result.report.pass());
  REQUIRE_FALSE(result.report.target.truncated);
  REQUIRE_FALSE(result.report.source.truncated);
}

TEST_CASE("checkLocks rejects non-Bool programs") {
  REQUIRE_THROWS_AS(checkLocks(ml::mkInt(42), {}), LockTypeError);
}
