#pragma once

#include <set>
#include <stdexcept>
#include <string>

#include "sessrc/miniml.hpp"
#include "sessrc/source_lang.hpp"

namespace sessrc {

// let l = ref none in (l, l)
inline ml::ExprPtr heapNewchTerm() {
  return ml::mkLet("l", ml::mkAlloc(ml::mkNone()), ml::mkPair(ml::mkVar("l"), ml::mkVar("l")));
}

// fun p -> let (l', v') = p in let lnew = ref none in (l' := some (lnew, v'); lnew)
//
// Takes its two arguments as one pair, matching the destructuring in the
// definition; callers build the pair at the call site.
inline ml::ExprPtr heapSendTerm() {
  using namespace ml;
  ExprPtr body = mkLetPair(
      "l'", "v'", mkVar("p"),
      mkLet("lnew", mkAlloc(mkNone()),
            mkSeq(mkStore(mkVar("l'"), mkSome(mkPair(mkVar("lnew"), mkVar("v'")))), mkVar("lnew"))));
  return mkLambda("p", body);
}

// rec f l -> match !l with none -> f l | some x -> x
inline ml::ExprPtr heapRecvTerm() {
  using namespace ml;
  ExprPtr body = mkMatchOpt(mkLoad(mkVar("l")), mkApp(mkVar("f"), mkVar("l")), "x", mkVar("x"));
  return mkRecFun("f", "l", body);
}

// The homomorphic translation: channel primitives are replaced by their
// shared-memory implementations, everything else is preserved. Type
// annotations are erased (the target is untyped).
inline ml::ExprPtr compile(const src::ExprPtr& e) {
  using namespace src;
  return std::visit(
      overloaded{
          [&](const Var& v) { return ml::mkVar(v.name); },
          [&](const IntLit& i) { return ml::mkInt(i.value); },
          [&](const UnitLit&) { return ml::mkUnit(); },
          [&](const EndpointLit&) -> ml::ExprPtr {
            throw std::invalid_argument("compile: endpoint literal in input");
          },
          [&](const Lambda& l) { return ml::mkLambda(l.param, compile(l.body)); },
          [&](const App& a) { return ml::mkApp(compile(a.fn), compile(a.arg)); },
          [&](const PairE& p) { return ml::mkPair(compile(p.first), compile(p.second)); },
          [&](const LetPair& lp) {
            return ml::mkLetPair(lp.firstName, lp.secondName, compile(lp.bound), compile(lp.body));
          },
          [&](const Fork& f) { return ml::mkFork(compile(f.child)); },
          [&](const NewCh&) {
            return ml::mkApp(ml::mkLambda("_", heapNewchTerm()), ml::mkUnit());
          },
          [&](const Send& s) {
            return ml::mkApp(heapSendTerm(), ml::mkPair(compile(s.chan), compile(s.payload)));
          },
          [&](const Recv& r) { return ml::mkApp(heapRecvTerm(), compile(r.chan)); },
      },
      e->node);
}

struct CompiledProgram {
  ml::ExprPtr target;
  src::ExprPtr sourceRef;
};

inline CompiledProgram compileProgram(const src::ExprPtr& e) { return {compile(e), e}; }

// The compiler only emits pure constructs plus alloc/load/store and fork;
// fai, swap and location literals never appear in its output.
inline bool compilerOutputShapeOk(const ml::ExprPtr& e) {
  bool ok = true;
  if (std::holds_alternative<ml::Fai>(e->node) || std::holds_alternative<ml::Swap>(e->node) ||
      std::holds_alternative<ml::Loc>(e->node)) {
    return false;
  }
  ml::forEachChild(e, [&](const ml::ExprPtr& c) { ok = ok && compilerOutputShapeOk(c); });
  return ok;
}

}  // namespace sessrc
