#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sessrc/miniml.hpp"
#include "sessrc/refinement.hpp"

namespace sessrc::locks {

inline const std::string kTicketNew = "ticketnew";
inline const std::string kTicketSync = "ticketsync";

// --- ticket lock ---

// fun _ -> (ref 0, ref 0)    (owner counter, next counter)
inline ml::ExprPtr ticketNewTerm() {
  using namespace ml;
  return mkLambda("_", mkPair(mkAlloc(mkInt(0)), mkAlloc(mkInt(0))));
}

// rec loop x -> fun lk -> let o = !(fst lk) in if x == o then () else loop x lk
inline ml::ExprPtr ticketWaitTerm() {
  using namespace ml;
  ExprPtr body = mkLet(
      "o", mkLoad(mkFst(mkVar("lk"))),
      mkIf(mkBinop(BinOp::Eq, mkVar("x"), mkVar("o")), mkUnit(),
           mkApp(mkApp(mkVar("loop"), mkVar("x")), mkVar("lk"))));
  return mkRecFun("loop", "x", mkLambda("lk", body));
}

// fun lk -> let n = fai (snd lk) in <ticketwait> n lk
inline ml::ExprPtr ticketAcqTerm() {
  using namespace ml;
  return mkLambda("lk", mkLet("n", mkFai(mkSnd(mkVar("lk"))),
                              mkApp(mkApp(ticketWaitTerm(), mkVar("n")), mkVar("lk"))));
}

// fun lk -> fst lk := !(fst lk) + 1
//
// The load and the store are separate steps, exactly as written; the race
// this allows is part of the modeled behavior.
inline ml::ExprPtr ticketRelTerm() {
  using namespace ml;
  return mkLambda(
      "lk", mkStore(mkFst(mkVar("lk")), mkBinop(BinOp::Add, mkLoad(mkFst(mkVar("lk"))), mkInt(1))));
}

// fun lk -> fun f -> <acq> lk; let z = f () in (<rel> lk; z)
inline ml::ExprPtr ticketSyncTerm() {
  using namespace ml;
  ExprPtr body = mkSeq(mkApp(ticketAcqTerm(), mkVar("lk")),
                       mkLet("z", mkApp(mkVar("f"), mkUnit()),
                             mkSeq(mkApp(ticketRelTerm(), mkVar("lk")), mkVar("z"))));
  return mkLambda("lk", mkLambda("f", body));
}

// --- CLH lock ---

// fun _ -> let d = ref false in (ref d, ref d)    (head pointer, tail pointer)
inline ml::ExprPtr clhNewTerm() {
  using namespace ml;
  return mkLambda("_", mkLet("d", mkAlloc(mkBool(false)),
                             mkPair(mkAlloc(mkVar("d")), mkAlloc(mkVar("d")))));
}

// rec loop me -> fun prev -> fun lk ->
//   let w = !prev in if w then loop me prev lk else fst lk := me
inline ml::ExprPtr clhWaitTerm() {
  using namespace ml;
  ExprPtr again = mkApp(mkApp(mkApp(mkVar("loop"), mkVar("me")), mkVar("prev")), mkVar("lk"));
  ExprPtr body = mkLet("w", mkLoad(mkVar("prev")),
                       mkIf(mkVar("w"), again, mkStore(mkFst(mkVar("lk")), mkVar("me"))));
  return mkRecFun("loop", "me", mkLambda("prev", mkLambda("lk", body)));
}

// fun lk -> let me = ref true in let prev = swap (snd lk) me in <wait> me prev lk
inline ml::ExprPtr clhAcqTerm() {
  using namespace ml;
  ExprPtr wait = mkApp(mkApp(mkApp(clhWaitTerm(), mkVar("me")), mkVar("prev")), mkVar("lk"));
  return mkLambda("lk", mkLet("me", mkAlloc(mkBool(true)),
                              mkLet("prev", mkSwap(mkSnd(mkVar("lk")), mkVar("me")), wait)));
}

// fun lk -> !(fst lk) := false
inline ml::ExprPtr clhRelTerm() {
  using namespace ml;
  return mkLambda("lk", mkStore(mkLoad(mkFst(mkVar("lk"))), mkBool(false)));
}

// fun lk -> fun f -> <acq> lk; let z = f () in (<rel> lk; z)
inline ml::ExprPtr clhSyncTerm() {
  using namespace ml;
  ExprPtr body = mkSeq(mkApp(clhAcqTerm(), mkVar("lk")),
                       mkLet("z", mkApp(mkVar("f"), mkUnit()),
                             mkSeq(mkApp(clhRelTerm(), mkVar("lk")), mkVar("z"))));
  return mkLambda("lk", mkLambda("f", body));
}

// --- type-directed translation ---

struct LockTypeError : std::runtime_error {
  explicit LockTypeError(const std::string& msg) : std::runtime_error(msg) {}
};

struct Translated {
  ml::ExprPtr expr;
  ml::MlTypePtr type;
};

namespace detail {

class Translator {
 public:
  explicit Translator(const std::map<std::string, ml::MlTypePtr>& env) {
    for (const auto& [name, ty] : env) scopes_[name].push_back(ty);
  }

  Translated infer(const ml::ExprPtr& e) {
    using namespace ml;
    return std::visit(
        overloaded{
            [&](const Var& v) -> Translated {
              if (v.name == kTicketNew) {
                return {clhNewTerm(), tArrow(tUnit(), tLock())};
              }
              if (v.name == kTicketSync) {
                throw LockTypeError("ticketsync must be applied to a lock and a thunk");
              }
              auto it = scopes_.find(v.name);
              if (it == scopes_.end() || it->second.empty()) {
                throw LockTypeError("unbound variable: " + v.name);
              }
              return {mkVar(v.name), it->second.back()};
            },
            [&](const IntLit& n) -> Translated { return {mkInt(n.value), tInt()}; },
            [&](const BoolLit& n) -> Translated { return {mkBool(n.value), tBool()}; },
            [&](const UnitLit&) -> Translated { return {mkUnit(), tUnit()}; },
            [&](const App& a) -> Translated {
              // ticketsync e_l e  ~>  CLHsync e_l' e'
              if (const auto* inner = std::get_if<App>(&a.fn->node)) {
                if (const auto* head = std::get_if<Var>(&inner->fn->node);
                    head && head->name == kTicketSync) {
                  Translated lockArg = infer(inner->arg);
                  if (!mlTypeEqual(lockArg.type, tLock())) {
                    throw LockTypeError("ticketsync expects a Lock, got " +
                                        printMlType(lockArg.type));
                  }
                  Translated thunk = inferThunk(a.arg);
                  const auto& arrow = std::get<TArrow>(thunk.type->node);
                  return {mkApp(mkApp(clhSyncTerm(), lockArg.expr), thunk.expr), arrow.result};
                }
              }
              if (const auto* head = std::get_if<Var>(&a.fn->node);
                  head && head->name == kTicketSync) {
                throw LockTypeError("ticketsync must be applied to a lock and a thunk");
              }
              // let-style rule for an unannotated lambda in function position
              if (const auto* lam = std::get_if<Lambda>(&a.fn->node); lam && !lam->ann) {
                Translated arg = infer(a.arg);
                bindName(lam->param, arg.type);
                Translated body = infer(lam->body);
                unbind(lam->param);
                return {mkApp(mkLambda(lam->param, body.expr), arg.expr), body.type};
              }
              Translated fn = infer(a.fn);
              const auto* arrow = std::get_if<TArrow>(&fn.type->node);
              if (!arrow) {
                throw LockTypeError("applied a non-function of type " + printMlType(fn.type));
              }
              ml::ExprPtr arg = check(a.arg, arrow->arg);
              return {mkApp(fn.expr, arg), arrow->result};
            },
            [&](const Lambda& l) -> Translated {
              if (!l.ann) {
                throw LockTypeError("cannot infer parameter type of fun " + l.param);
              }
              bindName(l.param, l.ann);
              Translated body = infer(l.body);
              unbind(l.param);
              return {mkLambda(l.param, body.expr, l.ann), tArrow(l.ann, body.type)};
            },
            [&](const RecFun& r) -> Translated {
              if (!r.paramAnn || !r.retAnn) {
                throw LockTypeError("rec " + r.fname + " needs parameter and result annotations");
              }
              auto fnTy = tArrow(r.paramAnn, r.retAnn);
              bindName(r.fname, fnTy);
              bindName(r.param, r.paramAnn);
              ml::ExprPtr body = check(r.body, r.retAnn);
              unbind(r.param);
              unbind(r.fname);
              return {mkRecFun(r.fname, r.param, body, r.paramAnn, r.retAnn), fnTy};
            },
            [&](const PairE& p) -> Translated {
              Translated a = infer(p.first);
              Translated b = infer(p.second);
              return {mkPair(a.expr, b.expr), tProd(a.type, b.type)};
            },
            [&](const Fst& f) -> Translated {
              Translated p = infer(f.arg);
              const auto* prod = std::get_if<TProd>(&p.type->node);
              if (!prod) throw LockTypeError("fst of non-pair type " + printMlType(p.type));
              return {mkFst(p.expr), prod->first};
            },
            [&](const Snd& s) -> Translated {
              Translated p = infer(s.arg);
              const auto* prod = std::get_if<TProd>(&p.type->node);
              if (!prod) throw LockTypeError("snd of non-pair type " + printMlType(p.type));
              return {mkSnd(p.expr), prod->second};
            },
            [&](const LetPair& lp) -> Translated {
              Translated bound = infer(lp.bound);
              const auto* prod = std::get_if<TProd>(&bound.type->node);
              if (!prod) {
                throw LockTypeError("let (x, y) of non-pair type " + printMlType(bound.type));
              }
              bindName(lp.firstName, prod->first);
              bindName(lp.secondName, prod->second);
              Translated body = infer(lp.body);
              unbind(lp.secondName);
              unbind(lp.firstName);
              return {mkLetPair(lp.firstName, lp.secondName, bound.expr, body.expr), body.type};
            },
            [&](const Let& l) -> Translated {
              ml::ExprPtr bound;
              ml::MlTypePtr boundTy;
              if (l.ann) {
                bound = check(l.bound, l.ann);
                boundTy = l.ann;
              } else {
                Translated b = infer(l.bound);
                bound = b.expr;
                boundTy = b.type;
              }
              bindName(l.name, boundTy);
              Translated body = infer(l.body);
              unbind(l.name);
              return {mkLet(l.name, bound, body.expr, l.ann), body.type};
            },
            [&](const Seq& s) -> Translated {
              Translated a = infer(s.first);
              Translated b = infer(s.second);
              return {mkSeq(a.expr, b.expr), b.type};
            },
            [&](const If& i) -> Translated {
              ml::ExprPtr cond = check(i.cond, tBool());
              Translated t = infer(i.thenBranch);
              ml::ExprPtr els = check(i.elseBranch, t.type);
              return {mkIf(cond, t.expr, els), t.type};
            },
            [&](const Binop& b) -> Translated {
              ml::ExprPtr l = check(b.lhs, tInt());
              ml::ExprPtr r = check(b.rhs, tInt());
              return {mkBinop(b.op, l, r), b.op == BinOp::Add ? tInt() : tBool()};
            },
            [&](const Inl&) -> Translated {
              throw LockTypeError("inl needs a sum annotation from its context");
            },
            [&](const Inr&) -> Translated {
              throw LockTypeError("inr needs a sum annotation from its context");
            },
            [&](const CaseSum& c) -> Translated {
              Translated scrut = infer(c.scrut);
              const auto* sum = std::get_if<TSum>(&scrut.type->node);
              if (!sum) throw LockTypeError("case of non-sum type " + printMlType(scrut.type));
              bindName(c.leftName, sum->left);
              Translated left = infer(c.leftBody);
              unbind(c.leftName);
              bindName(c.rightName, sum->right);
              ml::ExprPtr right = check(c.rightBody, left.type);
              unbind(c.rightName);
              return {mkCase(scrut.expr, c.leftName, left.expr, c.rightName, right), left.type};
            },
            [&](const Alloc& a) -> Translated {
              Translated v = infer(a.arg);
              return {mkAlloc(v.expr), tRef(v.type)};
            },
            [&](const Load& l) -> Translated {
              Translated r = infer(l.arg);
              const auto* ref = std::get_if<TRef>(&r.type->node);
              if (!ref) throw LockTypeError("load of non-ref type " + printMlType(r.type));
              return {mkLoad(r.expr), ref->elem};
            },
            [&](const Store& s) -> Translated {
              Translated target = infer(s.target);
              const auto* ref = std::get_if<TRef>(&target.type->node);
              if (!ref) throw LockTypeError("store to non-ref type " + printMlType(target.type));
              ml::ExprPtr value = check(s.value, ref->elem);
              return {mkStore(target.expr, value), tUnit()};
            },
            [&](const Fork& f) -> Translated {
              Translated child = infer(f.child);
              return {mkFork(child.expr), tUnit()};
            },
            [&](const auto&) -> Translated {
              throw LockTypeError("construct outside the lock translation grammar");
            },
        },
        e->node);
  }

  ml::ExprPtr check(const ml::ExprPtr& e, const ml::MlTypePtr& ty) {
    using namespace ml;
    if (const auto* lam = std::get_if<Lambda>(&e->node)) {
      const auto* arrow = std::get_if<TArrow>(&ty->node);
      if (!arrow) throw LockTypeError("function against non-arrow type " + printMlType(ty));
      if (lam->ann && !mlTypeEqual(lam->ann, arrow->arg)) {
        throw LockTypeError("annotation " + printMlType(lam->ann) + " conflicts with expected " +
                            printMlType(arrow->arg));
      }
      bindName(lam->param, arrow->arg);
      ml::ExprPtr body = check(lam->body, arrow->result);
      unbind(lam->param);
      return mkLambda(lam->param, body, lam->ann);
    }
    if (const auto* rec = std::get_if<RecFun>(&e->node)) {
      const auto* arrow = std::get_if<TArrow>(&ty->node);
      if (!arrow) throw LockTypeError("function against non-arrow type " + printMlType(ty));
      if (rec->paramAnn && !mlTypeEqual(rec->paramAnn, arrow->arg)) {
        throw LockTypeError("annotation " + printMlType(rec->paramAnn) +
                            " conflicts with expected " + printMlType(arrow->arg));
      }
      if (rec->retAnn && !mlTypeEqual(rec->retAnn, arrow->result)) {
        throw LockTypeError("annotation " + printMlType(rec->retAnn) +
                            " conflicts with expected " + printMlType(arrow->result));
      }
      bindName(rec->fname, ty);
      bindName(rec->param, arrow->arg);
      ml::ExprPtr body = check(rec->body, arrow->result);
      unbind(rec->param);
      unbind(rec->fname);
      return mkRecFun(rec->fname, rec->param, body, rec->paramAnn, rec->retAnn);
    }
    if (const auto* l = std::get_if<Inl>(&e->node)) {
      const auto* sum = std::get_if<TSum>(&ty->node);
      if (!sum) throw LockTypeError("inl against non-sum type " + printMlType(ty));
      return mkInl(check(l->arg, sum->left));
    }
    if (const auto* r = std::get_if<Inr>(&e->node)) {
      const auto* sum = std::get_if<TSum>(&ty->node);
      if (!sum) throw LockTypeError("inr against non-sum type " + printMlType(ty));
      return mkInr(check(r->arg, sum->right));
    }
    if (const auto* p = std::get_if<PairE>(&e->node)) {
      if (const auto* prod = std::get_if<TProd>(&ty->node)) {
        ml::ExprPtr a = check(p->first, prod->first);
        ml::ExprPtr b = check(p->second, prod->second);
        return mkPair(a, b);
      }
    }
    if (const auto* i = std::get_if<If>(&e->node)) {
      ml::ExprPtr cond = check(i->cond, tBool());
      ml::ExprPtr t = check(i->thenBranch, ty);
      ml::ExprPtr els = check(i->elseBranch, ty);
      return mkIf(cond, t, els);
    }
    if (const auto* l = std::get_if<Let>(&e->node)) {
      ml::ExprPtr bound;
      ml::MlTypePtr boundTy;
      if (l->ann) {
        bound = check(l->bound, l->ann);
        boundTy = l->ann;
      } else {
        Translated b = infer(l->bound);
        bound = b.expr;
        boundTy = b.type;
      }
      bindName(l->name, boundTy);
      ml::ExprPtr body = check(l->body, ty);
      unbind(l->name);
      return mkLet(l->name, bound, body, l->ann);
    }
    if (const auto* s = std::get_if<Seq>(&e->node)) {
      Translated a = infer(s->first);
      ml::ExprPtr b = check(s->second, ty);
      return mkSeq(a.expr, b);
    }
    Translated t = infer(e);
    if (!mlTypeEqual(t.type, ty)) {
      throw LockTypeError("expected " + printMlType(ty) + ", got " + printMlType(t.type));
    }
    return t.expr;
  }

 private:
  std::map<std::string, std::vector<ml::MlTypePtr>> scopes_;

  void bindName(const std::string& name, ml::MlTypePtr ty) {
    if (name == kTicketNew || name == kTicketSync) {
      throw LockTypeError("reserved name cannot be rebound: " + name);
    }
    scopes_[name].push_back(std::move(ty));
  }
  void unbind(const std::string& name) { scopes_[name].pop_back(); }

  // Lock-Elim types its second argument at Unit -> t; an unannotated lambda
  // there gets its parameter typed Unit.
  Translated inferThunk(const ml::ExprPtr& e) {
    using namespace ml;
    if (const auto* lam = std::get_if<Lambda>(&e->node); lam && !lam->ann) {
      bindName(lam->param, tUnit());
      Translated body = infer(lam->body);
      unbind(lam->param);
      return {mkLambda(lam->param, body.expr), tArrow(tUnit(), body.type)};
    }
    Translated f = infer(e);
    const auto* arrow = std::get_if<TArrow>(&f.type->node);
    if (!arrow || !mlTypeEqual(arrow->arg, tUnit())) {
      throw LockTypeError("ticketsync expects a Unit -> t thunk, got " + printMlType(f.type));
    }
    return f;
  }
};

}  // namespace detail

// Type-directed ticket-to-CLH translation. Homomorphic except ticketnew and
// ticketsync applications, which splice the CLH terms.
inline Translated translateLocks(const std::map<std::string, ml::MlTypePtr>& env,
                                 const ml::ExprPtr& e) {
  detail::Translator tr(env);
  return tr.infer(e);
}

// Resolves the opaque ticket primitives of a surface program to the actual
// ticket-lock code, yielding the runnable source side of the comparison.
inline ml::ExprPtr resolveTicket(const ml::ExprPtr& e) {
  ml::ExprPtr out = ml::substitute(e, kTicketNew, ticketNewTerm());
  return ml::substitute(out, kTicketSync, ticketSyncTerm());
}

struct LockCheckResult {
  ml::ExprPtr ticketProgram;  // surface program with ticket primitives spliced
  ml::ExprPtr clhProgram;     // translation output
  ml::MlTypePtr type;
  RefinementReport report;
};

// Translates a Bool-typed surface program and checks that the CLH version
// refines the ticket version.
inline LockCheckResult checkLocks(const ml::ExprPtr& program, const ExploreLimits& lim,
                                  unsigned jobs = 1) {
  Translated tr = translateLocks({}, program);
  if (!ml::mlTypeEqual(tr.type, ml::tBool())) {
    throw LockTypeError("lock programs must have type Bool, got " + printMlType(tr.type));
  }
  LockCheckResult result;
  result.ticketProgram = resolveTicket(program);
  result.clhProgram = tr.expr;
  result.type = tr.type;
  result.report = checkRefinementMlMl(result.clhProgram, result.ticketProgram, lim, jobs);
  return result;
}

}  // namespace sessrc::locks
