#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "sessrc/util.hpp"

namespace sessrc::ml {

// --- simple types (annotations and the lock translation judgment) ---

struct MlType;
using MlTypePtr = std::shared_ptr<const MlType>;

struct TInt {};
struct TBool {};
struct TUnit {};
struct TLock {};
struct TProd {
  MlTypePtr first;
  MlTypePtr second;
};
struct TSum {
  MlTypePtr left;
  MlTypePtr right;
};
struct TArrow {
  MlTypePtr arg;
  MlTypePtr result;
};
struct TRef {
  MlTypePtr elem;
};

struct MlType {
  std::variant<TInt, TBool, TUnit, TLock, TProd, TSum, TArrow, TRef> node;
};

inline MlTypePtr tInt() {
  static const MlTypePtr t = std::make_shared<MlType>(MlType{TInt{}});
  return t;
}
inline MlTypePtr tBool() {
  static const MlTypePtr t = std::make_shared<MlType>(MlType{TBool{}});
  return t;
}
inline MlTypePtr tUnit() {
  static const MlTypePtr t = std::make_shared<MlType>(MlType{TUnit{}});
  return t;
}
inline MlTypePtr tLock() {
  static const MlTypePtr t = std::make_shared<MlType>(MlType{TLock{}});
  return t;
}
inline MlTypePtr tProd(MlTypePtr a, MlTypePtr b) {
  return std::make_shared<MlType>(MlType{TProd{std::move(a), std::move(b)}});
}
inline MlTypePtr tSum(MlTypePtr a, MlTypePtr b) {
  return std::make_shared<MlType>(MlType{TSum{std::move(a), std::move(b)}});
}
inline MlTypePtr tArrow(MlTypePtr a, MlTypePtr b) {
  return std::make_shared<MlType>(MlType{TArrow{std::move(a), std::move(b)}});
}
inline MlTypePtr tRef(MlTypePtr t) { return std::make_shared<MlType>(MlType{TRef{std::move(t)}}); }

inline bool mlTypeEqual(const MlTypePtr& a, const MlTypePtr& b) {
  if (a.get() == b.get()) return true;
  return std::visit(
      overloaded{
          [&](const TInt&) { return std::holds_alternative<TInt>(b->node); },
          [&](const TBool&) { return std::holds_alternative<TBool>(b->node); },
          [&](const TUnit&) { return std::holds_alternative<TUnit>(b->node); },
          [&](const TLock&) { return std::holds_alternative<TLock>(b->node); },
          [&](const TProd& l) {
            auto* r = std::get_if<TProd>(&b->node);
            return r && mlTypeEqual(l.first, r->first) && mlTypeEqual(l.second, r->second);
          },
          [&](const TSum& l) {
            auto* r = std::get_if<TSum>(&b->node);
            return r && mlTypeEqual(l.left, r->left) && mlTypeEqual(l.right, r->right);
          },
          [&](const TArrow& l) {
            auto* r = std::get_if<TArrow>(&b->node);
            return r && mlTypeEqual(l.arg, r->arg) && mlTypeEqual(l.result, r->result);
          },
          [&](const TRef& l) {
            auto* r = std::get_if<TRef>(&b->node);
            return r && mlTypeEqual(l.elem, r->elem);
          },
      },
      a->node);
}

inline std::string printMlType(const MlTypePtr& t) {
  auto atom = [](const MlTypePtr& x) {
    std::string s = printMlType(x);
    if (std::holds_alternative<TInt>(x->node) || std::holds_alternative<TBool>(x->node) ||
        std::holds_alternative<TUnit>(x->node) || std::holds_alternative<TLock>(x->node)) {
      return s;
    }
    return "(" + s + ")";
  };
  return std::visit(overloaded{
                        [&](const TInt&) { return std::string("Int"); },
                        [&](const TBool&) { return std::string("Bool"); },
                        [&](const TUnit&) { return std::string("Unit"); },
                        [&](const TLock&) { return std::string("Lock"); },
                        [&](const TProd& p) { return atom(p.first) + " * " + atom(p.second); },
                        [&](const TSum& p) { return atom(p.left) + " + " + atom(p.right); },
                        [&](const TArrow& p) { return atom(p.arg) + " -> " + printMlType(p.result); },
                        [&](const TRef& p) { return "ref " + atom(p.elem); },
                    },
                    t->node);
}

// --- expressions ---

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;
using LocId = std::uint32_t;

enum class BinOp { Add, Eq };

struct Var {
  std::string name;
};
struct IntLit {
  std::int64_t value;
};
struct BoolLit {
  bool value;
};
struct UnitLit {};
// Runtime-only heap location.
struct Loc {
  LocId loc;
};
struct Lambda {
  std::string param;
  MlTypePtr ann;  // null when unannotated
  ExprPtr body;
};
struct RecFun {
  std::string fname;
  std::string param;
  MlTypePtr paramAnn;  // null when unannotated
  MlTypePtr retAnn;    // null when unannotated
  ExprPtr body;
};
struct App {
  ExprPtr fn;
  ExprPtr arg;
};
struct PairE {
  ExprPtr first;
  ExprPtr second;
};
struct Fst {
  ExprPtr arg;
};
struct Snd {
  ExprPtr arg;
};
struct LetPair {
  std::string firstName;
  std::string secondName;
  ExprPtr bound;
  ExprPtr body;
};
struct Let {
  std::string name;
  MlTypePtr ann;  // null when unannotated
  ExprPtr bound;
  ExprPtr body;
};
struct Seq {
  ExprPtr first;
  ExprPtr second;
};
struct If {
  ExprPtr cond;
  ExprPtr thenBranch;
  ExprPtr elseBranch;
};
struct Binop {
  BinOp op;
  ExprPtr lhs;
  ExprPtr rhs;
};
struct Inl {
  ExprPtr arg;
};
struct Inr {
  ExprPtr arg;
};
struct CaseSum {
  ExprPtr scrut;
  std::string leftName;
  ExprPtr leftBody;
  std::string rightName;
  ExprPtr rightBody;
};
struct NoneLit {};
struct SomeE {
  ExprPtr arg;
};
struct MatchOpt {
  ExprPtr scrut;
  ExprPtr noneBody;
  std::string someName;
  ExprPtr someBody;
};
struct Alloc {
  ExprPtr arg;
};
struct Load {
  ExprPtr arg;
};
struct Store {
  ExprPtr target;
  ExprPtr value;
};
struct Fai {
  ExprPtr arg;
};
struct Swap {
  ExprPtr target;
  ExprPtr value;
};
struct Fork {
  ExprPtr child;
};

struct Expr {
  std::variant<Var, IntLit, BoolLit, UnitLit, Loc, Lambda, RecFun, App, PairE, Fst, Snd, LetPair,
               Let, Seq, If, Binop, Inl, Inr, CaseSum, NoneLit, SomeE, MatchOpt, Alloc, Load,
               Store, Fai, Swap, Fork>
      node;
};

inline ExprPtr mkVar(std::string n) { return std::make_shared<Expr>(Expr{Var{std::move(n)}}); }
inline ExprPtr mkInt(std::int64_t v) { return std::make_shared<Expr>(Expr{IntLit{v}}); }
inline ExprPtr mkBool(bool v) { return std::make_shared<Expr>(Expr{BoolLit{v}}); }
inline ExprPtr mkUnit() {
  static const ExprPtr u = std::make_shared<Expr>(Expr{UnitLit{}});
  return u;
}
inline ExprPtr mkLoc(LocId l) { return std::make_shared<Expr>(Expr{Loc{l}}); }
inline ExprPtr mkLambda(std::string p, ExprPtr body, MlTypePtr ann = nullptr) {
  return std::make_shared<Expr>(Expr{Lambda{std::move(p), std::move(ann), std::move(body)}});
}
inline ExprPtr mkRecFun(std::string f, std::string p, ExprPtr body, MlTypePtr paramAnn = nullptr,
                        MlTypePtr retAnn = nullptr) {
  return std::make_shared<Expr>(
      Expr{RecFun{std::move(f), std::move(p), std::move(paramAnn), std::move(retAnn), std::move(body)}});
}
inline ExprPtr mkApp(ExprPtr f, ExprPtr a) {
  return std::make_shared<Expr>(Expr{App{std::move(f), std::move(a)}});
}
inline ExprPtr mkPair(ExprPtr a, ExprPtr b) {
  return std::make_shared<Expr>(Expr{PairE{std::move(a), std::move(b)}});
}
inline ExprPtr mkFst(ExprPtr e) { return std::make_shared<Expr>(Expr{Fst{std::move(e)}}); }
inline ExprPtr mkSnd(ExprPtr e) { return std::make_shared<Expr>(Expr{Snd{std::move(e)}}); }
inline ExprPtr mkLetPair(std::string x, std::string y, ExprPtr bound, ExprPtr body) {
  return std::make_shared<Expr>(
      Expr{LetPair{std::move(x), std::move(y), std::move(bound), std::move(body)}});
}
inline ExprPtr mkLet(std::string x, ExprPtr bound, ExprPtr body, MlTypePtr ann = nullptr) {
  return std::make_shared<Expr>(
      Expr{Let{std::move(x), std::move(ann), std::move(bound), std::move(body)}});
}
inline ExprPtr mkSeq(ExprPtr a, ExprPtr b) {
  return std::make_shared<Expr>(Expr{Seq{std::move(a), std::move(b)}});
}
inline ExprPtr mkIf(ExprPtr c, ExprPtr t, ExprPtr e) {
  return std::make_shared<Expr>(Expr{If{std::move(c), std::move(t), std::move(e)}});
}
inline ExprPtr mkBinop(BinOp op, ExprPtr l, ExprPtr r) {
  return std::make_shared<Expr>(Expr{Binop{op, std::move(l), std::move(r)}});
}
inline ExprPtr mkInl(ExprPtr e) { return std::make_shared<Expr>(Expr{Inl{std::move(e)}}); }
inline ExprPtr mkInr(ExprPtr e) { return std::make_shared<Expr>(Expr{Inr{std::move(e)}}); }
inline ExprPtr mkCase(ExprPtr scrut, std::string xl, ExprPtr el, std::string xr, ExprPtr er) {
  return std::make_shared<Expr>(Expr{
      CaseSum{std::move(scrut), std::move(xl), std::move(el), std::move(xr), std::move(er)}});
}
inline ExprPtr mkNone() {
  static const ExprPtr n = std::make_shared<Expr>(Expr{NoneLit{}});
  return n;
}
inline ExprPtr mkSome(ExprPtr e) { return std::make_shared<Expr>(Expr{SomeE{std::move(e)}}); }
inline ExprPtr mkMatchOpt(ExprPtr scrut, ExprPtr noneBody, std::string x, ExprPtr someBody) {
  return std::make_shared<Expr>(
      Expr{MatchOpt{std::move(scrut), std::move(noneBody), std::move(x), std::move(someBody)}});
}
inline ExprPtr mkAlloc(ExprPtr e) { return std::make_shared<Expr>(Expr{Alloc{std::move(e)}}); }
inline ExprPtr mkLoad(ExprPtr e) { return std::make_shared<Expr>(Expr{Load{std::move(e)}}); }
inline ExprPtr mkStore(ExprPtr t, ExprPtr v) {
  return std::make_shared<Expr>(Expr{Store{std::move(t), std::move(v)}});
}
inline ExprPtr mkFai(ExprPtr e) { return std::make_shared<Expr>(Expr{Fai{std::move(e)}}); }
inline ExprPtr mkSwap(ExprPtr t, ExprPtr v) {
  return std::make_shared<Expr>(Expr{Swap{std::move(t), std::move(v)}});
}
inline ExprPtr mkFork(ExprPtr c) { return std::make_shared<Expr>(Expr{Fork{std::move(c)}}); }

inline bool isValue(const ExprPtr& e) {
  return std::visit(overloaded{
                        [](const IntLit&) { return true; },
                        [](const BoolLit&) { return true; },
                        [](const UnitLit&) { return true; },
                        [](const Loc&) { return true; },
                        [](const Lambda&) { return true; },
                        [](const RecFun&) { return true; },
                        [](const NoneLit&) { return true; },
                        [](const PairE& p) { return isValue(p.first) && isValue(p.second); },
                        [](const SomeE& s) { return isValue(s.arg); },
                        [](const Inl& s) { return isValue(s.arg); },
                        [](const Inr& s) { return isValue(s.arg); },
                        [](const auto&) { return false; },
                    },
                    e->node);
}

// Applies fn to every direct child; binder-aware traversal is done by the
// specific algorithms below.
template <class Fn>
void forEachChild(const ExprPtr& e, Fn&& fn) {
  std::visit(overloaded{
                 [&](const Lambda& n) { fn(n.body); },
                 [&](const RecFun& n) { fn(n.body); },
                 [&](const App& n) {
                   fn(n.fn);
                   fn(n.arg);
                 },
                 [&](const PairE& n) {
                   fn(n.first);
                   fn(n.second);
                 },
                 [&](const Fst& n) { fn(n.arg); },
                 [&](const Snd& n) { fn(n.arg); },
                 [&](const LetPair& n) {
                   fn(n.bound);
                   fn(n.body);
                 },
                 [&](const Let& n) {
                   fn(n.bound);
                   fn(n.body);
                 },
                 [&](const Seq& n) {
                   fn(n.first);
                   fn(n.second);
                 },
                 [&](const If& n) {
                   fn(n.cond);
                   fn(n.thenBranch);
                   fn(n.elseBranch);
                 },
                 [&](const Binop& n) {
                   fn(n.lhs);
                   fn(n.rhs);
                 },
                 [&](const Inl& n) { fn(n.arg); },
                 [&](const Inr& n) { fn(n.arg); },
                 [&](const CaseSum& n) {
                   fn(n.scrut);
                   fn(n.leftBody);
                   fn(n.rightBody);
                 },
                 [&](const SomeE& n) { fn(n.arg); },
                 [&](const MatchOpt& n) {
                   fn(n.scrut);
                   fn(n.noneBody);
                   fn(n.someBody);
                 },
                 [&](const Alloc& n) { fn(n.arg); },
                 [&](const Load& n) { fn(n.arg); },
                 [&](const Store& n) {
                   fn(n.target);
                   fn(n.value);
                 },
                 [&](const Fai& n) { fn(n.arg); },
                 [&](const Swap& n) {
                   fn(n.target);
                   fn(n.value);
                 },
                 [&](const Fork& n) { fn(n.child); },
                 [&](const auto&) {},
             },
             e->node);
}

inline void collectFreeVars(const ExprPtr& e, std::set<std::string>& bound,
                            std::set<std::string>& out) {
  std::visit(
      overloaded{
          [&](const Var& v) {
            if (!bound.count(v.name)) out.insert(v.name);
          },
          [&](const Lambda& l) {
            bool ins = bound.insert(l.param).second;
            collectFreeVars(l.body, bound, out);
            if (ins) bound.erase(l.param);
          },
          [&](const RecFun& r) {
            bool insF = bound.insert(r.fname).second;
            bool insX = bound.insert(r.param).second;
            collectFreeVars(r.body, bound, out);
            if (insX) bound.erase(r.param);
            if (insF) bound.erase(r.fname);
          },
          [&](const LetPair& lp) {
            collectFreeVars(lp.bound, bound, out);
            bool i1 = bound.insert(lp.firstName).second;
            bool i2 = bound.insert(lp.secondName).second;
            collectFreeVars(lp.body, bound, out);
            if (i1) bound.erase(lp.firstName);
            if (i2) bound.erase(lp.secondName);
          },
          [&](const Let& l) {
            collectFreeVars(l.bound, bound, out);
            bool ins = bound.insert(l.name).second;
            collectFreeVars(l.body, bound, out);
            if (ins) bound.erase(l.name);
          },
          [&](const CaseSum& c) {
            collectFreeVars(c.scrut, bound, out);
            bool insL = bound.insert(c.leftName).second;
            collectFreeVars(c.leftBody, bound, out);
            if (insL) bound.erase(c.leftName);
            bool insR = bound.insert(c.rightName).second;
            collectFreeVars(c.rightBody, bound, out);
            if (insR) bound.erase(c.rightName);
          },
          [&](const MatchOpt& m) {
            collectFreeVars(m.scrut, bound, out);
            collectFreeVars(m.noneBody, bound, out);
            bool ins = bound.insert(m.someName).second;
            collectFreeVars(m.someBody, bound, out);
            if (ins) bound.erase(m.someName);
          },
          [&](const auto&) { forEachChild(e, [&](const ExprPtr& c) { collectFreeVars(c, bound, out); }); },
      },
      e->node);
}

inline std::set<std::string> freeVars(const ExprPtr& e) {
  std::set<std::string> bound, out;
  collectFreeVars(e, bound, out);
  return out;
}

namespace detail {

inline ExprPtr substituteIn(const ExprPtr& e, const std::string& name, const ExprPtr& value,
                            const std::set<std::string>& fvValue);

inline std::pair<std::string, ExprPtr> avoidCapture(const std::string& p, const ExprPtr& body,
                                                    const std::set<std::string>& fvValue) {
  if (!fvValue.count(p)) return {p, body};
  std::string p2 = freshName(p);
  ExprPtr renamed = substituteIn(body, p, mkVar(p2), std::set<std::string>{p2});
  return {p2, renamed};
}

inline ExprPtr substituteIn(const ExprPtr& e, const std::string& name, const ExprPtr& value,
                            const std::set<std::string>& fvValue) {
  auto sub = [&](const ExprPtr& c) { return substituteIn(c, name, value, fvValue); };
  return std::visit(
      overloaded{
          [&](const Var& v) { return v.name == name ? value : e; },
          [&](const IntLit&) { return e; },
          [&](const BoolLit&) { return e; },
          [&](const UnitLit&) { return e; },
          [&](const Loc&) { return e; },
          [&](const NoneLit&) { return e; },
          [&](const Lambda& l) {
            if (l.param == name || !freeVars(l.body).count(name)) return e;
            auto [p, body] = avoidCapture(l.param, l.body, fvValue);
            return mkLambda(p, substituteIn(body, name, value, fvValue), l.ann);
          },
          [&](const RecFun& r) {
            if (r.fname == name || r.param == name || !freeVars(r.body).count(name)) return e;
            auto [f, body1] = avoidCapture(r.fname, r.body, fvValue);
            auto [x, body2] = avoidCapture(r.param, body1, fvValue);
            return mkRecFun(f, x, substituteIn(body2, name, value, fvValue), r.paramAnn, r.retAnn);
          },
          [&](const App& a) { return mkApp(sub(a.fn), sub(a.arg)); },
          [&](const PairE& p) { return mkPair(sub(p.first), sub(p.second)); },
          [&](const Fst& f) { return mkFst(sub(f.arg)); },
          [&](const Snd& s) { return mkSnd(sub(s.arg)); },
          [&](const LetPair& lp) {
            ExprPtr bound = sub(lp.bound);
            if (lp.firstName == name || lp.secondName == name ||
                !freeVars(lp.body).count(name)) {
              return mkLetPair(lp.firstName, lp.secondName, bound, lp.body);
            }
            auto [x, body1] = avoidCapture(lp.firstName, lp.body, fvValue);
            auto [y, body2] = avoidCapture(lp.secondName, body1, fvValue);
            return mkLetPair(x, y, bound, substituteIn(body2, name, value, fvValue));
          },
          [&](const Let& l) {
            ExprPtr bound = sub(l.bound);
            if (l.name == name || !freeVars(l.body).count(name)) {
              return mkLet(l.name, bound, l.body, l.ann);
            }
            auto [x, body] = avoidCapture(l.name, l.body, fvValue);
            return mkLet(x, bound, substituteIn(body, name, value, fvValue), l.ann);
          },
          [&](const Seq& s) { return mkSeq(sub(s.first), sub(s.second)); },
          [&](const If& i) { return mkIf(sub(i.cond), sub(i.thenBranch), sub(i.elseBranch)); },
          [&](const Binop& b) { return mkBinop(b.op, sub(b.lhs), sub(b.rhs)); },
          [&](const Inl& s) { return mkInl(sub(s.arg)); },
          [&](const Inr& s) { return mkInr(sub(s.arg)); },
          [&](const CaseSum& c) {
            ExprPtr scrut = sub(c.scrut);
            ExprPtr leftBody = c.leftBody;
            std::string leftName = c.leftName;
            if (c.leftName != name && freeVars(c.leftBody).count(name)) {
              auto [x, body] = avoidCapture(c.leftName, c.leftBody, fvValue);
              leftName = x;
              leftBody = substituteIn(body, name, value, fvValue);
            }
            ExprPtr rightBody = c.rightBody;
            std::string rightName = c.rightName;
            if (c.rightName != name && freeVars(c.rightBody).count(name)) {
              auto [x, body] = avoidCapture(c.rightName, c.rightBody, fvValue);
              rightName = x;
              rightBody = substituteIn(body, name, value, fvValue);
            }
            return mkCase(scrut, leftName, leftBody, rightName, rightBody);
          },
          [&](const SomeE& s) { return mkSome(sub(s.arg)); },
          [&](const MatchOpt& m) {
            ExprPtr scrut = sub(m.scrut);
            ExprPtr noneBody = sub(m.noneBody);
            if (m.someName == name || !freeVars(m.someBody).count(name)) {
              return mkMatchOpt(scrut, noneBody, m.someName, m.someBody);
            }
            auto [x, body] = avoidCapture(m.someName, m.someBody, fvValue);
            return mkMatchOpt(scrut, noneBody, x, substituteIn(body, name, value, fvValue));
          },
          [&](const Alloc& a) { return mkAlloc(sub(a.arg)); },
          [&](const Load& l) { return mkLoad(sub(l.arg)); },
          [&](const Store& s) { return mkStore(sub(s.target), sub(s.value)); },
          [&](const Fai& f) { return mkFai(sub(f.arg)); },
          [&](const Swap& s) { return mkSwap(sub(s.target), sub(s.value)); },
          [&](const Fork& f) { return mkFork(sub(f.child)); },
      },
      e->node);
}

}  // namespace detail

inline ExprPtr substitute(const ExprPtr& e, const std::string& name, const ExprPtr& value) {
  return detail::substituteIn(e, name, value, freeVars(value));
}

bool equal(const ExprPtr& a, const ExprPtr& b);

namespace detail {

inline bool annEqual(const MlTypePtr& a, const MlTypePtr& b) {
  if (!a != !b) return false;
  return !a || mlTypeEqual(a, b);
}

}  // namespace detail

inline bool equal(const ExprPtr& a, const ExprPtr& b) {
  if (a.get() == b.get()) return true;
  if (a->node.index() != b->node.index()) return false;
  return std::visit(
      overloaded{
          [&](const Var& l) { return l.name == std::get<Var>(b->node).name; },
          [&](const IntLit& l) { return l.value == std::get<IntLit>(b->node).value; },
          [&](const BoolLit& l) { return l.value == std::get<BoolLit>(b->node).value; },
          [&](const UnitLit&) { return true; },
          [&](const Loc& l) { return l.loc == std::get<Loc>(b->node).loc; },
          [&](const Lambda& l) {
            const auto& r = std::get<Lambda>(b->node);
            return l.param == r.param && detail::annEqual(l.ann, r.ann) && equal(l.body, r.body);
          },
          [&](const RecFun& l) {
            const auto& r = std::get<RecFun>(b->node);
            return l.fname == r.fname && l.param == r.param &&
                   detail::annEqual(l.paramAnn, r.paramAnn) && detail::annEqual(l.retAnn, r.retAnn) &&
                   equal(l.body, r.body);
          },
          [&](const App& l) {
            const auto& r = std::get<App>(b->node);
            return equal(l.fn, r.fn) && equal(l.arg, r.arg);
          },
          [&](const PairE& l) {
            const auto& r = std::get<PairE>(b->node);
            return equal(l.first, r.first) && equal(l.second, r.second);
          },
          [&](const Fst& l) { return equal(l.arg, std::get<Fst>(b->node).arg); },
          [&](const Snd& l) { return equal(l.arg, std::get<Snd>(b->node).arg); },
          [&](const LetPair& l) {
            const auto& r = std::get<LetPair>(b->node);
            return l.firstName == r.firstName && l.secondName == r.secondName &&
                   equal(l.bound, r.bound) && equal(l.body, r.body);
          },
          [&](const Let& l) {
            const auto& r = std::get<Let>(b->node);
            return l.name == r.name && detail::annEqual(l.ann, r.ann) && equal(l.bound, r.bound) &&
                   equal(l.body, r.body);
          },
          [&](const Seq& l) {
            const auto& r = std::get<Seq>(b->node);
            return equal(l.first, r.first) && equal(l.second, r.second);
          },
          [&](const If& l) {
            const auto& r = std::get<If>(b->node);
            return equal(l.cond, r.cond) && equal(l.thenBranch, r.thenBranch) &&
                   equal(l.elseBranch, r.elseBranch);
          },
          [&](const Binop& l) {
            const auto& r = std::get<Binop>(b->node);
            return l.op == r.op && equal(l.lhs, r.lhs) && equal(l.rhs, r.rhs);
          },
          [&](const Inl& l) { return equal(l.arg, std::get<Inl>(b->node).arg); },
          [&](const Inr& l) { return equal(l.arg, std::get<Inr>(b->node).arg); },
          [&](const CaseSum& l) {
            const auto& r = std::get<CaseSum>(b->node);
            return l.leftName == r.leftName && l.rightName == r.rightName &&
                   equal(l.scrut, r.scrut) && equal(l.leftBody, r.leftBody) &&
                   equal(l.rightBody, r.rightBody);
          },
          [&](const NoneLit&) { return true; },
          [&](const SomeE& l) { return equal(l.arg, std::get<SomeE>(b->node).arg); },
          [&](const MatchOpt& l) {
            const auto& r = std::get<MatchOpt>(b->node);
            return l.someName == r.someName && equal(l.scrut, r.scrut) &&
                   equal(l.noneBody, r.noneBody) && equal(l.someBody, r.someBody);
          },
          [&](const Alloc& l) { return equal(l.arg, std::get<Alloc>(b->node).arg); },
          [&](const Load& l) { return equal(l.arg, std::get<Load>(b->node).arg); },
          [&](const Store& l) {
            const auto& r = std::get<Store>(b->node);
            return equal(l.target, r.target) && equal(l.value, r.value);
          },
          [&](const Fai& l) { return equal(l.arg, std::get<Fai>(b->node).arg); },
          [&](const Swap& l) {
            const auto& r = std::get<Swap>(b->node);
            return equal(l.target, r.target) && equal(l.value, r.value);
          },
          [&](const Fork& l) { return equal(l.child, std::get<Fork>(b->node).child); },
      },
      a->node);
}

// --- machine state ---

using Heap = std::map<LocId, ExprPtr>;

struct Config {
  std::vector<ExprPtr> threads;
  Heap heap;
};

inline LocId minFreeLoc(const Heap& h) {
  LocId l = 0;
  for (const auto& [id, _] : h) {
    if (id != l) break;
    ++l;
  }
  return l;
}

struct StepOutcome {
  ExprPtr next;
  Heap heap;
  ExprPtr forked;  // null unless the redex was a fork
};

namespace detail {

struct RedexResult {
  ExprPtr next;
  Heap heap;
  ExprPtr forked;
};

inline std::optional<RedexResult> reduceRedex(const ExprPtr& e, const Heap& h) {
  return std::visit(
      overloaded{
          [&](const App& a) -> std::optional<RedexResult> {
            if (const auto* lam = std::get_if<Lambda>(&a.fn->node)) {
              return RedexResult{substitute(lam->body, lam->param, a.arg), h, nullptr};
            }
            if (const auto* rec = std::get_if<RecFun>(&a.fn->node)) {
              ExprPtr body = substitute(rec->body, rec->param, a.arg);
              body = substitute(body, rec->fname, a.fn);
              return RedexResult{body, h, nullptr};
            }
            return std::nullopt;
          },
          [&](const LetPair& lp) -> std::optional<RedexResult> {
            if (const auto* pr = std::get_if<PairE>(&lp.bound->node)) {
              ExprPtr body = substitute(lp.body, lp.firstName, pr->first);
              if (lp.secondName != lp.firstName) {
                body = substitute(body, lp.secondName, pr->second);
              }
              return RedexResult{body, h, nullptr};
            }
            return std::nullopt;
          },
          [&](const Let& l) -> std::optional<RedexResult> {
            return RedexResult{substitute(l.body, l.name, l.bound), h, nullptr};
          },
          [&](const Seq& s) -> std::optional<RedexResult> {
            return RedexResult{s.second, h, nullptr};
          },
          [&](const If& i) -> std::optional<RedexResult> {
            if (const auto* b = std::get_if<BoolLit>(&i.cond->node)) {
              return RedexResult{b->value ? i.thenBranch : i.elseBranch, h, nullptr};
            }
            return std::nullopt;
          },
          [&](const Binop& b) -> std::optional<RedexResult> {
            const auto* l = std::get_if<IntLit>(&b.lhs->node);
            const auto* r = std::get_if<IntLit>(&b.rhs->node);
            if (!l || !r) return std::nullopt;  // + and == are defined on ints only
            if (b.op == BinOp::Add) return RedexResult{mkInt(l->value + r->value), h, nullptr};
            return RedexResult{mkBool(l->value == r->value), h, nullptr};
          },
          [&](const Fst& f) -> std::optional<RedexResult> {
            if (const auto* pr = std::get_if<PairE>(&f.arg->node)) {
              return RedexResult{pr->first, h, nullptr};
            }
            return std::nullopt;
          },
          [&](const Snd& s) -> std::optional<RedexResult> {
            if (const auto* pr = std::get_if<PairE>(&s.arg->node)) {
              return RedexResult{pr->second, h, nullptr};
            }
            return std::nullopt;
          },
          [&](const CaseSum& c) -> std::optional<RedexResult> {
            if (const auto* l = std::get_if<Inl>(&c.scrut->node)) {
              return RedexResult{substitute(c.leftBody, c.leftName, l->arg), h, nullptr};
            }
            if (const auto* r = std::get_if<Inr>(&c.scrut->node)) {
              return RedexResult{substitute(c.rightBody, c.rightName, r->arg), h, nullptr};
            }
            return std::nullopt;
          },
          [&](const MatchOpt& m) -> std::optional<RedexResult> {
            if (std::holds_alternative<NoneLit>(m.scrut->node)) {
              return RedexResult{m.noneBody, h, nullptr};
            }
            if (const auto* s = std::get_if<SomeE>(&m.scrut->node)) {
              return RedexResult{substitute(m.someBody, m.someName, s->arg), h, nullptr};
            }
            return std::nullopt;
          },
          [&](const Alloc& a) -> std::optional<RedexResult> {
            LocId l = minFreeLoc(h);
            Heap h2 = h;
            h2.emplace(l, a.arg);
            return RedexResult{mkLoc(l), std::move(h2), nullptr};
          },
          [&](const Load& l) -> std::optional<RedexResult> {
            const auto* loc = std::get_if<Loc>(&l.arg->node);
            if (!loc) return std::nullopt;
            auto it = h.find(loc->loc);
            if (it == h.end()) return std::nullopt;
            return RedexResult{it->second, h, nullptr};
          },
          [&](const Store& s) -> std::optional<RedexResult> {
            const auto* loc = std::get_if<Loc>(&s.target->node);
            if (!loc || !h.count(loc->loc)) return std::nullopt;
            Heap h2 = h;
            h2[loc->loc] = s.value;
            return RedexResult{mkUnit(), std::move(h2), nullptr};
          },
          [&](const Fai& f) -> std::optional<RedexResult> {
            const auto* loc = std::get_if<Loc>(&f.arg->node);
            if (!loc) return std::nullopt;
            auto it = h.find(loc->loc);
            if (it == h.end()) return std::nullopt;
            const auto* old = std::get_if<IntLit>(&it->second->node);
            if (!old) return std::nullopt;
            Heap h2 = h;
            h2[loc->loc] = mkInt(old->value + 1);
            return RedexResult{mkInt(old->value), std::move(h2), nullptr};
          },
          [&](const Swap& s) -> std::optional<RedexResult> {
            const auto* loc = std::get_if<Loc>(&s.target->node);
            if (!loc) return std::nullopt;
            auto it = h.find(loc->loc);
            if (it == h.end()) return std::nullopt;
            ExprPtr old = it->second;
            Heap h2 = h;
            h2[loc->loc] = s.value;
            return RedexResult{old, std::move(h2), nullptr};
          },
          [&](const Fork& f) -> std::optional<RedexResult> {
            return RedexResult{mkUnit(), h, f.child};
          },
          [&](const auto&) -> std::optional<RedexResult> { return std::nullopt; },
      },
      e->node);
}

// Returns the evaluation-position child of a non-value e, or null when e
// itself is the redex. Evaluation is call-by-value, left to right.
inline const ExprPtr* evalChild(const ExprPtr& e) {
  const ExprPtr* next = nullptr;
  auto pick = [&](const ExprPtr& c) {
    if (!next && !isValue(c)) next = &c;
  };
  std::visit(overloaded{
                 [&](const App& n) {
                   pick(n.fn);
                   pick(n.arg);
                 },
                 [&](const PairE& n) {
                   pick(n.first);
                   pick(n.second);
                 },
                 [&](const Fst& n) { pick(n.arg); },
                 [&](const Snd& n) { pick(n.arg); },
                 [&](const LetPair& n) { pick(n.bound); },
                 [&](const Let& n) { pick(n.bound); },
                 [&](const Seq& n) { pick(n.first); },
                 [&](const If& n) { pick(n.cond); },
                 [&](const Binop& n) {
                   pick(n.lhs);
                   pick(n.rhs);
                 },
                 [&](const Inl& n) { pick(n.arg); },
                 [&](const Inr& n) { pick(n.arg); },
                 [&](const CaseSum& n) { pick(n.scrut); },
                 [&](const SomeE& n) { pick(n.arg); },
                 [&](const MatchOpt& n) { pick(n.scrut); },
                 [&](const Alloc& n) { pick(n.arg); },
                 [&](const Load& n) { pick(n.arg); },
                 [&](const Store& n) {
                   pick(n.target);
                   pick(n.value);
                 },
                 [&](const Fai& n) { pick(n.arg); },
                 [&](const Swap& n) {
                   pick(n.target);
                   pick(n.value);
                 },
                 [&](const auto&) {},  // Fork and leaves are redexes themselves
             },
             e->node);
  return next;
}

inline ExprPtr replaceChild(const ExprPtr& e, const ExprPtr* slot, const ExprPtr& repl) {
  auto r = [&](const ExprPtr& c) { return &c == slot ? repl : c; };
  return std::visit(
      overloaded{
          [&](const App& n) { return mkApp(r(n.fn), r(n.arg)); },
          [&](const PairE& n) { return mkPair(r(n.first), r(n.second)); },
          [&](const Fst& n) { return mkFst(r(n.arg)); },
          [&](const Snd& n) { return mkSnd(r(n.arg)); },
          [&](const LetPair& n) {
            return mkLetPair(n.firstName, n.secondName, r(n.bound), n.body);
          },
          [&](const Let& n) { return mkLet(n.name, r(n.bound), n.body, n.ann); },
          [&](const Seq& n) { return mkSeq(r(n.first), n.second); },
          [&](const If& n) { return mkIf(r(n.cond), n.thenBranch, n.elseBranch); },
          [&](const Binop& n) { return mkBinop(n.op, r(n.lhs), r(n.rhs)); },
          [&](const Inl& n) { return mkInl(r(n.arg)); },
          [&](const Inr& n) { return mkInr(r(n.arg)); },
          [&](const CaseSum& n) {
            return mkCase(r(n.scrut), n.leftName, n.leftBody, n.rightName, n.rightBody);
          },
          [&](const SomeE& n) { return mkSome(r(n.arg)); },
          [&](const MatchOpt& n) { return mkMatchOpt(r(n.scrut), n.noneBody, n.someName, n.someBody); },
          [&](const Alloc& n) { return mkAlloc(r(n.arg)); },
          [&](const Load& n) { return mkLoad(r(n.arg)); },
          [&](const Store& n) { return mkStore(r(n.target), r(n.value)); },
          [&](const Fai& n) { return mkFai(r(n.arg)); },
          [&](const Swap& n) { return mkSwap(r(n.target), r(n.value)); },
          [&](const auto&) -> ExprPtr { throw std::logic_error("replaceChild: not a context node"); },
      },
      e->node);
}

}  // namespace detail

inline std::optional<StepOutcome> stepThread(const ExprPtr& e, const Heap& h) {
  if (isValue(e)) return std::nullopt;
  // Walk to the redex, remembering the spine for the rebuild.
  std::vector<std::pair<ExprPtr, const ExprPtr*>> spine;
  ExprPtr cur = e;
  for (;;) {
    const ExprPtr* child = detail::evalChild(cur);
    if (!child) break;
    spine.emplace_back(cur, child);
    cur = *child;
  }
  auto red = detail::reduceRedex(cur, h);
  if (!red) return std::nullopt;
  ExprPtr rebuilt = red->next;
  for (auto it = spine.rbegin(); it != spine.rend(); ++it) {
    rebuilt = detail::replaceChild(it->first, it->second, rebuilt);
  }
  return StepOutcome{rebuilt, std::move(red->heap), red->forked};
}

inline bool isStuck(const ExprPtr& e, const Heap& h) { return !isValue(e) && !stepThread(e, h); }

inline std::optional<Config> stepPool(const Config& cfg, std::size_t i) {
  if (i >= cfg.threads.size()) throw std::out_of_range("stepPool: thread index out of range");
  auto out = stepThread(cfg.threads[i], cfg.heap);
  if (!out) return std::nullopt;
  Config next{cfg.threads, std::move(out->heap)};
  next.threads[i] = out->next;
  if (out->forked) next.threads.push_back(out->forked);
  return next;
}

inline std::vector<std::pair<int, Config>> successors(const Config& cfg) {
  std::vector<std::pair<int, Config>> out;
  for (std::size_t i = 0; i < cfg.threads.size(); ++i) {
    if (auto next = stepPool(cfg, i)) {
      out.emplace_back(static_cast<int>(i), std::move(*next));
    }
  }
  return out;
}

// --- canonicalization ---

namespace detail {

struct LocRenamer {
  std::map<LocId, LocId> assigned;
  std::vector<LocId> order;

  void discover(LocId l) {
    if (assigned.emplace(l, static_cast<LocId>(order.size())).second) order.push_back(l);
  }

  void scan(const ExprPtr& e) {
    if (const auto* loc = std::get_if<Loc>(&e->node)) {
      discover(loc->loc);
      return;
    }
    forEachChild(e, [&](const ExprPtr& c) { scan(c); });
  }

  ExprPtr rename(const ExprPtr& e) const {
    if (const auto* loc = std::get_if<Loc>(&e->node)) return mkLoc(assigned.at(loc->loc));
    bool changed = false;
    std::vector<ExprPtr> kids;
    forEachChild(e, [&](const ExprPtr& c) {
      ExprPtr c2 = rename(c);
      changed = changed || c2.get() != c.get();
      kids.push_back(std::move(c2));
    });
    if (!changed) return e;
    std::size_t k = 0;
    auto next = [&]() { return kids[k++]; };
    return std::visit(
        overloaded{
            [&](const Lambda& n) { return mkLambda(n.param, next(), n.ann); },
            [&](const RecFun& n) { return mkRecFun(n.fname, n.param, next(), n.paramAnn, n.retAnn); },
            [&](const App&) {
              auto f = next();
              return mkApp(f, next());
            },
            [&](const PairE&) {
              auto a = next();
              return mkPair(a, next());
            },
            [&](const Fst&) { return mkFst(next()); },
            [&](const Snd&) { return mkSnd(next()); },
            [&](const LetPair& n) {
              auto b = next();
              return mkLetPair(n.firstName, n.secondName, b, next());
            },
            [&](const Let& n) {
              auto b = next();
              return mkLet(n.name, b, next(), n.ann);
            },
            [&](const Seq&) {
              auto a = next();
              return mkSeq(a, next());
            },
            [&](const If&) {
              auto c = next();
              auto t = next();
              return mkIf(c, t, next());
            },
            [&](const Binop& n) {
              auto l = next();
              return mkBinop(n.op, l, next());
            },
            [&](const Inl&) { return mkInl(next()); },
            [&](const Inr&) { return mkInr(next()); },
            [&](const CaseSum& n) {
              auto s = next();
              auto l = next();
              return mkCase(s, n.leftName, l, n.rightName, next());
            },
            [&](const SomeE&) { return mkSome(next()); },
            [&](const MatchOpt& n) {
              auto s = next();
              auto nb = next();
              return mkMatchOpt(s, nb, n.someName, next());
            },
            [&](const Alloc&) { return mkAlloc(next()); },
            [&](const Load&) { return mkLoad(next()); },
            [&](const Store&) {
              auto t = next();
              return mkStore(t, next());
            },
            [&](const Fai&) { return mkFai(next()); },
            [&](const Swap&) {
              auto t = next();
              return mkSwap(t, next());
            },
            [&](const Fork&) { return mkFork(next()); },
            [&](const auto&) { return e; },
        },
        e->node);
  }
};

}  // namespace detail

// Locations renamed by first occurrence (threads in order, expressions
// pre-order, then the contents of discovered cells in canonical order);
// cells unreachable from any thread are dropped.
inline Config canonicalize(const Config& cfg) {
  detail::LocRenamer ren;
  for (const auto& t : cfg.threads) ren.scan(t);
  for (std::size_t i = 0; i < ren.order.size(); ++i) {
    auto it = cfg.heap.find(ren.order[i]);
    if (it != cfg.heap.end()) ren.scan(it->second);
  }
  Config out;
  out.threads.reserve(cfg.threads.size());
  for (const auto& t : cfg.threads) out.threads.push_back(ren.rename(t));
  for (LocId i = 0; i < ren.order.size(); ++i) {
    auto it = cfg.heap.find(ren.order[i]);
    if (it != cfg.heap.end()) out.heap.emplace(i, ren.rename(it->second));
  }
  return out;
}

// --- serialization ---

inline void serializeExpr(const ExprPtr& e, std::string& out) {
  auto kids = [&](const char* tag, std::initializer_list<const ExprPtr*> cs,
                  const std::string& extra = "") {
    out += "(";
    out += tag;
    if (!extra.empty()) {
      out += " ";
      out += extra;
    }
    for (const ExprPtr* c : cs) {
      out += " ";
      serializeExpr(*c, out);
    }
    out += ")";
  };
  std::visit(
      overloaded{
          [&](const Var& n) { out += "(v " + n.name + ")"; },
          [&](const IntLit& n) { out += "(i " + std::to_string(n.value) + ")"; },
          [&](const BoolLit& n) { out += n.value ? "(b 1)" : "(b 0)"; },
          [&](const UnitLit&) { out += "(u)"; },
          [&](const Loc& n) { out += "(loc " + std::to_string(n.loc) + ")"; },
          [&](const Lambda& n) {
            kids("lam", {&n.body}, n.param + (n.ann ? " [" + printMlType(n.ann) + "]" : " _"));
          },
          [&](const RecFun& n) {
            std::string extra = n.fname + " " + n.param;
            extra += n.paramAnn ? " [" + printMlType(n.paramAnn) + "]" : " _";
            extra += n.retAnn ? " [" + printMlType(n.retAnn) + "]" : " _";
            kids("rec", {&n.body}, extra);
          },
          [&](const App& n) { kids("app", {&n.fn, &n.arg}); },
          [&](const PairE& n) { kids("pr", {&n.first, &n.second}); },
          [&](const Fst& n) { kids("fst", {&n.arg}); },
          [&](const Snd& n) { kids("snd", {&n.arg}); },
          [&](const LetPair& n) { kids("lp", {&n.bound, &n.body}, n.firstName + " " + n.secondName); },
          [&](const Let& n) {
            kids("let", {&n.bound, &n.body},
                 n.name + (n.ann ? " [" + printMlType(n.ann) + "]" : " _"));
          },
          [&](const Seq& n) { kids("seq", {&n.first, &n.second}); },
          [&](const If& n) { kids("if", {&n.cond, &n.thenBranch, &n.elseBranch}); },
          [&](const Binop& n) {
            kids(n.op == BinOp::Add ? "add" : "eq", {&n.lhs, &n.rhs});
          },
          [&](const Inl& n) { kids("inl", {&n.arg}); },
          [&](const Inr& n) { kids("inr", {&n.arg}); },
          [&](const CaseSum& n) {
            kids("case", {&n.scrut, &n.leftBody, &n.rightBody}, n.leftName + " " + n.rightName);
          },
          [&](const NoneLit&) { out += "(no)"; },
          [&](const SomeE& n) { kids("so", {&n.arg}); },
          [&](const MatchOpt& n) { kids("mo", {&n.scrut, &n.noneBody, &n.someBody}, n.someName); },
          [&](const Alloc& n) { kids("al", {&n.arg}); },
          [&](const Load& n) { kids("ld", {&n.arg}); },
          [&](const Store& n) { kids("st", {&n.target, &n.value}); },
          [&](const Fai& n) { kids("fai", {&n.arg}); },
          [&](const Swap& n) { kids("sw", {&n.target, &n.value}); },
          [&](const Fork& n) { kids("fk", {&n.child}); },
      },
      e->node);
}

inline std::string serializeConfig(const Config& cfg) {
  std::string out = "(cfg";
  for (const auto& t : cfg.threads) {
    out += " ";
    serializeExpr(t, out);
  }
  out += " |";
  for (const auto& [l, v] : cfg.heap) {
    out += " (h " + std::to_string(l) + " ";
    serializeExpr(v, out);
    out += ")";
  }
  out += ")";
  return out;
}

// --- pretty printing ---

namespace detail {

// levels: 0 binder forms, 1 seq, 2 assign/fork, 3 eq, 4 add, 5 app, 6 prefix, 7 atom
std::string printPrec(const ExprPtr& e, int level);

inline std::string printPrec(const ExprPtr& e, int level) {
  auto wrap = [&](int mine, const std::string& s) { return mine < level ? "(" + s + ")" : s; };
  return std::visit(
      overloaded{
          [&](const Var& n) { return n.name; },
          [&](const IntLit& n) { return std::to_string(n.value); },
          [&](const BoolLit& n) { return std::string(n.value ? "true" : "false"); },
          [&](const UnitLit&) { return std::string("()"); },
          [&](const Loc& n) { return "<loc " + std::to_string(n.loc) + ">"; },
          [&](const Lambda& n) {
            std::string p = n.ann ? "(" + n.param + " : " + printMlType(n.ann) + ")" : n.param;
            return wrap(0, "fun " + p + " -> " + printPrec(n.body, 0));
          },
          [&](const RecFun& n) {
            std::string p =
                n.paramAnn ? "(" + n.param + " : " + printMlType(n.paramAnn) + ")" : n.param;
            std::string ret;
            if (n.retAnn) {
              bool needParens = std::holds_alternative<TArrow>(n.retAnn->node);
              ret = needParens ? " : (" + printMlType(n.retAnn) + ")" : " : " + printMlType(n.retAnn);
            }
            return wrap(0, "rec " + n.fname + " " + p + ret + " -> " + printPrec(n.body, 0));
          },
          [&](const App& n) {
            return wrap(5, printPrec(n.fn, 5) + " " + printPrec(n.arg, 6));
          },
          [&](const PairE& n) {
            return "(" + printPrec(n.first, 0) + ", " + printPrec(n.second, 0) + ")";
          },
          [&](const Fst& n) { return wrap(6, "fst " + printPrec(n.arg, 7)); },
          [&](const Snd& n) { return wrap(6, "snd " + printPrec(n.arg, 7)); },
          [&](const LetPair& n) {
            return wrap(0, "let (" + n.firstName + ", " + n.secondName + ") = " +
                               printPrec(n.bound, 0) + " in " + printPrec(n.body, 0));
          },
          [&](const Let& n) {
            std::string ann = n.ann ? " : " + printMlType(n.ann) : "";
            return wrap(0, "let " + n.name + ann + " = " + printPrec(n.bound, 0) + " in " +
                               printPrec(n.body, 0));
          },
          [&](const Seq& n) {
            return wrap(1, printPrec(n.first, 2) + "; " + printPrec(n.second, 1));
          },
          [&](const If& n) {
            return wrap(0, "if " + printPrec(n.cond, 1) + " then " + printPrec(n.thenBranch, 0) +
                               " else " + printPrec(n.elseBranch, 0));
          },
          [&](const Binop& n) {
            if (n.op == BinOp::Add) {
              return wrap(4, printPrec(n.lhs, 4) + " + " + printPrec(n.rhs, 5));
            }
            return wrap(3, printPrec(n.lhs, 4) + " == " + printPrec(n.rhs, 4));
          },
          [&](const Inl& n) { return wrap(6, "inl " + printPrec(n.arg, 7)); },
          [&](const Inr& n) { return wrap(6, "inr " + printPrec(n.arg, 7)); },
          [&](const CaseSum& n) {
            return wrap(0, "case " + printPrec(n.scrut, 1) + " of inl " + n.leftName + " -> " +
                               printPrec(n.leftBody, 1) + " | inr " + n.rightName + " -> " +
                               printPrec(n.rightBody, 0));
          },
          [&](const NoneLit&) { return std::string("none"); },
          [&](const SomeE& n) { return wrap(6, "some " + printPrec(n.arg, 7)); },
          [&](const MatchOpt& n) {
            return wrap(0, "match " + printPrec(n.scrut, 1) + " with none -> " +
                               printPrec(n.noneBody, 1) + " | some " + n.someName + " -> " +
                               printPrec(n.someBody, 0));
          },
          [&](const Alloc& n) { return wrap(6, "ref " + printPrec(n.arg, 7)); },
          [&](const Load& n) { return wrap(6, "!" + printPrec(n.arg, 7)); },
          [&](const Store& n) {
            return wrap(2, printPrec(n.target, 3) + " := " + printPrec(n.value, 2));
          },
          [&](const Fai& n) { return wrap(6, "fai " + printPrec(n.arg, 7)); },
          [&](const Swap& n) {
            return wrap(6, "swap " + printPrec(n.target, 7) + " " + printPrec(n.value, 7));
          },
          [&](const Fork& n) { return wrap(2, "fork " + printPrec(n.child, 3)); },
      },
      e->node);
}

}  // namespace detail

inline std::string printExpr(const ExprPtr& e) { return detail::printPrec(e, 0); }

// The focused redex of a non-value expression, for trace rendering.
inline std::string describeRedex(const ExprPtr& e) {
  if (isValue(e)) return "<value>";
  ExprPtr cur = e;
  for (;;) {
    const ExprPtr* child = detail::evalChild(cur);
    if (!child) return printExpr(cur);
    cur = *child;
  }
}

inline std::string printConfig(const Config& cfg) {
  std::string out;
  for (std::size_t i = 0; i < cfg.threads.size(); ++i) {
    out += "[" + std::to_string(i) + "] " + printExpr(cfg.threads[i]) + "\n";
  }
  for (const auto& [l, v] : cfg.heap) {
    out += "loc " + std::to_string(l) + " = " + printExpr(v) + "\n";
  }
  return out;
}

}  // namespace sessrc::ml
