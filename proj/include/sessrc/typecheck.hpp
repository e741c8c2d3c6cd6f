#pragma once

#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sessrc/source_lang.hpp"

namespace sessrc::src {

enum class TypeErrorKind {
  VariableReused,
  UnboundVariable,
  Mismatch,
  CannotInferSession,
  CannotInfer,
  EndpointLiteral,
};

struct TypeError : std::runtime_error {
  TypeErrorKind kind;
  TypeError(TypeErrorKind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

using TypeEnv = std::map<std::string, TypePtr>;

struct SplitRecord {
  std::string rule;
  std::set<std::string> left;
  std::set<std::string> right;
};

struct TypecheckDebug {
  std::vector<SplitRecord> splits;
};

struct TypecheckResult {
  TypePtr type;
  std::set<std::string> used;  // context variables consumed by e
};

namespace detail {

class Checker {
 public:
  Checker(const TypeEnv& env, TypecheckDebug* dbg) : dbg_(dbg) {
    for (const auto& [name, ty] : env) {
      bindings_.push_back({name, ty, false});
      scopes_[name].push_back(bindings_.size() - 1);
      contextIds_.insert(bindings_.size() - 1);
    }
  }

  TypecheckResult run(const ExprPtr& e) {
    auto [ty, used] = infer(e);
    std::set<std::string> names;
    for (std::size_t id : used) {
      if (contextIds_.count(id)) names.insert(bindings_[id].name);
    }
    return {ty, names};
  }

 private:
  struct Binding {
    std::string name;
    TypePtr type;
    bool used;
  };

  using UsedSet = std::set<std::size_t>;

  std::vector<Binding> bindings_;
  std::map<std::string, std::vector<std::size_t>> scopes_;
  std::set<std::size_t> contextIds_;
  TypecheckDebug* dbg_;

  std::size_t bind(const std::string& name, TypePtr ty) {
    bindings_.push_back({name, std::move(ty), false});
    scopes_[name].push_back(bindings_.size() - 1);
    return bindings_.size() - 1;
  }

  void unbind(const std::string& name) { scopes_[name].pop_back(); }

  [[noreturn]] static void mismatch(const std::string& expected, const TypePtr& got) {
    throw TypeError(TypeErrorKind::Mismatch,
                    "type mismatch: expected " + expected + ", got " + printType(got));
  }

  void recordSplit(const char* rule, const UsedSet& l, const UsedSet& r) {
    for (std::size_t id : l) {
      if (r.count(id)) {
        throw std::logic_error("typecheck: non-disjoint context split in " + std::string(rule));
      }
    }
    if (dbg_) {
      SplitRecord rec;
      rec.rule = rule;
      for (std::size_t id : l) rec.left.insert(bindings_[id].name);
      for (std::size_t id : r) rec.right.insert(bindings_[id].name);
      dbg_->splits.push_back(std::move(rec));
    }
  }

  static UsedSet unite(UsedSet a, const UsedSet& b) {
    a.insert(b.begin(), b.end());
    return a;
  }

  // Removes the binder's own id from the set it may appear in.
  static UsedSet drop(UsedSet s, std::size_t id) {
    s.erase(id);
    return s;
  }

  std::pair<TypePtr, UsedSet> infer(const ExprPtr& e) {
    return std::visit(
        overloaded{
            [&](const Var& v) -> std::pair<TypePtr, UsedSet> {
              auto it = scopes_.find(v.name);
              if (it == scopes_.end() || it->second.empty()) {
                throw TypeError(TypeErrorKind::UnboundVariable,
                                "unbound variable: " + v.name);
              }
              Binding& b = bindings_[it->second.back()];
              if (b.used) {
                throw TypeError(TypeErrorKind::VariableReused,
                                "variable used more than once: " + v.name);
              }
              b.used = true;
              return {b.type, UsedSet{it->second.back()}};
            },
            [&](const IntLit&) -> std::pair<TypePtr, UsedSet> { return {tyInt(), {}}; },
            [&](const UnitLit&) -> std::pair<TypePtr, UsedSet> { return {tyUnit(), {}}; },
            [&](const EndpointLit&) -> std::pair<TypePtr, UsedSet> {
              throw TypeError(TypeErrorKind::EndpointLiteral,
                              "endpoint literals cannot appear in source programs");
            },
            [&](const Lambda& l) -> std::pair<TypePtr, UsedSet> {
              if (!l.ann) {
                throw TypeError(TypeErrorKind::CannotInfer,
                                "cannot infer parameter type of fun " + l.param +
                                    "; annotate it or apply the function directly");
              }
              std::size_t id = bind(l.param, l.ann);
              auto [bodyTy, used] = infer(l.body);
              unbind(l.param);
              return {tyLolli(l.ann, bodyTy), drop(std::move(used), id)};
            },
            [&](const App& a) -> std::pair<TypePtr, UsedSet> {
              // let-style rule: the argument's type seeds an unannotated
              // parameter. This is how let/fork sugar gets checked, and it
              // checks the fork child before the continuation.
              if (const auto* lam = std::get_if<Lambda>(&a.fn->node); lam && !lam->ann) {
                auto [argTy, usedArg] = infer(a.arg);
                std::size_t id = bind(lam->param, argTy);
                auto [bodyTy, usedBody] = infer(lam->body);
                unbind(lam->param);
                UsedSet bodyOuter = drop(std::move(usedBody), id);
                recordSplit("let", usedArg, bodyOuter);
                return {bodyTy, unite(std::move(usedArg), bodyOuter)};
              }
              auto [fnTy, usedFn] = infer(a.fn);
              const auto* lolli = std::get_if<LolliType>(&fnTy->node);
              if (!lolli) mismatch("a function type", fnTy);
              auto [argTy, usedArg] = infer(a.arg);
              if (!typeEqual(argTy, lolli->arg)) mismatch(printType(lolli->arg), argTy);
              recordSplit("app", usedFn, usedArg);
              return {lolli->result, unite(std::move(usedFn), usedArg)};
            },
            [&](const PairE& p) -> std::pair<TypePtr, UsedSet> {
              auto [t1, u1] = infer(p.first);
              auto [t2, u2] = infer(p.second);
              recordSplit("pair", u1, u2);
              return {tyTensor(t1, t2), unite(std::move(u1), u2)};
            },
            [&](const LetPair& lp) -> std::pair<TypePtr, UsedSet> {
              auto [boundTy, usedBound] = infer(lp.bound);
              const auto* tensor = std::get_if<TensorType>(&boundTy->node);
              if (!tensor) mismatch("a pair type", boundTy);
              std::size_t id1 = bind(lp.firstName, tensor->first);
              std::size_t id2 = bind(lp.secondName, tensor->second);
              auto [bodyTy, usedBody] = infer(lp.body);
              unbind(lp.secondName);
              unbind(lp.firstName);
              UsedSet bodyOuter = drop(drop(std::move(usedBody), id1), id2);
              recordSplit("let-pair", usedBound, bodyOuter);
              return {bodyTy, unite(std::move(usedBound), bodyOuter)};
            },
            [&](const Fork& f) -> std::pair<TypePtr, UsedSet> {
              auto [childTy, used] = infer(f.child);
              (void)childTy;  // the child may have any type
              return {tyUnit(), std::move(used)};
            },
            [&](const NewCh& n) -> std::pair<TypePtr, UsedSet> {
              if (!n.proto) {
                throw TypeError(TypeErrorKind::CannotInferSession,
                                "newch needs a protocol annotation: newch[S]");
              }
              return {tyTensor(tySession(n.proto), tySession(dual(n.proto))), {}};
            },
            [&](const Send& s) -> std::pair<TypePtr, UsedSet> {
              auto [chanTy, usedChan] = infer(s.chan);
              const auto* sess = std::get_if<SessionEmbed>(&chanTy->node);
              if (!sess) mismatch("a session type", chanTy);
              const auto* snd = std::get_if<SendProto>(&sess->proto->node);
              if (!snd) mismatch("a !-session type", chanTy);
              auto [payloadTy, usedPayload] = infer(s.payload);
              if (!typeEqual(payloadTy, snd->payload)) mismatch(printType(snd->payload), payloadTy);
              recordSplit("send", usedChan, usedPayload);
              return {tySession(snd->cont), unite(std::move(usedChan), usedPayload)};
            },
            [&](const Recv& r) -> std::pair<TypePtr, UsedSet> {
              auto [chanTy, used] = infer(r.chan);
              const auto* sess = std::get_if<SessionEmbed>(&chanTy->node);
              if (!sess) mismatch("a session type", chanTy);
              const auto* rcv = std::get_if<RecvProto>(&sess->proto->node);
              if (!rcv) mismatch("a ?-session type", chanTy);
              return {tyTensor(tySession(rcv->cont), rcv->payload), std::move(used)};
            },
        },
        e->node);
  }
};

}  // namespace detail

// Affine typechecking: returns the type of e and the exact set of context
// variables it consumes. Context splits are realized by usage marking; a
// second use of any binding raises VariableReused.
inline TypecheckResult typecheck(const TypeEnv& env, const ExprPtr& e,
                                 TypecheckDebug* dbg = nullptr) {
  detail::Checker checker(env, dbg);
  return checker.run(e);
}

}  // namespace sessrc::src
