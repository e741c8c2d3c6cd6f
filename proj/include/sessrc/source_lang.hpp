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

#include "sessrc/session_types.hpp"
#include "sessrc/util.hpp"

namespace sessrc {

enum class Side { Left, Right };

inline Side flip(Side s) { return s == Side::Left ? Side::Right : Side::Left; }

inline const char* sideName(Side s) { return s == Side::Left ? "left" : "right"; }

namespace src {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;
using ChanId = std::uint32_t;

struct Var {
  std::string name;
};
struct IntLit {
  std::int64_t value;
};
struct UnitLit {};
// Runtime-only: one side of channel c. Never appears in parsed programs.
struct EndpointLit {
  ChanId chan;
  Side side;
};
struct Lambda {
  std::string param;
  TypePtr ann;  // null when unannotated
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
struct LetPair {
  std::string firstName;
  std::string secondName;
  ExprPtr bound;
  ExprPtr body;
};
struct Fork {
  ExprPtr child;
};
struct NewCh {
  SessionPtr proto;  // null when unannotated
};
struct Send {
  ExprPtr chan;
  ExprPtr payload;
};
struct Recv {
  ExprPtr chan;
};

struct Expr {
  std::variant<Var, IntLit, UnitLit, EndpointLit, Lambda, App, PairE, LetPair, Fork, NewCh, Send,
               Recv>
      node;
};

inline ExprPtr mkVar(std::string name) { return std::make_shared<Expr>(Expr{Var{std::move(name)}}); }
inline ExprPtr mkInt(std::int64_t v) { return std::make_shared<Expr>(Expr{IntLit{v}}); }
inline ExprPtr mkUnit() {
  static const ExprPtr u = std::make_shared<Expr>(Expr{UnitLit{}});
  return u;
}
inline ExprPtr mkEndpoint(ChanId c, Side s) {
  return std::make_shared<Expr>(Expr{EndpointLit{c, s}});
}
inline ExprPtr mkLambda(std::string param, ExprPtr body, TypePtr ann = nullptr) {
  return std::make_shared<Expr>(Expr{Lambda{std::move(param), std::move(ann), std::move(body)}});
}
inline ExprPtr mkApp(ExprPtr fn, ExprPtr arg) {
  return std::make_shared<Expr>(Expr{App{std::move(fn), std::move(arg)}});
}
inline ExprPtr mkPair(ExprPtr a, ExprPtr b) {
  return std::make_shared<Expr>(Expr{PairE{std::move(a), std::move(b)}});
}
inline ExprPtr mkLetPair(std::string x, std::string y, ExprPtr bound, ExprPtr body) {
  return std::make_shared<Expr>(
      Expr{LetPair{std::move(x), std::move(y), std::move(bound), std::move(body)}});
}
inline ExprPtr mkFork(ExprPtr child) { return std::make_shared<Expr>(Expr{Fork{std::move(child)}}); }
inline ExprPtr mkNewch(SessionPtr proto = nullptr) {
  return std::make_shared<Expr>(Expr{NewCh{std::move(proto)}});
}
inline ExprPtr mkSend(ExprPtr chan, ExprPtr payload) {
  return std::make_shared<Expr>(Expr{Send{std::move(chan), std::move(payload)}});
}
inline ExprPtr mkRecv(ExprPtr chan) { return std::make_shared<Expr>(Expr{Recv{std::move(chan)}}); }

// let x = e1 in e2 and fork e1; e2 are surface sugar.
inline ExprPtr mkLet(std::string x, ExprPtr bound, ExprPtr body) {
  return mkApp(mkLambda(std::move(x), std::move(body)), std::move(bound));
}
inline ExprPtr mkForkSeq(ExprPtr child, ExprPtr cont) {
  return mkApp(mkLambda("_", std::move(cont)), mkFork(std::move(child)));
}

inline bool isValue(const ExprPtr& e) {
  return std::visit(overloaded{
                        [](const IntLit&) { return true; },
                        [](const UnitLit&) { return true; },
                        [](const EndpointLit&) { return true; },
                        [](const Lambda&) { return true; },
                        [](const PairE& p) { return isValue(p.first) && isValue(p.second); },
                        [](const auto&) { return false; },
                    },
                    e->node);
}

inline void collectFreeVars(const ExprPtr& e, std::set<std::string>& bound,
                            std::set<std::string>& out) {
  std::visit(overloaded{
                 [&](const Var& v) {
                   if (!bound.count(v.name)) out.insert(v.name);
                 },
                 [&](const IntLit&) {},
                 [&](const UnitLit&) {},
                 [&](const EndpointLit&) {},
                 [&](const Lambda& l) {
                   bool inserted = bound.insert(l.param).second;
                   collectFreeVars(l.body, bound, out);
                   if (inserted) bound.erase(l.param);
                 },
                 [&](const App& a) {
                   collectFreeVars(a.fn, bound, out);
                   collectFreeVars(a.arg, bound, out);
                 },
                 [&](const PairE& p) {
                   collectFreeVars(p.first, bound, out);
                   collectFreeVars(p.second, bound, out);
                 },
                 [&](const LetPair& lp) {
                   collectFreeVars(lp.bound, bound, out);
                   bool i1 = bound.insert(lp.firstName).second;
                   bool i2 = bound.insert(lp.secondName).second;
                   collectFreeVars(lp.body, bound, out);
                   if (i1) bound.erase(lp.firstName);
                   if (i2) bound.erase(lp.secondName);
                 },
                 [&](const Fork& f) { collectFreeVars(f.child, bound, out); },
                 [&](const NewCh&) {},
                 [&](const Send& s) {
                   collectFreeVars(s.chan, bound, out);
                   collectFreeVars(s.payload, bound, out);
                 },
                 [&](const Recv& r) { collectFreeVars(r.chan, bound, out); },
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

// Rename binder p to a fresh name inside body when it would capture a free
// variable of the substituted value.
inline std::pair<std::string, ExprPtr> avoidCapture(const std::string& p, const ExprPtr& body,
                                                    const std::set<std::string>& fvValue) {
  if (!fvValue.count(p)) return {p, body};
  std::string p2 = freshName(p);
  ExprPtr renamed = substituteIn(body, p, mkVar(p2), std::set<std::string>{p2});
  return {p2, renamed};
}

inline ExprPtr substituteIn(const ExprPtr& e, const std::string& name, const ExprPtr& value,
                            const std::set<std::string>& fvValue) {
  return std::visit(
      overloaded{
          [&](const Var& v) { return v.name == name ? value : e; },
          [&](const IntLit&) { return e; },
          [&](const UnitLit&) { return e; },
          [&](const EndpointLit&) { return e; },
          [&](const NewCh&) { return e; },
          [&](const Lambda& l) {
            if (l.param == name) return e;
            if (!freeVars(l.body).count(name)) return e;
            auto [p, body] = avoidCapture(l.param, l.body, fvValue);
            return mkLambda(p, substituteIn(body, name, value, fvValue), l.ann);
          },
          [&](const App& a) {
            return mkApp(substituteIn(a.fn, name, value, fvValue),
                         substituteIn(a.arg, name, value, fvValue));
          },
          [&](const PairE& p) {
            return mkPair(substituteIn(p.first, name, value, fvValue),
                          substituteIn(p.second, name, value, fvValue));
          },
          [&](const LetPair& lp) {
            ExprPtr bound = substituteIn(lp.bound, name, value, fvValue);
            if (lp.firstName == name || lp.secondName == name) {
              return mkLetPair(lp.firstName, lp.secondName, bound, lp.body);
            }
            if (!freeVars(lp.body).count(name)) {
              return mkLetPair(lp.firstName, lp.secondName, bound, lp.body);
            }
            auto [x, body1] = avoidCapture(lp.firstName, lp.body, fvValue);
            auto [y, body2] = avoidCapture(lp.secondName, body1, fvValue);
            return mkLetPair(x, y, bound, substituteIn(body2, name, value, fvValue));
          },
          [&](const Fork& f) { return mkFork(substituteIn(f.child, name, value, fvValue)); },
          [&](const Send& s) {
            return mkSend(substituteIn(s.chan, name, value, fvValue),
                          substituteIn(s.payload, name, value, fvValue));
          },
          [&](const Recv& r) { return mkRecv(substituteIn(r.chan, name, value, fvValue)); },
      },
      e->node);
}

}  // namespace detail

// Capture-avoiding substitution of value for the free occurrences of name.
inline ExprPtr substitute(const ExprPtr& e, const std::string& name, const ExprPtr& value) {
  return detail::substituteIn(e, name, value, freeVars(value));
}

inline bool equal(const ExprPtr& a, const ExprPtr& b) {
  if (a.get() == b.get()) return true;
  return std::visit(
      overloaded{
          [&](const Var& l) {
            auto* r = std::get_if<Var>(&b->node);
            return r && l.name == r->name;
          },
          [&](const IntLit& l) {
            auto* r = std::get_if<IntLit>(&b->node);
            return r && l.value == r->value;
          },
          [&](const UnitLit&) { return std::holds_alternative<UnitLit>(b->node); },
          [&](const EndpointLit& l) {
            auto* r = std::get_if<EndpointLit>(&b->node);
            return r && l.chan == r->chan && l.side == r->side;
          },
          [&](const Lambda& l) {
            auto* r = std::get_if<Lambda>(&b->node);
            if (!r || l.param != r->param || !equal(l.body, r->body)) return false;
            if (!l.ann != !r->ann) return false;
            return !l.ann || typeEqual(l.ann, r->ann);
          },
          [&](const App& l) {
            auto* r = std::get_if<App>(&b->node);
            return r && equal(l.fn, r->fn) && equal(l.arg, r->arg);
          },
          [&](const PairE& l) {
            auto* r = std::get_if<PairE>(&b->node);
            return r && equal(l.first, r->first) && equal(l.second, r->second);
          },
          [&](const LetPair& l) {
            auto* r = std::get_if<LetPair>(&b->node);
            return r && l.firstName == r->firstName && l.secondName == r->secondName &&
                   equal(l.bound, r->bound) && equal(l.body, r->body);
          },
          [&](const Fork& l) {
            auto* r = std::get_if<Fork>(&b->node);
            return r && equal(l.child, r->child);
          },
          [&](const NewCh& l) {
            auto* r = std::get_if<NewCh>(&b->node);
            if (!r || !l.proto != !r->proto) return false;
            return !l.proto || sessionEqual(l.proto, r->proto);
          },
          [&](const Send& l) {
            auto* r = std::get_if<Send>(&b->node);
            return r && equal(l.chan, r->chan) && equal(l.payload, r->payload);
          },
          [&](const Recv& l) {
            auto* r = std::get_if<Recv>(&b->node);
            return r && equal(l.chan, r->chan);
          },
      },
      a->node);
}

// --- machine state ---

struct ChanBuffers {
  std::vector<ExprPtr> toRight;  // filled by sends on the left endpoint
  std::vector<ExprPtr> toLeft;   // filled by sends on the right endpoint
};

using ChanState = std::map<ChanId, ChanBuffers>;

struct Config {
  std::vector<ExprPtr> threads;
  ChanState chans;
};

inline ChanId minFreeChan(const ChanState& st) {
  ChanId c = 0;
  for (const auto& [id, _] : st) {
    if (id != c) break;
    ++c;
  }
  return c;
}

// --- evaluation contexts ---

enum class Frame {
  AppFn,
  AppArg,
  PairFirst,
  PairSecond,
  SendChan,
  SendPayload,
  RecvChan,
  LetPairBound,
};

struct Decomposition {
  std::vector<Frame> path;
  ExprPtr redex;
};

// Unique evaluation position per the context grammar: function before
// argument, pair left before right, channel before payload. Absent when e is
// a value. A non-value leaf (free variable) counts as the redex position; it
// then fails to reduce, which is what stuckness means.
inline std::optional<Decomposition> decompose(const ExprPtr& e) {
  if (isValue(e)) return std::nullopt;
  std::vector<Frame> path;
  ExprPtr cur = e;
  for (;;) {
    const ExprPtr* next = nullptr;
    Frame frame{};
    std::visit(overloaded{
                   [&](const App& a) {
                     if (!isValue(a.fn)) {
                       next = &a.fn;
                       frame = Frame::AppFn;
                     } else if (!isValue(a.arg)) {
                       next = &a.arg;
                       frame = Frame::AppArg;
                     }
                   },
                   [&](const PairE& p) {
                     if (!isValue(p.first)) {
                       next = &p.first;
                       frame = Frame::PairFirst;
                     } else {
                       next = &p.second;
                       frame = Frame::PairSecond;
                     }
                   },
                   [&](const Send& s) {
                     if (!isValue(s.chan)) {
                       next = &s.chan;
                       frame = Frame::SendChan;
                     } else if (!isValue(s.payload)) {
                       next = &s.payload;
                       frame = Frame::SendPayload;
                     }
                   },
                   [&](const Recv& r) {
                     if (!isValue(r.chan)) {
                       next = &r.chan;
                       frame = Frame::RecvChan;
                     }
                   },
                   [&](const LetPair& lp) {
                     if (!isValue(lp.bound)) {
                       next = &lp.bound;
                       frame = Frame::LetPairBound;
                     }
                   },
                   [&](const auto&) {},
               },
               cur->node);
    if (!next || isValue(*next)) return Decomposition{std::move(path), cur};
    path.push_back(frame);
    cur = *next;
  }
}

inline ExprPtr plug(const ExprPtr& whole, const std::vector<Frame>& path, const ExprPtr& repl,
                    std::size_t at = 0) {
  if (at == path.size()) return repl;
  return std::visit(
      overloaded{
          [&](const App& a) {
            return path[at] == Frame::AppFn ? mkApp(plug(a.fn, path, repl, at + 1), a.arg)
                                            : mkApp(a.fn, plug(a.arg, path, repl, at + 1));
          },
          [&](const PairE& p) {
            return path[at] == Frame::PairFirst
                       ? mkPair(plug(p.first, path, repl, at + 1), p.second)
                       : mkPair(p.first, plug(p.second, path, repl, at + 1));
          },
          [&](const Send& s) {
            return path[at] == Frame::SendChan
                       ? mkSend(plug(s.chan, path, repl, at + 1), s.payload)
                       : mkSend(s.chan, plug(s.payload, path, repl, at + 1));
          },
          [&](const Recv& r) { return mkRecv(plug(r.chan, path, repl, at + 1)); },
          [&](const LetPair& lp) {
            return mkLetPair(lp.firstName, lp.secondName, plug(lp.bound, path, repl, at + 1),
                             lp.body);
          },
          [&](const auto&) -> ExprPtr { throw std::logic_error("plug: path does not match term"); },
      },
      whole->node);
}

struct StepOutcome {
  ExprPtr next;
  ChanState state;
  ExprPtr forked;  // null unless the redex was a fork
};

namespace detail {

struct RedexResult {
  ExprPtr next;
  ChanState state;
  ExprPtr forked;
};

inline std::optional<RedexResult> reduceRedex(const ExprPtr& redex, const ChanState& st) {
  return std::visit(
      overloaded{
          [&](const App& a) -> std::optional<RedexResult> {
            if (const auto* lam = std::get_if<Lambda>(&a.fn->node)) {
              return RedexResult{substitute(lam->body, lam->param, a.arg), st, nullptr};
            }
            return std::nullopt;
          },
          [&](const LetPair& lp) -> std::optional<RedexResult> {
            if (const auto* pr = std::get_if<PairE>(&lp.bound->node)) {
              ExprPtr body = substitute(lp.body, lp.firstName, pr->first);
              if (lp.secondName != lp.firstName) {
                body = substitute(body, lp.secondName, pr->second);
              }
              return RedexResult{body, st, nullptr};
            }
            return std::nullopt;
          },
          [&](const NewCh&) -> std::optional<RedexResult> {
            ChanId c = minFreeChan(st);
            ChanState st2 = st;
            st2.emplace(c, ChanBuffers{});
            return RedexResult{mkPair(mkEndpoint(c, Side::Left), mkEndpoint(c, Side::Right)), st2,
                               nullptr};
          },
          [&](const Send& s) -> std::optional<RedexResult> {
            const auto* ep = std::get_if<EndpointLit>(&s.chan->node);
            if (!ep) return std::nullopt;
            auto it = st.find(ep->chan);
            if (it == st.end()) return std::nullopt;
            ChanState st2 = st;
            ChanBuffers& bufs = st2[ep->chan];
            (ep->side == Side::Left ? bufs.toRight : bufs.toLeft).push_back(s.payload);
            return RedexResult{s.chan, st2, nullptr};
          },
          [&](const Recv& r) -> std::optional<RedexResult> {
            const auto* ep = std::get_if<EndpointLit>(&r.chan->node);
            if (!ep) return std::nullopt;
            auto it = st.find(ep->chan);
            if (it == st.end()) return std::nullopt;
            const auto& buf = ep->side == Side::Right ? it->second.toRight : it->second.toLeft;
            if (buf.empty()) {
              // Idle step: same expression, same state; keeps the receiver enabled.
              return RedexResult{mkRecv(r.chan), st, nullptr};
            }
            ExprPtr msg = buf.front();
            ChanState st2 = st;
            ChanBuffers& bufs = st2[ep->chan];
            auto& b = ep->side == Side::Right ? bufs.toRight : bufs.toLeft;
            b.erase(b.begin());
            return RedexResult{mkPair(r.chan, msg), st2, nullptr};
          },
          [&](const Fork& f) -> std::optional<RedexResult> {
            return RedexResult{mkUnit(), st, f.child};
          },
          [&](const auto&) -> std::optional<RedexResult> { return std::nullopt; },
      },
      redex->node);
}

}  // namespace detail

inline std::optional<StepOutcome> stepThread(const ExprPtr& e, const ChanState& st) {
  auto dec = decompose(e);
  if (!dec) return std::nullopt;
  auto red = detail::reduceRedex(dec->redex, st);
  if (!red) return std::nullopt;
  return StepOutcome{plug(e, dec->path, red->next), std::move(red->state), red->forked};
}

inline bool isStuck(const ExprPtr& e, const ChanState& st) {
  return !isValue(e) && !stepThread(e, st);
}

inline std::optional<Config> stepPool(const Config& cfg, std::size_t i) {
  if (i >= cfg.threads.size()) throw std::out_of_range("stepPool: thread index out of range");
  auto out = stepThread(cfg.threads[i], cfg.chans);
  if (!out) return std::nullopt;
  Config next{cfg.threads, std::move(out->state)};
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

struct ChanRenamer {
  std::map<ChanId, ChanId> assigned;
  std::vector<ChanId> order;  // original ids in discovery order

  void discover(ChanId c) {
    if (assigned.emplace(c, static_cast<ChanId>(order.size())).second) order.push_back(c);
  }

  void scan(const ExprPtr& e) {
    std::visit(overloaded{
                   [&](const EndpointLit& ep) { discover(ep.chan); },
                   [&](const Lambda& l) { scan(l.body); },
                   [&](const App& a) {
                     scan(a.fn);
                     scan(a.arg);
                   },
                   [&](const PairE& p) {
                     scan(p.first);
                     scan(p.second);
                   },
                   [&](const LetPair& lp) {
                     scan(lp.bound);
                     scan(lp.body);
                   },
                   [&](const Fork& f) { scan(f.child); },
                   [&](const Send& s) {
                     scan(s.chan);
                     scan(s.payload);
                   },
                   [&](const Recv& r) { scan(r.chan); },
                   [&](const auto&) {},
               },
               e->node);
  }

  ExprPtr rename(const ExprPtr& e) const {
    return std::visit(
        overloaded{
            [&](const EndpointLit& ep) { return mkEndpoint(assigned.at(ep.chan), ep.side); },
            [&](const Lambda& l) { return mkLambda(l.param, rename(l.body), l.ann); },
            [&](const App& a) { return mkApp(rename(a.fn), rename(a.arg)); },
            [&](const PairE& p) { return mkPair(rename(p.first), rename(p.second)); },
            [&](const LetPair& lp) {
              return mkLetPair(lp.firstName, lp.secondName, rename(lp.bound), rename(lp.body));
            },
            [&](const Fork& f) { return mkFork(rename(f.child)); },
            [&](const Send& s) { return mkSend(rename(s.chan), rename(s.payload)); },
            [&](const Recv& r) { return mkRecv(rename(r.chan)); },
            [&](const auto&) { return e; },
        },
        e->node);
  }
};

}  // namespace detail

// Channel ids renamed by first occurrence (threads in order, expressions
// pre-order, then the buffers of discovered channels in canonical order);
// channels unreachable from any thread are dropped.
inline Config canonicalize(const Config& cfg) {
  detail::ChanRenamer ren;
  for (const auto& t : cfg.threads) ren.scan(t);
  // Buffers of reachable channels can mention further channels.
  for (std::size_t i = 0; i < ren.order.size(); ++i) {
    auto it = cfg.chans.find(ren.order[i]);
    if (it == cfg.chans.end()) continue;
    for (const auto& v : it->second.toRight) ren.scan(v);
    for (const auto& v : it->second.toLeft) ren.scan(v);
  }
  Config out;
  out.threads.reserve(cfg.threads.size());
  for (const auto& t : cfg.threads) out.threads.push_back(ren.rename(t));
  for (ChanId i = 0; i < ren.order.size(); ++i) {
    auto it = cfg.chans.find(ren.order[i]);
    if (it == cfg.chans.end()) continue;
    ChanBuffers renamed;
    for (const auto& v : it->second.toRight) renamed.toRight.push_back(ren.rename(v));
    for (const auto& v : it->second.toLeft) renamed.toLeft.push_back(ren.rename(v));
    out.chans.emplace(i, std::move(renamed));
  }
  return out;
}

// --- serialization (canonical, injective on ASTs) ---

inline void serializeExpr(const ExprPtr& e, std::string& out) {
  std::visit(overloaded{
                 [&](const Var& v) { out += "(v " + v.name + ")"; },
                 [&](const IntLit& i) { out += "(i " + std::to_string(i.value) + ")"; },
                 [&](const UnitLit&) { out += "(u)"; },
                 [&](const EndpointLit& ep) {
                   out += "(ep " + std::to_string(ep.chan) + (ep.side == Side::Left ? " l)" : " r)");
                 },
                 [&](const Lambda& l) {
                   out += "(lam " + l.param + " ";
                   out += l.ann ? "[" + printType(l.ann) + "]" : "_";
                   out += " ";
                   serializeExpr(l.body, out);
                   out += ")";
                 },
                 [&](const App& a) {
                   out += "(app ";
                   serializeExpr(a.fn, out);
                   out += " ";
                   serializeExpr(a.arg, out);
                   out += ")";
                 },
                 [&](const PairE& p) {
                   out += "(pr ";
                   serializeExpr(p.first, out);
                   out += " ";
                   serializeExpr(p.second, out);
                   out += ")";
                 },
                 [&](const LetPair& lp) {
                   out += "(lp " + lp.firstName + " " + lp.secondName + " ";
                   serializeExpr(lp.bound, out);
                   out += " ";
                   serializeExpr(lp.body, out);
                   out += ")";
                 },
                 [&](const Fork& f) {
                   out += "(fk ";
                   serializeExpr(f.child, out);
                   out += ")";
                 },
                 [&](const NewCh& n) {
                   out += n.proto ? "(nc [" + printSession(n.proto) + "])" : "(nc _)";
                 },
                 [&](const Send& s) {
                   out += "(sd ";
                   serializeExpr(s.chan, out);
                   out += " ";
                   serializeExpr(s.payload, out);
                   out += ")";
                 },
                 [&](const Recv& r) {
                   out += "(rc ";
                   serializeExpr(r.chan, out);
                   out += ")";
                 },
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
  for (const auto& [c, bufs] : cfg.chans) {
    out += " (c " + std::to_string(c) + " [";
    for (const auto& v : bufs.toRight) serializeExpr(v, out);
    out += "] [";
    for (const auto& v : bufs.toLeft) serializeExpr(v, out);
    out += "])";
  }
  out += ")";
  return out;
}

// --- pretty printing (parseable for parser-reachable terms) ---

namespace detail {

// 0 = lowest (fun/let/fork), 1 = application, 2 = atom
std::string printPrec(const ExprPtr& e, int level);

inline std::string printAtom(const ExprPtr& e) { return printPrec(e, 2); }

inline std::string printPrec(const ExprPtr& e, int level) {
  auto wrap = [&](int mine, const std::string& s) {
    return mine < level ? "(" + s + ")" : s;
  };
  return std::visit(
      overloaded{
          [&](const Var& v) { return v.name; },
          [&](const IntLit& i) { return std::to_string(i.value); },
          [&](const UnitLit&) { return std::string("()"); },
          [&](const EndpointLit& ep) {
            return "<" + std::to_string(ep.chan) + ":" + sideName(ep.side) + ">";
          },
          [&](const Lambda& l) {
            std::string param =
                l.ann ? "(" + l.param + " : " + printType(l.ann) + ")" : l.param;
            return wrap(0, "fun " + param + " -> " + printPrec(l.body, 0));
          },
          [&](const App& a) {
            if (const auto* lam = std::get_if<Lambda>(&a.fn->node); lam && !lam->ann) {
              if (std::holds_alternative<Fork>(a.arg->node) && lam->param == "_") {
                const auto& fk = std::get<Fork>(a.arg->node);
                return wrap(0, "fork " + printPrec(fk.child, 0) + "; " + printPrec(lam->body, 0));
              }
              return wrap(0, "let " + lam->param + " = " + printPrec(a.arg, 0) + " in " +
                                 printPrec(lam->body, 0));
            }
            return wrap(1, printPrec(a.fn, 1) + " " + printAtom(a.arg));
          },
          [&](const PairE& p) {
            return "(" + printPrec(p.first, 0) + ", " + printPrec(p.second, 0) + ")";
          },
          [&](const LetPair& lp) {
            return wrap(0, "let (" + lp.firstName + ", " + lp.secondName + ") = " +
                               printPrec(lp.bound, 0) + " in " + printPrec(lp.body, 0));
          },
          [&](const Fork& f) {
            // Only reachable for hand-built terms; the parser always pairs
            // fork with a continuation.
            return wrap(1, "fork " + printAtom(f.child));
          },
          [&](const NewCh& n) {
            return n.proto ? "newch[" + printSession(n.proto) + "]" : std::string("newch");
          },
          [&](const Send& s) {
            return wrap(1, "send " + printAtom(s.chan) + " " + printAtom(s.payload));
          },
          [&](const Recv& r) { return wrap(1, "recv " + printAtom(r.chan)); },
      },
      e->node);
}

}  // namespace detail

inline std::string printExpr(const ExprPtr& e) { return detail::printPrec(e, 0); }

// The focused redex of a non-value expression, for trace rendering.
inline std::string describeRedex(const ExprPtr& e) {
  auto dec = decompose(e);
  if (!dec) return "<value>";
  return printExpr(dec->redex);
}

inline std::string printConfig(const Config& cfg) {
  std::string out;
  for (std::size_t i = 0; i < cfg.threads.size(); ++i) {
    out += "[" + std::to_string(i) + "] " + printExpr(cfg.threads[i]) + "\n";
  }
  for (const auto& [c, bufs] : cfg.chans) {
    out += "chan " + std::to_string(c) + ": ->[";
    for (std::size_t i = 0; i < bufs.toRight.size(); ++i) {
      if (i) out += ", ";
      out += printExpr(bufs.toRight[i]);
    }
    out += "] <-[";
    for (std::size_t i = 0; i < bufs.toLeft.size(); ++i) {
      if (i) out += ", ";
      out += printExpr(bufs.toLeft[i]);
    }
    out += "]\n";
  }
  return out;
}

}  // namespace src
}  // namespace sessrc
