#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sessrc/explorer.hpp"
#include "sessrc/miniml.hpp"
#include "sessrc/source_lang.hpp"

namespace sessrc {

// Observations: what a user can read off a finished program. Integers and
// units must match exactly, locations relate to arbitrary endpoints,
// closures to closures, pairs componentwise.
inline bool obsEquiv(const ml::ExprPtr& v, const src::ExprPtr& V) {
  return std::visit(
      overloaded{
          [&](const ml::IntLit& l) {
            const auto* r = std::get_if<src::IntLit>(&V->node);
            return r && l.value == r->value;
          },
          [&](const ml::UnitLit&) { return std::holds_alternative<src::UnitLit>(V->node); },
          [&](const ml::Loc&) { return std::holds_alternative<src::EndpointLit>(V->node); },
          [&](const ml::Lambda&) { return std::holds_alternative<src::Lambda>(V->node); },
          [&](const ml::RecFun&) { return std::holds_alternative<src::Lambda>(V->node); },
          [&](const ml::PairE& l) {
            const auto* r = std::get_if<src::PairE>(&V->node);
            return r && obsEquiv(l.first, r->first) && obsEquiv(l.second, r->second);
          },
          [&](const auto&) { return false; },
      },
      v->node);
}

// The MiniML-to-MiniML observation relation used for the lock case study.
// Booleans are compared by equality; the rest mirrors obsEquiv.
inline bool obsEquivMl(const ml::ExprPtr& v, const ml::ExprPtr& w) {
  return std::visit(
      overloaded{
          [&](const ml::IntLit& l) {
            const auto* r = std::get_if<ml::IntLit>(&w->node);
            return r && l.value == r->value;
          },
          [&](const ml::BoolLit& l) {
            const auto* r = std::get_if<ml::BoolLit>(&w->node);
            return r && l.value == r->value;
          },
          [&](const ml::UnitLit&) { return std::holds_alternative<ml::UnitLit>(w->node); },
          [&](const ml::Loc&) { return std::holds_alternative<ml::Loc>(w->node); },
          [&](const ml::Lambda&) {
            return std::holds_alternative<ml::Lambda>(w->node) ||
                   std::holds_alternative<ml::RecFun>(w->node);
          },
          [&](const ml::RecFun&) {
            return std::holds_alternative<ml::Lambda>(w->node) ||
                   std::holds_alternative<ml::RecFun>(w->node);
          },
          [&](const ml::PairE& l) {
            const auto* r = std::get_if<ml::PairE>(&w->node);
            return r && obsEquivMl(l.first, r->first) && obsEquivMl(l.second, r->second);
          },
          [&](const ml::NoneLit&) { return std::holds_alternative<ml::NoneLit>(w->node); },
          [&](const ml::SomeE& l) {
            const auto* r = std::get_if<ml::SomeE>(&w->node);
            return r && obsEquivMl(l.arg, r->arg);
          },
          [&](const ml::Inl& l) {
            const auto* r = std::get_if<ml::Inl>(&w->node);
            return r && obsEquivMl(l.arg, r->arg);
          },
          [&](const ml::Inr& l) {
            const auto* r = std::get_if<ml::Inr>(&w->node);
            return r && obsEquivMl(l.arg, r->arg);
          },
          [&](const auto&) { return false; },
      },
      v->node);
}

template <class Sem>
bool allThreadsValues(const typename Sem::Config& cfg) {
  for (std::size_t i = 0; i < cfg.threads.size(); ++i) {
    if (!Sem::threadIsValue(cfg, i)) return false;
  }
  return true;
}

// Value of the first (main) thread, when it is one.
template <class Sem>
auto mainValue(const typename Sem::Config& cfg)
    -> std::optional<typename std::decay_t<decltype(cfg.threads)>::value_type> {
  if (cfg.threads.empty() || !Sem::threadIsValue(cfg, 0)) return std::nullopt;
  return cfg.threads[0];
}

enum class Verdict { Pass, Fail, Inconclusive };

inline const char* verdictName(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    default: return "inconclusive";
  }
}

struct StuckWitness {
  std::vector<int> path;  // thread schedule from the root
  std::uint64_t node = 0;
  int thread = -1;
  std::string threadExpr;
};

struct TerminalWitness {
  std::vector<int> path;
  std::uint64_t node = 0;
  std::string mainValue;
};

struct LassoWitness {
  std::vector<int> prefix;
  std::vector<int> cycle;
  std::uint64_t cycleStart = 0;
};

struct SccCertificate {
  std::uint64_t representative = 0;
  std::size_t size = 0;
  std::vector<int> blocking;
};

struct CondResult {
  Verdict verdict = Verdict::Pass;
  std::string note;
  std::optional<StuckWitness> stuck;
  std::optional<TerminalWitness> unmatched;
  std::optional<LassoWitness> targetLasso;
  std::vector<SccCertificate> sourceAbsence;
};

struct GraphStats {
  std::size_t nodes = 0;
  std::size_t edges = 0;
  bool truncated = false;
};

struct RefinementReport {
  CondResult cond1, cond2, cond3;
  GraphStats target, source;

  bool pass() const {
    return cond1.verdict == Verdict::Pass && cond2.verdict == Verdict::Pass &&
           cond3.verdict == Verdict::Pass;
  }
  bool anyFail() const {
    return cond1.verdict == Verdict::Fail || cond2.verdict == Verdict::Fail ||
           cond3.verdict == Verdict::Fail;
  }
};

namespace detail {

template <class Config>
std::vector<int> pathFromRoot(const ExecGraph<Config>& g, std::size_t target) {
  if (target == 0) return {};
  std::vector<int> parent(g.nodes.size(), -1), parentLabel(g.nodes.size(), -1);
  std::vector<bool> seen(g.nodes.size(), false);
  std::deque<std::size_t> queue{0};
  seen[0] = true;
  while (!queue.empty()) {
    std::size_t u = queue.front();
    queue.pop_front();
    for (const auto& e : g.nodes[u].out) {
      if (seen[e.to]) continue;
      seen[e.to] = true;
      parent[e.to] = static_cast<int>(u);
      parentLabel[e.to] = e.thread;
      if (e.to == target) {
        std::vector<int> path;
        std::size_t cur = target;
        while (cur != 0) {
          path.push_back(parentLabel[cur]);
          cur = static_cast<std::size_t>(parent[cur]);
        }
        std::reverse(path.begin(), path.end());
        return path;
      }
      queue.push_back(e.to);
    }
  }
  return {};
}

// First (node, thread) whose thread expression is stuck, scanning in node
// order. Expanded nodes are judged by their edge labels; frontier nodes are
// judged semantically.
template <class Sem>
std::optional<std::pair<std::size_t, int>> findStuckThread(
    const ExecGraph<typename Sem::Config>& g) {
  for (std::size_t n = 0; n < g.nodes.size(); ++n) {
    const auto& node = g.nodes[n];
    for (std::size_t i = 0; i < node.config.threads.size(); ++i) {
      if (Sem::threadIsValue(node.config, i)) continue;
      bool canStep;
      if (node.expanded) {
        canStep = false;
        for (const auto& e : node.out) {
          if (e.thread == static_cast<int>(i)) {
            canStep = true;
            break;
          }
        }
      } else {
        canStep = Sem::stepPool(node.config, i).has_value();
      }
      if (!canStep) return std::make_pair(n, static_cast<int>(i));
    }
  }
  return std::nullopt;
}

}  // namespace detail

// The three-condition check: target stuck-freedom, terminal-value
// correspondence under the observation relation, and fair-divergence
// correspondence. Truncation downgrades any verdict that depends on the
// missing region to Inconclusive; positive witnesses found inside a
// truncated graph remain definitive.
template <class TgtSem, class SrcSem, class Obs>
RefinementReport checkRefinement(const typename TgtSem::Config& tgtInit,
                                 const typename SrcSem::Config& srcInit,
                                 const ExploreLimits& lim, Obs&& obs, unsigned jobs = 1) {
  RefinementReport report;

  auto tgtGraph = explore<TgtSem>(tgtInit, lim, jobs);
  auto srcGraph = explore<SrcSem>(srcInit, lim, jobs);

  report.target = {tgtGraph.nodes.size(), tgtGraph.edgeCount(), tgtGraph.truncated};
  report.source = {srcGraph.nodes.size(), srcGraph.edgeCount(), srcGraph.truncated};

  // Condition 1: no reachable target thread is stuck.
  if (auto stuck = detail::findStuckThread<TgtSem>(tgtGraph)) {
    auto [n, i] = *stuck;
    StuckWitness w;
    w.path = detail::pathFromRoot(tgtGraph, n);
    w.node = tgtGraph.nodes[n].fingerprint;
    w.thread = i;
    w.threadExpr = TgtSem::printThread(tgtGraph.nodes[n].config, static_cast<std::size_t>(i));
    report.cond1 = {Verdict::Fail, "stuck target thread", std::move(w), {}, {}, {}};
  } else if (tgtGraph.truncated) {
    report.cond1 = {Verdict::Inconclusive, "state limit hit before proving stuck-freedom",
                    {}, {}, {}, {}};
  } else {
    report.cond1 = {Verdict::Pass, "no stuck target thread", {}, {}, {}, {}};
  }

  // Condition 2: whenever all target threads terminate with values, some
  // all-values source run matches the main value, or the source can get
  // stuck.
  bool srcStuck = detail::findStuckThread<SrcSem>(srcGraph).has_value();
  if (srcStuck) {
    report.cond2 = {Verdict::Pass, "source can reach a stuck thread (2b)", {}, {}, {}, {}};
  } else {
    std::vector<std::size_t> srcTerminalMains;
    for (std::size_t n = 0; n < srcGraph.nodes.size(); ++n) {
      if (allThreadsValues<SrcSem>(srcGraph.nodes[n].config)) srcTerminalMains.push_back(n);
    }
    std::optional<std::size_t> unmatched;
    for (std::size_t n = 0; n < tgtGraph.nodes.size() && !unmatched; ++n) {
      if (!allThreadsValues<TgtSem>(tgtGraph.nodes[n].config)) continue;
      const auto& v = tgtGraph.nodes[n].config.threads[0];
      bool ok = false;
      for (std::size_t m : srcTerminalMains) {
        if (obs(v, srcGraph.nodes[m].config.threads[0])) {
          ok = true;
          break;
        }
      }
      if (!ok) unmatched = n;
    }
    if (unmatched && !srcGraph.truncated) {
      TerminalWitness w;
      w.path = detail::pathFromRoot(tgtGraph, *unmatched);
      w.node = tgtGraph.nodes[*unmatched].fingerprint;
      w.mainValue = TgtSem::printThread(tgtGraph.nodes[*unmatched].config, 0);
      report.cond2 = {Verdict::Fail, "target terminal value has no matching source run",
                      {}, std::move(w), {}, {}};
    } else if (unmatched) {
      report.cond2 = {Verdict::Inconclusive,
                      "unmatched target terminal, but the source graph is truncated",
                      {}, {}, {}, {}};
    } else if (!tgtGraph.truncated) {
      report.cond2 = {Verdict::Pass, "every target terminal matches a source run", {}, {}, {}, {}};
    } else {
      report.cond2 = {Verdict::Inconclusive,
                      "state limit hit before enumerating target terminals", {}, {}, {}, {}};
    }
  }

  // Condition 3: a fair diverging target execution needs a fair diverging
  // source execution.
  auto tgtLasso = findFairLasso(tgtGraph);
  if (!tgtLasso) {
    if (tgtGraph.truncated) {
      report.cond3 = {Verdict::Inconclusive, "state limit hit before ruling out fair divergence",
                      {}, {}, {}, {}};
    } else {
      report.cond3 = {Verdict::Pass, "target has no fair diverging execution", {}, {}, {}, {}};
    }
  } else {
    auto toWitness = [&](const Lasso& l, const auto& graph) {
      LassoWitness w;
      for (auto& [t, n] : l.prefix) w.prefix.push_back(t);
      for (auto& [t, n] : l.cycle) w.cycle.push_back(t);
      std::size_t startNode = l.prefix.empty() ? 0 : l.prefix.back().second;
      w.cycleStart = graph.nodes[startNode].fingerprint;
      return w;
    };
    auto srcLasso = findFairLasso(srcGraph);
    if (srcLasso) {
      report.cond3 = {Verdict::Pass, "both sides have fair diverging executions",
                      {}, {}, toWitness(*tgtLasso, tgtGraph), {}};
    } else if (srcGraph.truncated) {
      report.cond3 = {Verdict::Inconclusive,
                      "target diverges fairly; source graph is truncated", {}, {},
                      toWitness(*tgtLasso, tgtGraph), {}};
    } else {
      CondResult c;
      c.verdict = Verdict::Fail;
      c.note = "target has a fair diverging execution, source has none";
      c.targetLasso = toWitness(*tgtLasso, tgtGraph);
      auto sccs = fairSccAnalysis(toAdj(srcGraph));
      for (const auto& scc : sccs) {
        SccCertificate cert;
        cert.representative = srcGraph.nodes[scc.nodes.front()].fingerprint;
        cert.size = scc.nodes.size();
        cert.blocking = scc.blocking;
        c.sourceAbsence.push_back(std::move(cert));
      }
      report.cond3 = std::move(c);
    }
  }

  return report;
}

// The compiler-correctness instance: a source program against its own
// translation (or a hand-provided target), from empty initial states.
inline RefinementReport checkRefinementSrcTgt(const ml::ExprPtr& target, const src::ExprPtr& source,
                                              const ExploreLimits& lim, unsigned jobs = 1) {
  if (!ml::freeVars(target).empty() || !src::freeVars(source).empty()) {
    throw std::invalid_argument("checkRefinement: programs must be closed");
  }
  ml::Config t0{{target}, {}};
  src::Config s0{{source}, {}};
  return checkRefinement<MlSemantics, SrcSemantics>(
      t0, s0, lim, [](const ml::ExprPtr& v, const src::ExprPtr& V) { return obsEquiv(v, V); },
      jobs);
}

// Both sides MiniML (the lock case study).
inline RefinementReport checkRefinementMlMl(const ml::ExprPtr& target, const ml::ExprPtr& source,
                                            const ExploreLimits& lim, unsigned jobs = 1) {
  if (!ml::freeVars(target).empty() || !ml::freeVars(source).empty()) {
    throw std::invalid_argument("checkRefinement: programs must be closed");
  }
  ml::Config t0{{target}, {}};
  ml::Config s0{{source}, {}};
  return checkRefinement<MlSemantics, MlSemantics>(
      t0, s0, lim, [](const ml::ExprPtr& v, const ml::ExprPtr& w) { return obsEquivMl(v, w); },
      jobs);
}

}  // namespace sessrc
