#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sessrc/miniml.hpp"
#include "sessrc/source_lang.hpp"
#include "sessrc/util.hpp"

namespace sessrc {

struct ExploreLimits {
  std::size_t maxStates = 100000;
  std::size_t maxDepth = 10000;
};

template <class Config>
struct ExecGraph {
  struct Edge {
    int thread;
    std::size_t to;
  };
  struct Node {
    Config config;  // canonical
    std::string key;
    std::uint64_t fingerprint;
    std::size_t depth;
    bool expanded = false;
    std::vector<Edge> out;
  };

  std::vector<Node> nodes;  // node 0 is the root
  std::unordered_map<std::string, std::size_t> index;
  bool truncated = false;

  std::size_t edgeCount() const {
    std::size_t n = 0;
    for (const auto& node : nodes) n += node.out.size();
    return n;
  }
};

struct SrcSemantics {
  using Config = src::Config;
  static std::vector<std::pair<int, Config>> successors(const Config& c) {
    return src::successors(c);
  }
  static std::optional<Config> stepPool(const Config& c, std::size_t i) {
    return src::stepPool(c, i);
  }
  static Config canonicalize(const Config& c) { return src::canonicalize(c); }
  static std::string serialize(const Config& c) { return src::serializeConfig(c); }
  static bool threadIsValue(const Config& c, std::size_t i) { return src::isValue(c.threads[i]); }
  static std::string printThread(const Config& c, std::size_t i) {
    return src::printExpr(c.threads[i]);
  }
  static std::string printRedex(const Config& c, std::size_t i) {
    return src::describeRedex(c.threads[i]);
  }
};

struct MlSemantics {
  using Config = ml::Config;
  static std::vector<std::pair<int, Config>> successors(const Config& c) {
    return ml::successors(c);
  }
  static std::optional<Config> stepPool(const Config& c, std::size_t i) {
    return ml::stepPool(c, i);
  }
  static Config canonicalize(const Config& c) { return ml::canonicalize(c); }
  static std::string serialize(const Config& c) { return ml::serializeConfig(c); }
  static bool threadIsValue(const Config& c, std::size_t i) { return ml::isValue(c.threads[i]); }
  static std::string printThread(const Config& c, std::size_t i) {
    return ml::printExpr(c.threads[i]);
  }
  static std::string printRedex(const Config& c, std::size_t i) {
    return ml::describeRedex(c.threads[i]);
  }
};

template <class Sem>
bool enabled(const typename Sem::Config& cfg, std::size_t i) {
  return Sem::stepPool(cfg, i).has_value();
}

// Breadth-first search over canonicalized configurations. Node expansion is
// all-or-nothing: an expanded node carries its complete out-edge set, so its
// edge labels are exactly its enabled threads. When a limit is hit the graph
// is marked truncated and the frontier stays unexpanded.
template <class Sem>
ExecGraph<typename Sem::Config> explore(const typename Sem::Config& initial,
                                        const ExploreLimits& lim, unsigned jobs = 1) {
  using Config = typename Sem::Config;
  ExecGraph<Config> g;

  auto insert = [&](Config canon, std::string key, std::size_t depth) {
    std::uint64_t fp = fnv1a(key);
    g.index.emplace(key, g.nodes.size());
    g.nodes.push_back({std::move(canon), std::move(key), fp, depth, false, {}});
    return g.nodes.size() - 1;
  };

  {
    Config c0 = Sem::canonicalize(initial);
    std::string key = Sem::serialize(c0);
    insert(std::move(c0), std::move(key), 0);
  }

  std::vector<std::size_t> frontier{0};
  while (!frontier.empty() && !g.truncated) {
    // Successor computation is pure; only the merge below mutates the graph,
    // in frontier order, so the result is identical for any job count.
    std::vector<std::vector<std::pair<int, Config>>> succs(frontier.size());
    if (jobs <= 1 || frontier.size() < 2) {
      for (std::size_t i = 0; i < frontier.size(); ++i) {
        succs[i] = Sem::successors(g.nodes[frontier[i]].config);
      }
    } else {
      std::vector<std::thread> workers;
      std::size_t n = frontier.size();
      unsigned count = std::min<unsigned>(jobs, static_cast<unsigned>(n));
      for (unsigned w = 0; w < count; ++w) {
        workers.emplace_back([&, w]() {
          for (std::size_t i = w; i < n; i += count) {
            succs[i] = Sem::successors(g.nodes[frontier[i]].config);
          }
        });
      }
      for (auto& t : workers) t.join();
    }

    std::vector<std::size_t> next;
    for (std::size_t i = 0; i < frontier.size() && !g.truncated; ++i) {
      std::size_t n = frontier[i];
      std::size_t depth = g.nodes[n].depth;
      if (depth >= lim.maxDepth) {
        if (!succs[i].empty()) g.truncated = true;
        continue;
      }
      std::size_t nodesBefore = g.nodes.size();
      bool aborted = false;
      for (auto& [thread, cfg] : succs[i]) {
        Config canon = Sem::canonicalize(cfg);
        std::string key = Sem::serialize(canon);
        auto it = g.index.find(key);
        std::size_t to;
        if (it != g.index.end()) {
          to = it->second;
        } else {
          if (g.nodes.size() >= lim.maxStates) {
            aborted = true;
            break;
          }
          to = insert(std::move(canon), std::move(key), depth + 1);
          next.push_back(to);
        }
        g.nodes[n].out.push_back({thread, to});
      }
      if (aborted) {
        // Leave the node unexpanded with no edges; drop the states that were
        // inserted during this aborted expansion (nothing points at them).
        g.nodes[n].out.clear();
        for (std::size_t k = nodesBefore; k < g.nodes.size(); ++k) g.index.erase(g.nodes[k].key);
        g.nodes.resize(nodesBefore);
        while (!next.empty() && next.back() >= nodesBefore) next.pop_back();
        g.truncated = true;
      } else {
        g.nodes[n].expanded = true;
      }
    }
    frontier = std::move(next);
  }
  return g;
}

// --- fair cycle search on the plain adjacency structure ---

struct AdjGraph {
  // out[n] = (thread label, target) pairs; labels of an expanded node are
  // exactly its enabled threads.
  std::vector<std::vector<std::pair<int, std::size_t>>> out;
  std::vector<bool> expanded;

  std::size_t size() const { return out.size(); }
};

template <class Config>
AdjGraph toAdj(const ExecGraph<Config>& g) {
  AdjGraph a;
  a.out.resize(g.nodes.size());
  a.expanded.resize(g.nodes.size());
  for (std::size_t n = 0; n < g.nodes.size(); ++n) {
    a.expanded[n] = g.nodes[n].expanded;
    for (const auto& e : g.nodes[n].out) a.out[n].emplace_back(e.thread, e.to);
  }
  return a;
}

namespace detail {

// Iterative Tarjan; returns component id per node (unexpanded nodes keep -1).
inline std::vector<int> stronglyConnectedComponents(const AdjGraph& g, int& componentCount) {
  std::size_t n = g.size();
  std::vector<int> comp(n, -1), low(n, 0), disc(n, -1);
  std::vector<bool> onStack(n, false);
  std::vector<std::size_t> stack;
  int time = 0;
  componentCount = 0;

  struct Frame {
    std::size_t node;
    std::size_t edge;
  };
  for (std::size_t start = 0; start < n; ++start) {
    if (disc[start] != -1 || !g.expanded[start]) continue;
    std::vector<Frame> call{{start, 0}};
    disc[start] = low[start] = time++;
    stack.push_back(start);
    onStack[start] = true;
    while (!call.empty()) {
      Frame& f = call.back();
      if (f.edge < g.out[f.node].size()) {
        std::size_t to = g.out[f.node][f.edge].second;
        ++f.edge;
        if (disc[to] == -1) {
          if (!g.expanded[to]) {
            disc[to] = time++;  // leaf: its own trivial component, never on stack
            continue;
          }
          disc[to] = low[to] = time++;
          stack.push_back(to);
          onStack[to] = true;
          call.push_back({to, 0});
        } else if (onStack[to]) {
          low[f.node] = std::min(low[f.node], disc[to]);
        }
      } else {
        if (low[f.node] == disc[f.node]) {
          int c = componentCount++;
          for (;;) {
            std::size_t v = stack.back();
            stack.pop_back();
            onStack[v] = false;
            comp[v] = c;
            if (v == f.node) break;
          }
        }
        std::size_t done = f.node;
        call.pop_back();
        if (!call.empty()) {
          low[call.back().node] = std::min(low[call.back().node], low[done]);
        }
      }
    }
  }
  return comp;
}

inline std::vector<std::pair<int, std::size_t>> bfsPathOverEdges(
    const AdjGraph& g, std::size_t from, std::size_t to,
    const std::vector<int>& comp, int restrictComp) {
  if (from == to) return {};
  std::vector<int> parent(g.size(), -1);
  std::vector<int> parentLabel(g.size(), -1);
  std::deque<std::size_t> queue{from};
  std::vector<bool> seen(g.size(), false);
  seen[from] = true;
  while (!queue.empty()) {
    std::size_t u = queue.front();
    queue.pop_front();
    for (const auto& [lbl, v] : g.out[u]) {
      if (restrictComp >= 0 && (comp[v] != restrictComp || comp[u] != restrictComp)) continue;
      if (seen[v]) continue;
      seen[v] = true;
      parent[v] = static_cast<int>(u);
      parentLabel[v] = lbl;
      if (v == to) {
        std::vector<std::pair<int, std::size_t>> path;
        std::size_t cur = to;
        while (cur != from) {
          path.emplace_back(parentLabel[cur], cur);
          cur = static_cast<std::size_t>(parent[cur]);
        }
        std::reverse(path.begin(), path.end());
        return path;
      }
      queue.push_back(v);
    }
  }
  throw std::logic_error("bfsPathOverEdges: no path");
}

}  // namespace detail

struct FairCycle {
  std::size_t start;
  // Edges of a closed walk from start back to start; every thread enabled at
  // every node of the walk takes at least one of its edges.
  std::vector<std::pair<int, std::size_t>> edges;
};

struct SccFairness {
  std::vector<std::size_t> nodes;
  std::set<int> enabledEverywhere;
  std::set<int> steppedInside;
  std::vector<int> blocking;  // enabled everywhere but stepless: witnesses unfairness
};

// Per-SCC weak-fairness analysis. An SCC with at least one internal edge
// carries a fair cycle iff every thread enabled at all of its nodes labels
// some internal edge; blocking lists the threads that prevent this.
inline std::vector<SccFairness> fairSccAnalysis(const AdjGraph& g) {
  int count = 0;
  std::vector<int> comp = detail::stronglyConnectedComponents(g, count);
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(count));
  for (std::size_t v = 0; v < g.size(); ++v) {
    if (comp[v] >= 0) members[static_cast<std::size_t>(comp[v])].push_back(v);
  }
  std::sort(members.begin(), members.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });

  std::vector<SccFairness> out;
  for (const auto& nodes : members) {
    bool hasInternal = false;
    for (std::size_t v : nodes) {
      for (const auto& [lbl, to] : g.out[v]) {
        if (comp[to] == comp[v]) {
          hasInternal = true;
          break;
        }
      }
      if (hasInternal) break;
    }
    if (!hasInternal) continue;

    SccFairness info;
    info.nodes = nodes;
    bool first = true;
    for (std::size_t v : nodes) {
      std::set<int> labels;
      for (const auto& [lbl, to] : g.out[v]) {
        labels.insert(lbl);
        if (comp[to] == comp[v]) info.steppedInside.insert(lbl);
      }
      if (first) {
        info.enabledEverywhere = std::move(labels);
        first = false;
      } else {
        std::set<int> inter;
        std::set_intersection(info.enabledEverywhere.begin(), info.enabledEverywhere.end(),
                              labels.begin(), labels.end(), std::inserter(inter, inter.begin()));
        info.enabledEverywhere = std::move(inter);
      }
    }
    for (int t : info.enabledEverywhere) {
      if (!info.steppedInside.count(t)) info.blocking.push_back(t);
    }
    out.push_back(std::move(info));
  }
  return out;
}

// Searches for a reachable fair cycle: a closed walk in which every thread
// enabled at all of its nodes steps at least once. The witness walk covers
// every internal edge of the first fair SCC, so its node set is the whole
// SCC and the label condition is inherited from the SCC analysis.
inline std::optional<FairCycle> findFairCycle(const AdjGraph& g) {
  int count = 0;
  std::vector<int> comp = detail::stronglyConnectedComponents(g, count);
  auto sccs = fairSccAnalysis(g);
  for (const auto& scc : sccs) {
    if (!scc.blocking.empty()) continue;
    int c = comp[scc.nodes.front()];

    std::vector<std::tuple<std::size_t, int, std::size_t>> internal;
    for (std::size_t v : scc.nodes) {
      for (const auto& [lbl, to] : g.out[v]) {
        if (comp[to] == c) internal.emplace_back(v, lbl, to);
      }
    }
    std::vector<bool> covered(internal.size(), false);

    FairCycle cycle;
    cycle.start = scc.nodes.front();
    std::size_t cur = cycle.start;
    for (std::size_t k = 0; k < internal.size(); ++k) {
      if (covered[k]) continue;
      auto [u, lbl, v] = internal[k];
      for (auto& step : detail::bfsPathOverEdges(g, cur, u, comp, c)) {
        cycle.edges.push_back(step);
      }
      cycle.edges.emplace_back(lbl, v);
      covered[k] = true;
      // Anything sharing source and label is the same deterministic edge.
      for (std::size_t k2 = 0; k2 < internal.size(); ++k2) {
        auto [u2, lbl2, v2] = internal[k2];
        if (u2 == u && lbl2 == lbl) covered[k2] = true;
      }
      cur = v;
    }
    for (auto& step : detail::bfsPathOverEdges(g, cur, cycle.start, comp, c)) {
      cycle.edges.push_back(step);
    }
    if (cycle.edges.empty()) continue;
    return cycle;
  }
  return std::nullopt;
}

struct Lasso {
  // (stepping thread, node arrived at); the prefix starts at the root, the
  // cycle returns to its first node's predecessor (the prefix end).
  std::vector<std::pair<int, std::size_t>> prefix;
  std::vector<std::pair<int, std::size_t>> cycle;
};

template <class Config>
std::optional<Lasso> findFairLasso(const ExecGraph<Config>& g) {
  AdjGraph adj = toAdj(g);
  auto cycle = findFairCycle(adj);
  if (!cycle) return std::nullopt;
  Lasso lasso;
  std::vector<int> noComp;
  if (cycle->start != 0) {
    lasso.prefix = detail::bfsPathOverEdges(adj, 0, cycle->start, noComp, -1);
  }
  lasso.cycle = cycle->edges;
  return lasso;
}

// --- DOT dump ---

template <class Config>
std::string toDot(const ExecGraph<Config>& g) {
  std::string out = "digraph exec {\n  rankdir=LR;\n";
  for (std::size_t n = 0; n < g.nodes.size(); ++n) {
    const auto& node = g.nodes[n];
    bool terminal = node.expanded && node.out.empty();
    out += "  n" + std::to_string(n) + " [label=\"" + toHex(node.fingerprint) + "\"";
    if (n == 0) out += ", shape=box";
    if (terminal) out += ", peripheries=2";
    if (!node.expanded) out += ", style=dashed";
    out += "];\n";
  }
  for (std::size_t n = 0; n < g.nodes.size(); ++n) {
    for (const auto& e : g.nodes[n].out) {
      out += "  n" + std::to_string(n) + " -> n" + std::to_string(e.to) + " [label=\"" +
             std::to_string(e.thread) + "\"];\n";
    }
  }
  out += "}\n";
  return out;
}

// Replays a thread schedule from a configuration, canonicalizing after each
// step; returns the visited canonical configurations (including the start).
template <class Sem>
std::optional<std::vector<typename Sem::Config>> replaySchedule(
    const typename Sem::Config& initial, const std::vector<int>& schedule) {
  std::vector<typename Sem::Config> trace{Sem::canonicalize(initial)};
  for (int t : schedule) {
    const auto& cur = trace.back();
    if (t < 0 || static_cast<std::size_t>(t) >= cur.threads.size()) return std::nullopt;
    auto next = Sem::stepPool(cur, static_cast<std::size_t>(t));
    if (!next) return std::nullopt;
    trace.push_back(Sem::canonicalize(*next));
  }
  return trace;
}

}  // namespace sessrc
