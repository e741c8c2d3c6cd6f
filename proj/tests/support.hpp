#pragma once

// Shared helpers for the heavier suites: an independent weak-fairness oracle,
// random graph/protocol/program generators, and corpus file access.

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sessrc/explorer.hpp"
#include "sessrc/session_types.hpp"
#include "sessrc/source_lang.hpp"

namespace support {

using namespace sessrc;

inline std::string readFile(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline std::vector<std::filesystem::path> corpusFiles(const std::string& subdir,
                                                      const std::string& ext) {
  std::vector<std::filesystem::path> out;
  std::filesystem::path dir = std::filesystem::path(SESSRC_CORPUS_DIR) / subdir;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ext) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Decides fair-walk existence directly from the definition by searching the
// finite space of (current node, labels taken, threads enabled at every node
// visited). Independent of the SCC-based detector.
inline bool fairWalkOracle(const AdjGraph& g) {
  int maxLabel = -1;
  for (const auto& out : g.out) {
    for (const auto& [lbl, to] : out) maxLabel = std::max(maxLabel, lbl);
  }
  if (maxLabel < 0) return false;
  auto enabledMask = [&](std::size_t n) {
    unsigned m = 0;
    for (const auto& [lbl, to] : g.out[n]) m |= 1u << lbl;
    return m;
  };
  const unsigned maskCount = 1u << (maxLabel + 1);
  for (std::size_t s = 0; s < g.size(); ++s) {
    if (g.out[s].empty()) continue;
    std::vector<bool> visited(g.size() * maskCount * maskCount, false);
    auto id = [&](std::size_t n, unsigned labels, unsigned enab) {
      return (n * maskCount + labels) * maskCount + enab;
    };
    std::vector<std::tuple<std::size_t, unsigned, unsigned>> queue;
    queue.emplace_back(s, 0u, enabledMask(s));
    visited[id(s, 0u, enabledMask(s))] = true;
    while (!queue.empty()) {
      auto [n, labels, enab] = queue.back();
      queue.pop_back();
      for (const auto& [lbl, to] : g.out[n]) {
        unsigned labels2 = labels | (1u << lbl);
        unsigned enab2 = enab & enabledMask(to);
        if (to == s && (enab2 & ~labels2) == 0) return true;
        if (!visited[id(to, labels2, enab2)]) {
          visited[id(to, labels2, enab2)] = true;
          queue.emplace_back(to, labels2, enab2);
        }
      }
    }
  }
  return false;
}

inline AdjGraph randomGraph(std::mt19937& rng, std::size_t maxNodes, int threads) {
  std::uniform_int_distribution<std::size_t> sizePick(2, maxNodes);
  std::size_t n = sizePick(rng);
  AdjGraph g;
  g.out.resize(n);
  g.expanded.assign(n, true);
  std::uniform_int_distribution<int> labelPick(0, threads - 1);
  auto hasLabel = [&](std::size_t u, int lbl) {
    for (const auto& [l, t] : g.out[u]) {
      if (l == lbl) return true;
    }
    return false;
  };
  for (std::size_t v = 1; v < n; ++v) {
    std::uniform_int_distribution<std::size_t> fromPick(0, v - 1);
    for (int attempts = 0; attempts < 8; ++attempts) {
      std::size_t u = fromPick(rng);
      int lbl = labelPick(rng);
      if (!hasLabel(u, lbl)) {
        g.out[u].emplace_back(lbl, v);
        break;
      }
    }
  }
  std::uniform_int_distribution<std::size_t> toPick(0, n - 1);
  std::uniform_int_distribution<int> coin(0, 3);
  for (std::size_t u = 0; u < n; ++u) {
    for (int lbl = 0; lbl < threads; ++lbl) {
      if (!hasLabel(u, lbl) && coin(rng) == 0) g.out[u].emplace_back(lbl, toPick(rng));
    }
  }
  return g;
}

inline TypePtr randomPayloadTy(std::mt19937& rng) {
  switch (rng() % 3) {
    case 0: return tyUnit();
    case 1: return tyTensor(tyInt(), tyUnit());
    default: return tyInt();
  }
}

inline SessionPtr randomSendProtocol(std::mt19937& rng, int len) {
  SessionPtr s = sessEnd();
  for (int i = 0; i < len; ++i) s = sessSend(randomPayloadTy(rng), s);
  return s;
}

// Closed well-typed programs, by construction. Pure computations plus
// channel pipelines that follow a freshly drawn protocol.
struct TypedGen {
  std::mt19937& rng;
  int counter = 0;

  std::string fresh(const char* stem) { return stem + std::to_string(counter++); }

  src::ExprPtr valueOf(const TypePtr& ty) {
    if (std::holds_alternative<UnitType>(ty->node)) return src::mkUnit();
    if (std::holds_alternative<TensorType>(ty->node)) {
      const auto& t = std::get<TensorType>(ty->node);
      return src::mkPair(valueOf(t.first), valueOf(t.second));
    }
    return src::mkInt(static_cast<int>(rng() % 50));
  }

  // An Int-typed pure computation, possibly using the given free variable
  // (of type Int) at most once.
  src::ExprPtr pureInt(int depth, const std::string& freeVar) {
    switch (depth <= 0 ? rng() % 2 : rng() % 5) {
      case 1:
        if (!freeVar.empty()) return src::mkVar(freeVar);
        return src::mkInt(3);
      case 2: {
        std::string x = fresh("p");
        return src::mkLet(x, pureInt(depth - 1, freeVar), src::mkVar(x));
      }
      case 3: {
        std::string x = fresh("q");
        return src::mkApp(src::mkLambda(x, src::mkVar(x), tyInt()), pureInt(depth - 1, freeVar));
      }
      case 4: {
        std::string a = fresh("a");
        std::string b = fresh("b");
        return src::mkLetPair(a, b, src::mkPair(pureInt(depth - 1, freeVar), src::mkUnit()),
                              src::mkVar(a));
      }
      default:
        return src::mkInt(static_cast<int>(rng() % 100));
    }
  }

  // let (l, r) = newch[S] in fork (sends along l); receives along r; final Int
  src::ExprPtr channelProgram(const std::string& freeVar) {
    int len = 1 + static_cast<int>(rng() % 3);
    SessionPtr proto = randomSendProtocol(rng, len);
    std::string l = fresh("l");
    std::string r = fresh("r");

    std::vector<TypePtr> payloads;
    {
      SessionPtr cur = proto;
      for (int i = 0; i < len; ++i) {
        const auto& send = std::get<SendProto>(cur->node);
        payloads.push_back(send.payload);
        cur = send.cont;
      }
    }
    src::ExprPtr sender;
    {
      std::vector<std::string> names{l};
      for (int i = 1; i < len; ++i) names.push_back(fresh("s"));
      sender = src::mkSend(src::mkVar(names[len - 1]), valueOf(payloads[len - 1]));
      for (int i = len - 2; i >= 0; --i) {
        sender = src::mkLet(names[i + 1], src::mkSend(src::mkVar(names[i]), valueOf(payloads[i])),
                            sender);
      }
    }
    src::ExprPtr receiver;
    {
      std::vector<std::string> names{r};
      for (int i = 1; i < len; ++i) names.push_back(fresh("t"));
      receiver = pureInt(1, freeVar);
      for (int i = len - 1; i >= 0; --i) {
        std::string payloadName = fresh("m");
        receiver = src::mkLetPair(i + 1 < len ? names[i + 1] : fresh("z"), payloadName,
                                  src::mkRecv(src::mkVar(names[i])), receiver);
      }
    }
    return src::mkLetPair(l, r, src::mkNewch(proto), src::mkForkSeq(sender, receiver));
  }

  src::ExprPtr program(const std::string& freeVar) {
    return rng() % 2 ? channelProgram(freeVar) : pureInt(3, freeVar);
  }
};

}  // namespace support
