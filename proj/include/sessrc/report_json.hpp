#pragma once

#include <nlohmann/json.hpp>

#include "sessrc/refinement.hpp"

namespace sessrc {

inline nlohmann::json toJson(const StuckWitness& w) {
  return {{"kind", "stuck-thread"},
          {"path", w.path},
          {"node", toHex(w.node)},
          {"thread", w.thread},
          {"expr", w.threadExpr}};
}

inline nlohmann::json toJson(const TerminalWitness& w) {
  return {{"kind", "unmatched-terminal"},
          {"path", w.path},
          {"node", toHex(w.node)},
          {"mainValue", w.mainValue}};
}

inline nlohmann::json toJson(const LassoWitness& w) {
  return {{"kind", "fair-lasso"},
          {"prefix", w.prefix},
          {"cycle", w.cycle},
          {"cycleStart", toHex(w.cycleStart)}};
}

inline nlohmann::json toJson(const CondResult& c) {
  nlohmann::json j{{"verdict", verdictName(c.verdict)}, {"note", c.note}};
  if (c.stuck) j["witness"] = toJson(*c.stuck);
  if (c.unmatched) j["witness"] = toJson(*c.unmatched);
  if (c.targetLasso) j["witness"] = toJson(*c.targetLasso);
  if (!c.sourceAbsence.empty()) {
    nlohmann::json sccs = nlohmann::json::array();
    for (const auto& scc : c.sourceAbsence) {
      sccs.push_back({{"representative", toHex(scc.representative)},
                      {"size", scc.size},
                      {"blockingThreads", scc.blocking}});
    }
    j["sourceAbsence"] = std::move(sccs);
  }
  return j;
}

inline nlohmann::json toJson(const GraphStats& s) {
  return {{"nodes", s.nodes}, {"edges", s.edges}, {"truncated", s.truncated}};
}

inline nlohmann::json toJson(const RefinementReport& r) {
  return {{"cond1", toJson(r.cond1)},
          {"cond2", toJson(r.cond2)},
          {"cond3", toJson(r.cond3)},
          {"stats", {{"target", toJson(r.target)}, {"source", toJson(r.source)}}},
          {"pass", r.pass()}};
}

}  // namespace sessrc
