#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sessrc/compiler.hpp"
#include "sessrc/explorer.hpp"
#include "sessrc/locks.hpp"
#include "sessrc/parser.hpp"
#include "sessrc/refinement.hpp"
#include "sessrc/report_json.hpp"
#include "sessrc/typecheck.hpp"

namespace {

using namespace sessrc;

constexpr int kExitPass = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInconclusive = 3;

std::string readFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool hasSuffix(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string detectLang(const std::string& file, const std::string& override) {
  if (!override.empty()) {
    if (override != "src" && override != "tgt") {
      throw std::runtime_error("--lang must be 'src' or 'tgt', got '" + override + "'");
    }
    return override;
  }
  if (hasSuffix(file, ".src")) return "src";
  if (hasSuffix(file, ".tgt")) return "tgt";
  throw std::runtime_error("cannot tell the language of " + file + "; pass --lang src|tgt");
}

ExploreLimits makeLimits(std::size_t maxStates, std::size_t maxDepth) {
  ExploreLimits lim;
  if (const char* env = std::getenv("SESSRC_MAX_STATES")) {
    lim.maxStates = static_cast<std::size_t>(std::stoull(env));
  }
  if (maxStates != 0) lim.maxStates = maxStates;
  if (maxDepth != 0) lim.maxDepth = maxDepth;
  return lim;
}

int reportExit(const RefinementReport& r) {
  if (r.anyFail()) return kExitCheckFailed;
  if (!r.pass()) return kExitInconclusive;
  return kExitPass;
}

void printHumanReport(const RefinementReport& r) {
  auto line = [](const char* name, const CondResult& c) {
    std::cout << name << ": " << verdictName(c.verdict);
    if (!c.note.empty()) std::cout << " (" << c.note << ")";
    std::cout << "\n";
  };
  line("cond1 (stuck-freedom)   ", r.cond1);
  line("cond2 (terminal values) ", r.cond2);
  line("cond3 (fair divergence) ", r.cond3);
  std::cout << "target graph: " << r.target.nodes << " nodes, " << r.target.edges << " edges"
            << (r.target.truncated ? " (truncated)" : "") << "\n";
  std::cout << "source graph: " << r.source.nodes << " nodes, " << r.source.edges << " edges"
            << (r.source.truncated ? " (truncated)" : "") << "\n";
  if (r.cond3.verdict == Verdict::Fail && r.cond3.targetLasso) {
    std::cout << "target fair lasso: prefix of " << r.cond3.targetLasso->prefix.size()
              << " steps, cycle of " << r.cond3.targetLasso->cycle.size() << " steps at "
              << toHex(r.cond3.targetLasso->cycleStart) << "\n";
  }
  std::cout << (r.pass() ? "REFINEMENT PASS" : r.anyFail() ? "REFINEMENT FAIL" : "INCONCLUSIVE")
            << "\n";
}

template <class Sem>
int runExplore(const typename Sem::Config& initial, const ExploreLimits& lim, unsigned jobs,
               bool json) {
  auto g = explore<Sem>(initial, lim, jobs);
  std::size_t terminals = 0, stuckNodes = 0;
  std::vector<std::string> mains;
  for (const auto& node : g.nodes) {
    bool allVals = true;
    for (std::size_t i = 0; i < node.config.threads.size(); ++i) {
      if (!Sem::threadIsValue(node.config, i)) allVals = false;
    }
    if (allVals) {
      ++terminals;
      mains.push_back(Sem::printThread(node.config, 0));
    }
  }
  for (std::size_t n = 0; n < g.nodes.size(); ++n) {
    const auto& node = g.nodes[n];
    for (std::size_t i = 0; i < node.config.threads.size(); ++i) {
      if (Sem::threadIsValue(node.config, i)) continue;
      bool canStep = !node.expanded;
      for (const auto& e : node.out) {
        if (e.thread == static_cast<int>(i)) canStep = true;
      }
      if (!canStep) {
        ++stuckNodes;
        break;
      }
    }
  }
  if (json) {
    nlohmann::json j{{"states", g.nodes.size()},
                     {"edges", g.edgeCount()},
                     {"truncated", g.truncated},
                     {"terminalStates", terminals},
                     {"statesWithStuckThread", stuckNodes},
                     {"terminalMainValues", mains}};
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "states: " << g.nodes.size() << "\nedges: " << g.edgeCount()
              << "\ntruncated: " << (g.truncated ? "yes" : "no") << "\nterminal states: " << terminals
              << "\nstates with a stuck thread: " << stuckNodes << "\n";
    for (const auto& m : mains) std::cout << "terminal main value: " << m << "\n";
  }
  return g.truncated ? kExitInconclusive : kExitPass;
}

template <class Sem>
int runSchedule(const typename Sem::Config& initial, const std::vector<int>& schedule, bool json) {
  auto cfg = Sem::canonicalize(initial);
  nlohmann::json steps = nlohmann::json::array();
  for (std::size_t n = 0; n < schedule.size(); ++n) {
    int t = schedule[n];
    if (t < 0 || static_cast<std::size_t>(t) >= cfg.threads.size()) {
      std::cerr << "schedule step " << n << ": thread " << t << " does not exist\n";
      return kExitUsage;
    }
    auto next = Sem::stepPool(cfg, static_cast<std::size_t>(t));
    if (!next) {
      std::cerr << "schedule step " << n << ": thread " << t << " cannot step\n";
      return kExitUsage;
    }
    std::string redex = Sem::printRedex(cfg, static_cast<std::size_t>(t));
    if (json) {
      steps.push_back({{"step", n}, {"thread", t}, {"redex", redex}});
    } else {
      std::cout << "step " << n << ": thread " << t << "  " << redex << "\n";
    }
    cfg = Sem::canonicalize(*next);
  }
  std::string fp = toHex(fnv1a(Sem::serialize(cfg)));
  if (json) {
    nlohmann::json j{{"steps", steps}, {"finalFingerprint", fp}};
    nlohmann::json threads = nlohmann::json::array();
    for (std::size_t i = 0; i < cfg.threads.size(); ++i) threads.push_back(Sem::printThread(cfg, i));
    j["finalThreads"] = threads;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "final configuration (fingerprint " << fp << "):\n";
    for (std::size_t i = 0; i < cfg.threads.size(); ++i) {
      std::cout << "  [" << i << "] " << Sem::printThread(cfg, i) << "\n";
    }
  }
  return kExitPass;
}

std::vector<int> parseSchedule(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoi(item));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"session-typed source vs shared-memory target: compiler and refinement checker"};
  app.require_subcommand(1);

  bool json = false;
  std::size_t maxStates = 0, maxDepth = 0;
  unsigned jobs = 1;
  app.add_flag("--json", json, "emit JSON reports");
  app.add_option("--max-states", maxStates, "state limit for exploration");
  app.add_option("--max-depth", maxDepth, "depth limit for exploration");
  app.add_option("--jobs", jobs, "worker threads for exploration");

  std::string tcFile;
  auto* tc = app.add_subcommand("typecheck", "typecheck a .src program");
  tc->add_option("file", tcFile)->required();

  std::string cpFile, cpOut;
  auto* cp = app.add_subcommand("compile", "translate a .src program to MiniML");
  cp->add_option("file", cpFile)->required();
  cp->add_option("-o,--output", cpOut, "write the target program here");

  std::string runFile, runLang, schedText;
  bool bfsAll = false;
  auto* rn = app.add_subcommand("run", "run a program (schedule replay or full exploration)");
  rn->add_option("file", runFile)->required();
  rn->add_option("--lang", runLang, "src or tgt (default: by extension)");
  rn->add_option("--schedule", schedText, "comma-separated thread indices to replay");
  rn->add_flag("--bfs-all", bfsAll, "explore all interleavings (default)");

  std::string crSrc, crTgt;
  auto* cr = app.add_subcommand("check-refinement",
                                "check that a target refines a source program");
  cr->add_option("file", crSrc, "the .src program")->required();
  cr->add_option("--target", crTgt, "a .tgt program (default: compile the source)");

  std::string clFile;
  auto* cl = app.add_subcommand("check-locks",
                                "translate a ticket-lock program to CLH and check refinement");
  cl->add_option("file", clFile)->required();

  std::string grFile, grLang, grOut;
  auto* gr = app.add_subcommand("graph", "explore a program and dump the state graph as DOT");
  gr->add_option("file", grFile)->required();
  gr->add_option("--lang", grLang, "src or tgt (default: by extension)");
  gr->add_option("--emit-dot", grOut, "output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitUsage;
  }

  try {
    ExploreLimits lim = makeLimits(maxStates, maxDepth);

    if (*tc) {
      try {
        auto prog = parseSrc(readFile(tcFile));
        auto result = src::typecheck({}, prog);
        if (json) {
          nlohmann::json j{{"type", printType(result.type)},
                           {"used", std::vector<std::string>(result.used.begin(), result.used.end())}};
          std::cout << j.dump(2) << "\n";
        } else {
          std::cout << printType(result.type) << "\n";
        }
        return kExitPass;
      } catch (const src::TypeError& e) {
        if (json) {
          std::cout << nlohmann::json{{"error", e.what()}}.dump(2) << "\n";
        } else {
          std::cerr << "type error: " << e.what() << "\n";
        }
        return kExitCheckFailed;
      }
    }

    if (*cp) {
      auto prog = parseSrc(readFile(cpFile));
      src::typecheck({}, prog);
      auto target = compile(prog);
      std::string text = ml::printExpr(target);
      if (!cpOut.empty()) {
        std::ofstream out(cpOut);
        if (!out) throw std::runtime_error("cannot write " + cpOut);
        out << text << "\n";
      } else {
        std::cout << text << "\n";
      }
      return kExitPass;
    }

    if (*rn) {
      std::string lang = detectLang(runFile, runLang);
      std::string text = readFile(runFile);
      std::optional<std::vector<int>> schedule;
      if (!schedText.empty()) schedule = parseSchedule(schedText);
      if (lang == "src") {
        src::Config cfg{{parseSrc(text)}, {}};
        return schedule ? runSchedule<SrcSemantics>(cfg, *schedule, json)
                        : runExplore<SrcSemantics>(cfg, lim, jobs, json);
      }
      ml::Config cfg{{parseTgt(text)}, {}};
      return schedule ? runSchedule<MlSemantics>(cfg, *schedule, json)
                      : runExplore<MlSemantics>(cfg, lim, jobs, json);
    }

    if (*cr) {
      auto source = parseSrc(readFile(crSrc));
      try {
        src::typecheck({}, source);
      } catch (const src::TypeError& e) {
        if (json) {
          std::cout << nlohmann::json{{"error", e.what()}}.dump(2) << "\n";
        } else {
          std::cerr << "type error: " << e.what() << "\n";
        }
        return kExitCheckFailed;
      }
      ml::ExprPtr target = crTgt.empty() ? compile(source) : parseTgt(readFile(crTgt));
      auto report = checkRefinementSrcTgt(target, source, lim, jobs);
      if (json) {
        std::cout << toJson(report).dump(2) << "\n";
      } else {
        printHumanReport(report);
      }
      return reportExit(report);
    }

    if (*cl) {
      auto prog = parseTgt(readFile(clFile));
      try {
        auto result = locks::checkLocks(prog, lim, jobs);
        if (json) {
          nlohmann::json j = toJson(result.report);
          j["type"] = printMlType(result.type);
          j["clhProgram"] = ml::printExpr(result.clhProgram);
          std::cout << j.dump(2) << "\n";
        } else {
          std::cout << "translated type: " << printMlType(result.type) << "\n";
          printHumanReport(result.report);
        }
        return reportExit(result.report);
      } catch (const locks::LockTypeError& e) {
        if (json) {
          std::cout << nlohmann::json{{"error", e.what()}}.dump(2) << "\n";
        } else {
          std::cerr << "lock translation error: " << e.what() << "\n";
        }
        return kExitCheckFailed;
      }
    }

    if (*gr) {
      std::string lang = detectLang(grFile, grLang);
      std::string text = readFile(grFile);
      std::string dot;
      bool truncated = false;
      if (lang == "src") {
        auto g = explore<SrcSemantics>(src::Config{{parseSrc(text)}, {}}, lim, jobs);
        dot = toDot(g);
        truncated = g.truncated;
      } else {
        auto g = explore<MlSemantics>(ml::Config{{parseTgt(text)}, {}}, lim, jobs);
        dot = toDot(g);
        truncated = g.truncated;
      }
      if (!grOut.empty()) {
        std::ofstream out(grOut);
        if (!out) throw std::runtime_error("cannot write " + grOut);
        out << dot;
      } else {
        std::cout << dot;
      }
      return truncated ? kExitInconclusive : kExitPass;
    }
  } catch (const ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
