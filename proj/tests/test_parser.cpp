#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "sessrc/parser.hpp"

using namespace sessrc;
namespace fs = std::filesystem;

namespace {

std::string readFile(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<fs::path> corpusFiles(const std::string& subdir, const std::string& ext) {
  std::vector<fs::path> out;
  fs::path dir = fs::path(SESSRC_CORPUS_DIR) / subdir;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ext) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("the running example parses to the expected tree") {
  auto parsed = parseSrc(readFile(fs::path(SESSRC_CORPUS_DIR) / "running_example.src"));
  auto proto = sessSend(tyInt(), sessEnd());
  auto expected = src::mkLetPair(
      "x", "y", src::mkNewch(proto),
      src::mkForkSeq(src::mkSend(src::mkVar("x"), src::mkInt(42)),
                     src::mkLetPair("c", "v", src::mkRecv(src::mkVar("y")), src::mkVar("v"))));
  REQUIRE(src::equal(parsed, expected));
}

TEST_CASE("source parse errors carry positions") {
  SECTION("send is binary") {
    try {
      parseSrc("send x");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      REQUIRE(e.line == 1);
      REQUIRE(e.col >= 6);
    }
  }
  REQUIRE_THROWS_AS(parseSrc("let (x, x) = newch[!Int.end] in x"), ParseError);
  REQUIRE_THROWS_AS(parseSrc("fork 1"), ParseError);       // missing continuation
  REQUIRE_THROWS_AS(parseSrc("let in = 3 in in"), ParseError);
  REQUIRE_THROWS_AS(parseSrc("newch["), ParseError);
  REQUIRE_THROWS_AS(parseSrc("(1, 2"), ParseError);
  REQUIRE_THROWS_AS(parseSrc("42 43 ;"), ParseError);
  REQUIRE_THROWS_AS(parseSrc(""), ParseError);
}

TEST_CASE("session type syntax") {
  REQUIRE(sessionEqual(parseSessionType("!Int.end"), sessSend(tyInt(), sessEnd())));
  REQUIRE(sessionEqual(parseSessionType("?(Int).end"), sessRecv(tyInt(), sessEnd())));
  REQUIRE(sessionEqual(parseSessionType("!(!Int.end).end"),
                       sessSend(tySession(sessSend(tyInt(), sessEnd())), sessEnd())));
  REQUIRE(sessionEqual(parseSessionType("!Int.?Unit.end"),
                       sessSend(tyInt(), sessRecv(tyUnit(), sessEnd()))));
  REQUIRE(typeEqual(parseType("Int * Unit -o Int"),
                    tyLolli(tyTensor(tyInt(), tyUnit()), tyInt())));
  REQUIRE(typeEqual(parseType("(Int -o Int) * Unit"),
                    tyTensor(tyLolli(tyInt(), tyInt()), tyUnit())));
}

TEST_CASE("MiniML constructs parse") {
  auto e = parseTgt("if !r == 2 then fai c else swap c 0");
  const auto* ifE = std::get_if<ml::If>(&e->node);
  REQUIRE(ifE);
  REQUIRE(std::holds_alternative<ml::Binop>(ifE->cond->node));
  REQUIRE(std::holds_alternative<ml::Fai>(ifE->thenBranch->node));
  REQUIRE(std::holds_alternative<ml::Swap>(ifE->elseBranch->node));

  auto opt = parseTgt("match !l with none -> f l | some x -> x");
  REQUIRE(std::holds_alternative<ml::MatchOpt>(opt->node));

  auto sum = parseTgt("case s of inl a -> a == 0 | inr b -> b");
  REQUIRE(std::holds_alternative<ml::CaseSum>(sum->node));

  auto store = parseTgt("r := !r + 1");
  const auto* st = std::get_if<ml::Store>(&store->node);
  REQUIRE(st);
  REQUIRE(std::holds_alternative<ml::Binop>(st->value->node));

  auto seq = parseTgt("fork (f x); g y");
  const auto* sq = std::get_if<ml::Seq>(&seq->node);
  REQUIRE(sq);
  REQUIRE(std::holds_alternative<ml::Fork>(sq->first->node));

  auto ann = parseTgt("let s : Int + Bool = inl 0 in s");
  const auto* let = std::get_if<ml::Let>(&ann->node);
  REQUIRE(let);
  REQUIRE(let->ann);
  REQUIRE(ml::mlTypeEqual(let->ann, ml::tSum(ml::tInt(), ml::tBool())));

  auto rec = parseTgt("rec loop (x : Int) : Unit -> loop x");
  const auto* rf = std::get_if<ml::RecFun>(&rec->node);
  REQUIRE(rf);
  REQUIRE(ml::mlTypeEqual(rf->paramAnn, ml::tInt()));
  REQUIRE(ml::mlTypeEqual(rf->retAnn, ml::tUnit()));

  SECTION("arrow return annotations need parens and survive printing") {
    auto curried = parseTgt("rec f (x : Int) : (Int -> Int) -> f x");
    const auto* cf = std::get_if<ml::RecFun>(&curried->node);
    REQUIRE(cf);
    REQUIRE(ml::mlTypeEqual(cf->retAnn, ml::tArrow(ml::tInt(), ml::tInt())));
    REQUIRE(ml::equal(parseTgt(ml::printExpr(curried)), curried));
  }
}

TEST_CASE("MiniML type syntax") {
  REQUIRE(ml::mlTypeEqual(parseMlType("Int * Bool + Unit -> Lock"),
                          ml::tArrow(ml::tSum(ml::tProd(ml::tInt(), ml::tBool()), ml::tUnit()),
                                     ml::tLock())));
  REQUIRE(ml::mlTypeEqual(parseMlType("ref (Int + Bool)"),
                          ml::tRef(ml::tSum(ml::tInt(), ml::tBool()))));
}

TEST_CASE("MiniML parse errors") {
  REQUIRE_THROWS_AS(parseTgt("match x with some y -> y | none -> 0"), ParseError);
  REQUIRE_THROWS_AS(parseTgt("let (a, a) = p in a"), ParseError);
  REQUIRE_THROWS_AS(parseTgt("if x then 1"), ParseError);
  REQUIRE_THROWS_AS(parseTgt("x :="), ParseError);
}

TEST_CASE("source corpus round-trips through the printer") {
  auto files = corpusFiles("", ".src");
  REQUIRE(files.size() >= 12);
  for (const auto& f : files) {
    INFO(f.string());
    auto ast = parseSrc(readFile(f));
    auto reparsed = parseSrc(src::printExpr(ast));
    REQUIRE(src::equal(reparsed, ast));
  }
  for (const auto& f : corpusFiles("ill_typed", ".src")) {
    INFO(f.string());
    auto ast = parseSrc(readFile(f));
    REQUIRE(src::equal(parseSrc(src::printExpr(ast)), ast));
  }
}

TEST_CASE("target corpus round-trips through the printer") {
  std::vector<fs::path> files = corpusFiles("", ".tgt");
  for (const auto& sub : {"locks", "locks/raw", "locks/witness"}) {
    for (auto& f : corpusFiles(sub, ".tgt")) files.push_back(f);
  }
  REQUIRE(files.size() >= 8);
  for (const auto& f : files) {
    INFO(f.string());
    auto ast = parseTgt(readFile(f));
    auto reparsed = parseTgt(ml::printExpr(ast));
    REQUIRE(ml::equal(reparsed, ast));
  }
}

TEST_CASE("comments and whitespace are skipped") {
  auto e = parseSrc("-- leading comment\n  42 -- trailing\n");
  REQUIRE(src::equal(e, src::mkInt(42)));
}
