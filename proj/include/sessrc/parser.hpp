#pragma once

#include <cctype>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sessrc/miniml.hpp"
#include "sessrc/session_types.hpp"
#include "sessrc/source_lang.hpp"

namespace sessrc {

struct ParseError : std::runtime_error {
  int line;
  int col;
  ParseError(int l, int c, const std::string& msg)
      : std::runtime_error("parse error at " + std::to_string(l) + ":" + std::to_string(c) + ": " +
                           msg),
        line(l),
        col(c) {}
};

namespace parse_detail {

enum class Tok {
  Ident,
  Int,
  LParen,
  RParen,
  LBracket,
  RBracket,
  Comma,
  Semi,
  Colon,
  Dot,
  Pipe,
  Arrow,   // ->
  Lolli,   // -o
  Bang,    // !
  Question,
  Star,
  Plus,
  EqEq,    // ==
  Eq,      // =
  Assign,  // :=
  Eof,
};

struct Token {
  Tok kind;
  std::string text;
  int line;
  int col;
};

inline const char* tokName(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::Int: return "integer";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::Comma: return "','";
    case Tok::Semi: return "';'";
    case Tok::Colon: return "':'";
    case Tok::Dot: return "'.'";
    case Tok::Pipe: return "'|'";
    case Tok::Arrow: return "'->'";
    case Tok::Lolli: return "'-o'";
    case Tok::Bang: return "'!'";
    case Tok::Question: return "'?'";
    case Tok::Star: return "'*'";
    case Tok::Plus: return "'+'";
    case Tok::EqEq: return "'=='";
    case Tok::Eq: return "'='";
    case Tok::Assign: return "':='";
    case Tok::Eof: return "end of input";
  }
  return "?";
}

inline std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto bump = [&](char c) {
    if (c == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      bump(c);
      ++i;
      continue;
    }
    if (c == '-' && i + 1 < text.size() && text[i + 1] == '-') {
      while (i < text.size() && text[i] != '\n') {
        bump(text[i]);
        ++i;
      }
      continue;
    }
    int tl = line, tc = col;
    auto push = [&](Tok kind, std::string tokText) {
      out.push_back({kind, std::move(tokText), tl, tc});
    };
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::string num;
      while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
        num += text[i];
        bump(text[i]);
        ++i;
      }
      if (i < text.size() && (std::isalpha(static_cast<unsigned char>(text[i])) || text[i] == '_')) {
        throw ParseError(line, col, "identifier cannot start with a digit");
      }
      push(Tok::Int, num);
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string id;
      while (i < text.size() && (std::isalnum(static_cast<unsigned char>(text[i])) ||
                                 text[i] == '_' || text[i] == '\'')) {
        id += text[i];
        bump(text[i]);
        ++i;
      }
      push(Tok::Ident, id);
      continue;
    }
    auto two = [&](char second) { return i + 1 < text.size() && text[i + 1] == second; };
    switch (c) {
      case '(': push(Tok::LParen, "("); break;
      case ')': push(Tok::RParen, ")"); break;
      case '[': push(Tok::LBracket, "["); break;
      case ']': push(Tok::RBracket, "]"); break;
      case ',': push(Tok::Comma, ","); break;
      case ';': push(Tok::Semi, ";"); break;
      case '.': push(Tok::Dot, "."); break;
      case '|': push(Tok::Pipe, "|"); break;
      case '!': push(Tok::Bang, "!"); break;
      case '?': push(Tok::Question, "?"); break;
      case '*': push(Tok::Star, "*"); break;
      case '+': push(Tok::Plus, "+"); break;
      case ':':
        if (two('=')) {
          push(Tok::Assign, ":=");
          bump(text[i]);
          ++i;
        } else {
          push(Tok::Colon, ":");
        }
        break;
      case '=':
        if (two('=')) {
          push(Tok::EqEq, "==");
          bump(text[i]);
          ++i;
        } else {
          push(Tok::Eq, "=");
        }
        break;
      case '-':
        if (two('>')) {
          push(Tok::Arrow, "->");
          bump(text[i]);
          ++i;
        } else if (two('o')) {
          push(Tok::Lolli, "-o");
          bump(text[i]);
          ++i;
        } else {
          throw ParseError(line, col, "unexpected '-'");
        }
        break;
      default:
        throw ParseError(line, col, std::string("unexpected character '") + c + "'");
    }
    bump(c);
    ++i;
  }
  out.push_back({Tok::Eof, "", line, col});
  return out;
}

class TokenStream {
 public:
  explicit TokenStream(std::vector<Token> toks) : toks_(std::move(toks)) {}

  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = pos_ + ahead;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  const Token& next() {
    const Token& t = peek();
    if (t.kind != Tok::Eof) ++pos_;
    return t;
  }
  bool at(Tok k) const { return peek().kind == k; }
  bool atIdent(const char* word) const {
    return peek().kind == Tok::Ident && peek().text == word;
  }
  bool eat(Tok k) {
    if (!at(k)) return false;
    next();
    return true;
  }
  bool eatIdent(const char* word) {
    if (!atIdent(word)) return false;
    next();
    return true;
  }
  const Token& expect(Tok k, const char* what) {
    if (!at(k)) fail(std::string("expected ") + what + ", found '" + describe(peek()) + "'");
    return toks_[pos_++];
  }
  void expectIdent(const char* word) {
    if (!atIdent(word)) {
      fail(std::string("expected '") + word + "', found '" + describe(peek()) + "'");
    }
    next();
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(peek().line, peek().col, msg);
  }

  static std::string describe(const Token& t) {
    return t.text.empty() ? tokName(t.kind) : t.text;
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

// --- type grammars ---

TypePtr parseSrcType(TokenStream& ts);

inline bool atSessionStart(const TokenStream& ts) {
  return ts.at(Tok::Bang) || ts.at(Tok::Question) || ts.atIdent("end");
}

inline SessionPtr parseSessionTy(TokenStream& ts) {
  if (ts.eatIdent("end")) return sessEnd();
  bool send = ts.at(Tok::Bang);
  if (!send && !ts.at(Tok::Question)) ts.fail("expected a session type ('!', '?' or 'end')");
  ts.next();
  TypePtr payload;
  if (ts.eat(Tok::LParen)) {
    payload = parseSrcType(ts);
    ts.expect(Tok::RParen, "')'");
  } else if (ts.eatIdent("Int")) {
    payload = tyInt();
  } else if (ts.eatIdent("Unit")) {
    payload = tyUnit();
  } else if (atSessionStart(ts)) {
    payload = tySession(parseSessionTy(ts));
  } else {
    ts.fail("expected a payload type");
  }
  ts.expect(Tok::Dot, "'.'");
  SessionPtr cont = parseSessionTy(ts);
  return send ? sessSend(payload, cont) : sessRecv(payload, cont);
}

inline TypePtr parseSrcTypeAtom(TokenStream& ts) {
  if (ts.eat(Tok::LParen)) {
    TypePtr t = parseSrcType(ts);
    ts.expect(Tok::RParen, "')'");
    return t;
  }
  if (ts.eatIdent("Int")) return tyInt();
  if (ts.eatIdent("Unit")) return tyUnit();
  if (atSessionStart(ts)) return tySession(parseSessionTy(ts));
  ts.fail("expected a type");
}

inline TypePtr parseSrcType(TokenStream& ts) {
  TypePtr t = parseSrcTypeAtom(ts);
  while (ts.at(Tok::Star)) {
    ts.next();
    t = tyTensor(t, parseSrcTypeAtom(ts));
  }
  if (ts.eat(Tok::Lolli)) return tyLolli(t, parseSrcType(ts));
  return t;
}

ml::MlTypePtr parseMlTy(TokenStream& ts);

inline ml::MlTypePtr parseMlTyAtom(TokenStream& ts) {
  if (ts.eat(Tok::LParen)) {
    ml::MlTypePtr t = parseMlTy(ts);
    ts.expect(Tok::RParen, "')'");
    return t;
  }
  if (ts.eatIdent("Int")) return ml::tInt();
  if (ts.eatIdent("Bool")) return ml::tBool();
  if (ts.eatIdent("Unit")) return ml::tUnit();
  if (ts.eatIdent("Lock")) return ml::tLock();
  if (ts.eatIdent("ref")) return ml::tRef(parseMlTyAtom(ts));
  ts.fail("expected a type");
}

// Products and sums, no top-level arrow: used where a following '->' has
// another meaning (rec return annotations).
inline ml::MlTypePtr parseMlTySum(TokenStream& ts) {
  ml::MlTypePtr t = parseMlTyAtom(ts);
  while (ts.at(Tok::Star)) {
    ts.next();
    t = ml::tProd(t, parseMlTyAtom(ts));
  }
  while (ts.at(Tok::Plus)) {
    ts.next();
    ml::MlTypePtr rhs = parseMlTyAtom(ts);
    while (ts.at(Tok::Star)) {
      ts.next();
      rhs = ml::tProd(rhs, parseMlTyAtom(ts));
    }
    t = ml::tSum(t, rhs);
  }
  return t;
}

inline ml::MlTypePtr parseMlTy(TokenStream& ts) {
  ml::MlTypePtr t = parseMlTySum(ts);
  if (ts.eat(Tok::Arrow)) return ml::tArrow(t, parseMlTy(ts));
  return t;
}

// --- source expression grammar ---

inline const std::set<std::string>& srcKeywords() {
  static const std::set<std::string> kw = {"fun", "let", "in", "fork", "newch", "send", "recv"};
  return kw;
}

class SrcParser {
 public:
  explicit SrcParser(TokenStream ts) : ts_(std::move(ts)) {}

  src::ExprPtr parseProgram() {
    src::ExprPtr e = parseExpr();
    ts_.expect(Tok::Eof, "end of input");
    return e;
  }

 private:
  TokenStream ts_;

  std::string ident() {
    const Token& t = ts_.expect(Tok::Ident, "an identifier");
    if (srcKeywords().count(t.text)) {
      throw ParseError(t.line, t.col, "'" + t.text + "' is a keyword");
    }
    return t.text;
  }

  bool atAtomStart() const {
    if (ts_.at(Tok::Int) || ts_.at(Tok::LParen)) return true;
    if (!ts_.at(Tok::Ident)) return false;
    const std::string& w = ts_.peek().text;
    return w == "newch" || !srcKeywords().count(w);
  }

  src::ExprPtr parseExpr() {
    if (ts_.eatIdent("fun")) {
      auto [name, ann] = parseParam();
      ts_.expect(Tok::Arrow, "'->'");
      return src::mkLambda(name, parseExpr(), ann);
    }
    if (ts_.atIdent("let")) {
      ts_.next();
      if (ts_.eat(Tok::LParen)) {
        std::string x = ident();
        ts_.expect(Tok::Comma, "','");
        const Token& yTok = ts_.peek();
        std::string y = ident();
        if (x == y) throw ParseError(yTok.line, yTok.col, "pattern variables must differ");
        ts_.expect(Tok::RParen, "')'");
        ts_.expect(Tok::Eq, "'='");
        src::ExprPtr bound = parseExpr();
        ts_.expectIdent("in");
        return src::mkLetPair(x, y, bound, parseExpr());
      }
      std::string x = ident();
      ts_.expect(Tok::Eq, "'='");
      src::ExprPtr bound = parseExpr();
      ts_.expectIdent("in");
      return src::mkLet(x, bound, parseExpr());
    }
    if (ts_.eatIdent("fork")) {
      src::ExprPtr child = parseExpr();
      ts_.expect(Tok::Semi, "';' (fork takes a continuation)");
      return src::mkForkSeq(child, parseExpr());
    }
    return parseApp();
  }

  std::pair<std::string, TypePtr> parseParam() {
    if (ts_.eat(Tok::LParen)) {
      std::string name = ident();
      ts_.expect(Tok::Colon, "':'");
      TypePtr ty = parseSrcType(ts_);
      ts_.expect(Tok::RParen, "')'");
      return {name, ty};
    }
    return {ident(), nullptr};
  }

  src::ExprPtr parseApp() {
    src::ExprPtr head;
    if (ts_.eatIdent("send")) {
      src::ExprPtr chan = parseAtom();
      src::ExprPtr payload = parseAtom();
      head = src::mkSend(chan, payload);
    } else if (ts_.eatIdent("recv")) {
      head = src::mkRecv(parseAtom());
    } else {
      head = parseAtom();
    }
    while (atAtomStart()) head = src::mkApp(head, parseAtom());
    return head;
  }

  src::ExprPtr parseAtom() {
    if (ts_.at(Tok::Int)) {
      return src::mkInt(std::stoll(ts_.next().text));
    }
    if (ts_.eatIdent("newch")) {
      if (ts_.eat(Tok::LBracket)) {
        SessionPtr proto = parseSessionTy(ts_);
        ts_.expect(Tok::RBracket, "']'");
        return src::mkNewch(proto);
      }
      return src::mkNewch();
    }
    if (ts_.eat(Tok::LParen)) {
      if (ts_.eat(Tok::RParen)) return src::mkUnit();
      src::ExprPtr first = parseExpr();
      if (ts_.eat(Tok::Comma)) {
        src::ExprPtr second = parseExpr();
        ts_.expect(Tok::RParen, "')'");
        return src::mkPair(first, second);
      }
      ts_.expect(Tok::RParen, "')'");
      return first;
    }
    return src::mkVar(ident());
  }
};

// --- MiniML expression grammar ---

inline const std::set<std::string>& mlKeywords() {
  static const std::set<std::string> kw = {
      "fun",  "rec",  "let",  "in",   "fork", "if",   "then", "else", "match", "with", "none",
      "some", "case", "of",   "inl",  "inr",  "ref",  "fai",  "swap", "true",  "false", "fst",
      "snd"};
  return kw;
}

class MlParser {
 public:
  explicit MlParser(TokenStream ts) : ts_(std::move(ts)) {}

  ml::ExprPtr parseProgram() {
    ml::ExprPtr e = parseExpr();
    ts_.expect(Tok::Eof, "end of input");
    return e;
  }

 private:
  TokenStream ts_;

  std::string ident() {
    const Token& t = ts_.expect(Tok::Ident, "an identifier");
    if (mlKeywords().count(t.text)) {
      throw ParseError(t.line, t.col, "'" + t.text + "' is a keyword");
    }
    return t.text;
  }

  bool atAtomStart() const {
    if (ts_.at(Tok::Int) || ts_.at(Tok::LParen)) return true;
    if (!ts_.at(Tok::Ident)) return false;
    const std::string& w = ts_.peek().text;
    return w == "true" || w == "false" || w == "none" || !mlKeywords().count(w);
  }

  bool atUnaryStart() const {
    if (atAtomStart() || ts_.at(Tok::Bang)) return true;
    if (!ts_.at(Tok::Ident)) return false;
    const std::string& w = ts_.peek().text;
    return w == "ref" || w == "fai" || w == "fst" || w == "snd" || w == "inl" || w == "inr" ||
           w == "some" || w == "swap";
  }

  ml::ExprPtr parseExpr() {
    if (ts_.eatIdent("fun")) {
      auto [name, ann] = parseParam();
      ts_.expect(Tok::Arrow, "'->'");
      return ml::mkLambda(name, parseExpr(), ann);
    }
    if (ts_.eatIdent("rec")) {
      std::string f = ident();
      auto [x, paramAnn] = parseParam();
      ml::MlTypePtr retAnn;
      // The annotation stops before '->'; arrow-typed results need parens.
      if (ts_.eat(Tok::Colon)) retAnn = parseMlTySum(ts_);
      ts_.expect(Tok::Arrow, "'->'");
      return ml::mkRecFun(f, x, parseExpr(), paramAnn, retAnn);
    }
    if (ts_.atIdent("let")) {
      ts_.next();
      if (ts_.eat(Tok::LParen)) {
        std::string x = ident();
        ts_.expect(Tok::Comma, "','");
        const Token& yTok = ts_.peek();
        std::string y = ident();
        if (x == y) throw ParseError(yTok.line, yTok.col, "pattern variables must differ");
        ts_.expect(Tok::RParen, "')'");
        ts_.expect(Tok::Eq, "'='");
        ml::ExprPtr bound = parseExpr();
        ts_.expectIdent("in");
        return ml::mkLetPair(x, y, bound, parseExpr());
      }
      std::string x = ident();
      ml::MlTypePtr ann;
      if (ts_.eat(Tok::Colon)) ann = parseMlTy(ts_);
      ts_.expect(Tok::Eq, "'='");
      ml::ExprPtr bound = parseExpr();
      ts_.expectIdent("in");
      return ml::mkLet(x, bound, parseExpr(), ann);
    }
    if (ts_.eatIdent("if")) {
      ml::ExprPtr cond = parseExpr();
      ts_.expectIdent("then");
      ml::ExprPtr thenB = parseExpr();
      ts_.expectIdent("else");
      return ml::mkIf(cond, thenB, parseExpr());
    }
    if (ts_.eatIdent("match")) {
      ml::ExprPtr scrut = parseExpr();
      ts_.expectIdent("with");
      ts_.expectIdent("none");
      ts_.expect(Tok::Arrow, "'->'");
      ml::ExprPtr noneBody = parseExpr();
      ts_.expect(Tok::Pipe, "'|'");
      ts_.expectIdent("some");
      std::string x = ident();
      ts_.expect(Tok::Arrow, "'->'");
      return ml::mkMatchOpt(scrut, noneBody, x, parseExpr());
    }
    if (ts_.eatIdent("case")) {
      ml::ExprPtr scrut = parseExpr();
      ts_.expectIdent("of");
      ts_.expectIdent("inl");
      std::string xl = ident();
      ts_.expect(Tok::Arrow, "'->'");
      ml::ExprPtr left = parseExpr();
      ts_.expect(Tok::Pipe, "'|'");
      ts_.expectIdent("inr");
      std::string xr = ident();
      ts_.expect(Tok::Arrow, "'->'");
      return ml::mkCase(scrut, xl, left, xr, parseExpr());
    }
    return parseSeq();
  }

  std::pair<std::string, ml::MlTypePtr> parseParam() {
    if (ts_.eat(Tok::LParen)) {
      std::string name = ident();
      ts_.expect(Tok::Colon, "':'");
      ml::MlTypePtr ty = parseMlTy(ts_);
      ts_.expect(Tok::RParen, "')'");
      return {name, ty};
    }
    return {ident(), nullptr};
  }

  ml::ExprPtr parseSeq() {
    ml::ExprPtr first = parseAssign();
    if (ts_.eat(Tok::Semi)) return ml::mkSeq(first, parseExpr());
    return first;
  }

  ml::ExprPtr parseAssign() {
    if (ts_.eatIdent("fork")) return ml::mkFork(parseAssign());
    ml::ExprPtr target = parseCmp();
    if (ts_.eat(Tok::Assign)) return ml::mkStore(target, parseAssign());
    return target;
  }

  ml::ExprPtr parseCmp() {
    ml::ExprPtr lhs = parseAdd();
    if (ts_.eat(Tok::EqEq)) return ml::mkBinop(ml::BinOp::Eq, lhs, parseAdd());
    return lhs;
  }

  ml::ExprPtr parseAdd() {
    ml::ExprPtr acc = parseAppChain();
    while (ts_.eat(Tok::Plus)) acc = ml::mkBinop(ml::BinOp::Add, acc, parseAppChain());
    return acc;
  }

  ml::ExprPtr parseAppChain() {
    ml::ExprPtr head = parseUnary();
    while (atUnaryStart()) head = ml::mkApp(head, parseUnary());
    return head;
  }

  ml::ExprPtr parseUnary() {
    if (ts_.eat(Tok::Bang)) return ml::mkLoad(parseUnary());
    if (ts_.atIdent("ref")) {
      ts_.next();
      return ml::mkAlloc(parseUnary());
    }
    if (ts_.atIdent("fai")) {
      ts_.next();
      return ml::mkFai(parseUnary());
    }
    if (ts_.atIdent("fst")) {
      ts_.next();
      return ml::mkFst(parseUnary());
    }
    if (ts_.atIdent("snd")) {
      ts_.next();
      return ml::mkSnd(parseUnary());
    }
    if (ts_.atIdent("inl")) {
      ts_.next();
      return ml::mkInl(parseUnary());
    }
    if (ts_.atIdent("inr")) {
      ts_.next();
      return ml::mkInr(parseUnary());
    }
    if (ts_.atIdent("some")) {
      ts_.next();
      return ml::mkSome(parseUnary());
    }
    if (ts_.atIdent("swap")) {
      ts_.next();
      ml::ExprPtr target = parseUnary();
      return ml::mkSwap(target, parseUnary());
    }
    return parseAtom();
  }

  ml::ExprPtr parseAtom() {
    if (ts_.at(Tok::Int)) return ml::mkInt(std::stoll(ts_.next().text));
    if (ts_.eatIdent("true")) return ml::mkBool(true);
    if (ts_.eatIdent("false")) return ml::mkBool(false);
    if (ts_.eatIdent("none")) return ml::mkNone();
    if (ts_.eat(Tok::LParen)) {
      if (ts_.eat(Tok::RParen)) return ml::mkUnit();
      ml::ExprPtr first = parseExpr();
      if (ts_.eat(Tok::Comma)) {
        ml::ExprPtr second = parseExpr();
        ts_.expect(Tok::RParen, "')'");
        return ml::mkPair(first, second);
      }
      ts_.expect(Tok::RParen, "')'");
      return first;
    }
    return ml::mkVar(ident());
  }
};

}  // namespace parse_detail

inline src::ExprPtr parseSrc(const std::string& text) {
  parse_detail::SrcParser p(parse_detail::TokenStream(parse_detail::tokenize(text)));
  return p.parseProgram();
}

inline ml::ExprPtr parseTgt(const std::string& text) {
  parse_detail::MlParser p(parse_detail::TokenStream(parse_detail::tokenize(text)));
  return p.parseProgram();
}

inline SessionPtr parseSessionType(const std::string& text) {
  parse_detail::TokenStream ts(parse_detail::tokenize(text));
  SessionPtr s = parse_detail::parseSessionTy(ts);
  ts.expect(parse_detail::Tok::Eof, "end of input");
  return s;
}

inline TypePtr parseType(const std::string& text) {
  parse_detail::TokenStream ts(parse_detail::tokenize(text));
  TypePtr t = parse_detail::parseSrcType(ts);
  ts.expect(parse_detail::Tok::Eof, "end of input");
  return t;
}

inline ml::MlTypePtr parseMlType(const std::string& text) {
  parse_detail::TokenStream ts(parse_detail::tokenize(text));
  ml::MlTypePtr t = parse_detail::parseMlTy(ts);
  ts.expect(parse_detail::Tok::Eof, "end of input");
  return t;
}

}  // namespace sessrc
