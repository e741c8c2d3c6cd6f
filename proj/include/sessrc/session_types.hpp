#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <variant>

#include "sessrc/util.hpp"

namespace sessrc {

struct Type;
struct SessionType;
using TypePtr = std::shared_ptr<const Type>;
using SessionPtr = std::shared_ptr<const SessionType>;

// Session protocols: !t.S sends a t then continues as S, ?t.S receives one.
struct SendProto {
  TypePtr payload;
  SessionPtr cont;
};
struct RecvProto {
  TypePtr payload;
  SessionPtr cont;
};
struct EndProto {};

struct SessionType {
  std::variant<SendProto, RecvProto, EndProto> node;
};

struct IntType {};
struct UnitType {};
struct TensorType {
  TypePtr first;
  TypePtr second;
};
struct LolliType {
  TypePtr arg;
  TypePtr result;
};
// A session protocol used as an ambient type (the type of an endpoint).
struct SessionEmbed {
  SessionPtr proto;
};

struct Type {
  std::variant<IntType, UnitType, TensorType, LolliType, SessionEmbed> node;
};

inline TypePtr tyInt() {
  static const TypePtr t = std::make_shared<Type>(Type{IntType{}});
  return t;
}
inline TypePtr tyUnit() {
  static const TypePtr t = std::make_shared<Type>(Type{UnitType{}});
  return t;
}
inline TypePtr tyTensor(TypePtr a, TypePtr b) {
  return std::make_shared<Type>(Type{TensorType{std::move(a), std::move(b)}});
}
inline TypePtr tyLolli(TypePtr a, TypePtr b) {
  return std::make_shared<Type>(Type{LolliType{std::move(a), std::move(b)}});
}
inline TypePtr tySession(SessionPtr s) {
  return std::make_shared<Type>(Type{SessionEmbed{std::move(s)}});
}

inline SessionPtr sessEnd() {
  static const SessionPtr s = std::make_shared<SessionType>(SessionType{EndProto{}});
  return s;
}
inline SessionPtr sessSend(TypePtr payload, SessionPtr cont) {
  return std::make_shared<SessionType>(SessionType{SendProto{std::move(payload), std::move(cont)}});
}
inline SessionPtr sessRecv(TypePtr payload, SessionPtr cont) {
  return std::make_shared<SessionType>(SessionType{RecvProto{std::move(payload), std::move(cont)}});
}

bool typeEqual(const TypePtr& a, const TypePtr& b);

inline bool sessionEqual(const SessionPtr& a, const SessionPtr& b) {
  if (a.get() == b.get()) return true;
  return std::visit(
      overloaded{
          [&](const SendProto& l) {
            auto* r = std::get_if<SendProto>(&b->node);
            return r && typeEqual(l.payload, r->payload) && sessionEqual(l.cont, r->cont);
          },
          [&](const RecvProto& l) {
            auto* r = std::get_if<RecvProto>(&b->node);
            return r && typeEqual(l.payload, r->payload) && sessionEqual(l.cont, r->cont);
          },
          [&](const EndProto&) { return std::holds_alternative<EndProto>(b->node); },
      },
      a->node);
}

inline bool typeEqual(const TypePtr& a, const TypePtr& b) {
  if (a.get() == b.get()) return true;
  return std::visit(
      overloaded{
          [&](const IntType&) { return std::holds_alternative<IntType>(b->node); },
          [&](const UnitType&) { return std::holds_alternative<UnitType>(b->node); },
          [&](const TensorType& l) {
            auto* r = std::get_if<TensorType>(&b->node);
            return r && typeEqual(l.first, r->first) && typeEqual(l.second, r->second);
          },
          [&](const LolliType& l) {
            auto* r = std::get_if<LolliType>(&b->node);
            return r && typeEqual(l.arg, r->arg) && typeEqual(l.result, r->result);
          },
          [&](const SessionEmbed& l) {
            auto* r = std::get_if<SessionEmbed>(&b->node);
            return r && sessionEqual(l.proto, r->proto);
          },
      },
      a->node);
}

// Swap sends and receives all the way down.
inline SessionPtr dual(const SessionPtr& s) {
  return std::visit(
      overloaded{
          [&](const SendProto& p) { return sessRecv(p.payload, dual(p.cont)); },
          [&](const RecvProto& p) { return sessSend(p.payload, dual(p.cont)); },
          [&](const EndProto&) { return sessEnd(); },
      },
      s->node);
}

// Number of !/? constructors on the spine.
inline std::size_t depth(const SessionPtr& s) {
  return std::visit(
      overloaded{
          [&](const SendProto& p) { return depth(p.cont) + 1; },
          [&](const RecvProto& p) { return depth(p.cont) + 1; },
          [&](const EndProto&) { return std::size_t{0}; },
      },
      s->node);
}

// The protocol after n messages have been exchanged.
inline SessionPtr advanceSession(const SessionPtr& s, std::size_t n) {
  SessionPtr cur = s;
  for (std::size_t i = 0; i < n; ++i) {
    if (const auto* snd = std::get_if<SendProto>(&cur->node)) {
      cur = snd->cont;
    } else if (const auto* rcv = std::get_if<RecvProto>(&cur->node)) {
      cur = rcv->cont;
    } else {
      throw std::out_of_range("advance past end");
    }
  }
  return cur;
}

std::string printType(const TypePtr& t);

namespace detail {

// Payloads print at atom level; session payloads always get parens so the
// output re-parses without relying on the greedy '.'-continuation rule.
inline std::string printTypeAtom(const TypePtr& t) {
  if (std::holds_alternative<IntType>(t->node) || std::holds_alternative<UnitType>(t->node)) {
    return printType(t);
  }
  return "(" + printType(t) + ")";
}

}  // namespace detail

inline std::string printSession(const SessionPtr& s) {
  return std::visit(
      overloaded{
          [&](const SendProto& p) {
            return "!" + detail::printTypeAtom(p.payload) + "." + printSession(p.cont);
          },
          [&](const RecvProto& p) {
            return "?" + detail::printTypeAtom(p.payload) + "." + printSession(p.cont);
          },
          [&](const EndProto&) { return std::string("end"); },
      },
      s->node);
}

inline std::string printType(const TypePtr& t) {
  return std::visit(
      overloaded{
          [&](const IntType&) { return std::string("Int"); },
          [&](const UnitType&) { return std::string("Unit"); },
          [&](const TensorType& p) {
            return detail::printTypeAtom(p.first) + " * " + detail::printTypeAtom(p.second);
          },
          [&](const LolliType& p) {
            std::string lhs = std::holds_alternative<LolliType>(p.arg->node)
                                  ? "(" + printType(p.arg) + ")"
                                  : printType(p.arg);
            if (std::holds_alternative<TensorType>(p.arg->node)) lhs = "(" + printType(p.arg) + ")";
            return lhs + " -o " + printType(p.result);
          },
          [&](const SessionEmbed& p) {
            return std::visit(
                overloaded{
                    [&](const SendProto& sp) {
                      return "!" + detail::printTypeAtom(sp.payload) + "." + printSession(sp.cont);
                    },
                    [&](const RecvProto& sp) {
                      return "?" + detail::printTypeAtom(sp.payload) + "." + printSession(sp.cont);
                    },
                    [&](const EndProto&) { return std::string("end"); },
                },
                p.proto->node);
          },
      },
      t->node);
}

}  // namespace sessrc
