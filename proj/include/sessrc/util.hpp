#pragma once

#include <atomic>
#include <cstdint>
#include <string>

namespace sessrc {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// FNV-1a, used for stable state fingerprints (node labels in DOT dumps and
// witness reports must not vary across runs or platforms).
inline std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string toHex(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

namespace detail {

inline std::atomic<std::uint64_t>& freshNameCounter() {
  static std::atomic<std::uint64_t> counter{0};
  return counter;
}

}  // namespace detail

// Fresh names contain '$', which the lexer rejects, so they can never
// collide with a name from a parsed program.
inline std::string freshName(const std::string& base) {
  std::string stem = base.substr(0, base.find('$'));
  return stem + "$" + std::to_string(detail::freshNameCounter().fetch_add(1) + 1);
}

}  // namespace sessrc
