#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ptfcount/errors.hpp"

namespace ptf {

/// Combining function g: {-1,1}^k -> {0,1} given as a truth table.
/// Entry m is g on the sign pattern where bit l of m set means sign(q_l) = +1.
class BoolJunta {
 public:
  static constexpr std::size_t kMaxArity = 24;

  BoolJunta() : table_(1, 0) {}
  BoolJunta(std::size_t k, std::vector<std::uint8_t> table) : k_(k), table_(std::move(table)) {
    detail::require(k_ <= kMaxArity, "BoolJunta: arity above " + std::to_string(kMaxArity));
    detail::require(table_.size() == (std::size_t{1} << k_), "BoolJunta: table length must be 2^k");
    for (auto& v : table_) v = v ? 1 : 0;
  }

  /// Parses a string of '0'/'1' characters of length 2^k.
  static BoolJunta parse(std::size_t k, const std::string& bits) {
    detail::require(k <= kMaxArity, "BoolJunta: arity above " + std::to_string(kMaxArity));
    detail::require(bits.size() == (std::size_t{1} << k),
                    "BoolJunta: table has " + std::to_string(bits.size()) + " entries, expected " +
                        std::to_string(std::size_t{1} << k));
    std::vector<std::uint8_t> t(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) {
      detail::require(bits[i] == '0' || bits[i] == '1', "BoolJunta: table characters must be '0' or '1'");
      t[i] = bits[i] == '1';
    }
    return BoolJunta(k, std::move(t));
  }

  static BoolJunta constant(std::size_t k, bool value) {
    return BoolJunta(k, std::vector<std::uint8_t>(std::size_t{1} << k, value));
  }
  static BoolJunta identity() { return BoolJunta(1, {0, 1}); }
  static BoolJunta all_positive(std::size_t k) {
    auto g = constant(k, false);
    g.table_.back() = 1;
    return g;
  }
  static BoolJunta parity(std::size_t k) {
    std::vector<std::uint8_t> t(std::size_t{1} << k);
    for (std::size_t m = 0; m < t.size(); ++m) t[m] = __builtin_popcountll(m) & 1;
    return BoolJunta(k, std::move(t));
  }

  std::size_t arity() const { return k_; }
  std::size_t size() const { return table_.size(); }
  bool operator()(std::size_t pattern) const { return table_.at(pattern) != 0; }
  const std::vector<std::uint8_t>& table() const { return table_; }

  BoolJunta negated() const {
    BoolJunta g = *this;
    for (auto& v : g.table_) v ^= 1;
    return g;
  }

  bool is_constant() const {
    for (auto v : table_)
      if (v != table_.front()) return false;
    return true;
  }

  std::string to_string() const {
    std::string s(table_.size(), '0');
    for (std::size_t i = 0; i < table_.size(); ++i) s[i] = table_[i] ? '1' : '0';
    return s;
  }

  bool operator==(const BoolJunta&) const = default;

 private:
  std::size_t k_ = 0;
  std::vector<std::uint8_t> table_;
};

/// Fixes some inputs of g to +1/-1. Surviving inputs keep their relative order.
inline BoolJunta restrict_junta(const BoolJunta& g, const std::vector<std::pair<std::size_t, int>>& fixed) {
  const std::size_t k = g.arity();
  std::vector<int> value(k, 0);
  for (const auto& [coord, sign] : fixed) {
    if (coord >= k) throw InputError("restrict_junta: coordinate " + std::to_string(coord) + " out of range");
    detail::require(sign == 1 || sign == -1, "restrict_junta: fixed values must be +1 or -1");
    detail::require(value[coord] == 0 || value[coord] == sign, "restrict_junta: coordinate fixed twice");
    value[coord] = sign;
  }
  std::vector<std::size_t> free;
  std::size_t base = 0;
  for (std::size_t l = 0; l < k; ++l) {
    if (value[l] == 0)
      free.push_back(l);
    else if (value[l] == 1)
      base |= std::size_t{1} << l;
  }
  std::vector<std::uint8_t> table(std::size_t{1} << free.size());
  for (std::size_t m = 0; m < table.size(); ++m) {
    std::size_t full = base;
    for (std::size_t s = 0; s < free.size(); ++s)
      if (m >> s & 1) full |= std::size_t{1} << free[s];
    table[m] = g(full);
  }
  return BoolJunta(free.size(), std::move(table));
}

}  // namespace ptf
