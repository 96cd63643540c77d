#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace pdgsem {

// A runtime value: a 64-bit signed integer or one of the truth values T/F.
// Truth values are distinct from every integer.
class Value {
 public:
  enum class Kind : uint8_t { Int, True, False };

  constexpr Value() : kind_(Kind::Int), num_(0) {}

  static constexpr Value integer(int64_t v) { return Value(Kind::Int, v); }
  static constexpr Value truth(bool b) {
    return Value(b ? Kind::True : Kind::False, 0);
  }

  Kind kind() const { return kind_; }
  bool is_int() const { return kind_ == Kind::Int; }
  bool is_truth() const { return kind_ != Kind::Int; }
  bool truth_value() const { return kind_ == Kind::True; }
  int64_t as_int() const { return num_; }

  auto operator<=>(const Value&) const = default;

 private:
  constexpr Value(Kind k, int64_t v) : kind_(k), num_(v) {}

  Kind kind_;
  int64_t num_;
};

std::string to_string(const Value& v);

}  // namespace pdgsem
