#pragma once

#include <compare>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace rler {

using BigInt = boost::multiprecision::cpp_int;

/// An exact integer answer. Labels order numerically, which is also the
/// canonical tie-break order used wherever an argmax over labels is taken.
class AnswerLabel {
 public:
  AnswerLabel() = default;
  explicit AnswerLabel(BigInt value) : value_(std::move(value)) {}
  explicit AnswerLabel(std::int64_t value) : value_(value) {}

  /// Parses canonical decimal text: optional '-', no leading zeros, no "-0".
  static AnswerLabel parse(std::string_view text);

  const BigInt& value() const noexcept { return value_; }
  std::string text() const { return value_.str(); }

  friend bool operator==(const AnswerLabel& a, const AnswerLabel& b) {
    return a.value_ == b.value_;
  }
  friend std::strong_ordering operator<=>(const AnswerLabel& a, const AnswerLabel& b) {
    const int c = a.value_.compare(b.value_);
    return c < 0 ? std::strong_ordering::less
                 : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

  friend std::ostream& operator<<(std::ostream& os, const AnswerLabel& l) {
    return os << l.value_;
  }

 private:
  BigInt value_;
};

}  // namespace rler
