#include "rler/label.hpp"

#include <cctype>

#include "rler/errors.hpp"

namespace rler {

AnswerLabel AnswerLabel::parse(std::string_view text) {
  std::string_view digits = text;
  const bool negative = !digits.empty() && digits.front() == '-';
  if (negative) digits.remove_prefix(1);
  if (digits.empty()) throw ParseError("empty integer label '" + std::string(text) + "'");
  for (char c : digits) {
    if (!std::isdigit(static_cast<unsigned char>(c))) {
      throw ParseError("non-digit in integer label '" + std::string(text) + "'");
    }
  }
  if (digits.size() > 1 && digits.front() == '0') {
    throw ParseError("leading zero in integer label '" + std::string(text) + "'");
  }
  if (negative && digits == "0") throw ParseError("non-canonical label '-0'");
  return AnswerLabel(BigInt(std::string(text)));
}

}  // namespace rler
