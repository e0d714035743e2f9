#include "rler/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <optional>

#include <nlohmann/json.hpp>

#include "rler/errors.hpp"
#include "rler/rng.hpp"

namespace rler {

namespace {

// Quotient and remainder with the quotient floored, so that the remainder
// carries the divisor's sign and a == q * b + r.
std::pair<BigInt, BigInt> floor_divmod(const BigInt& a, const BigInt& b) {
  if (b == 0) throw EvalError("division or modulo by zero");
  BigInt q = a / b;
  BigInt r = a % b;
  if (r != 0 && ((r < 0) != (b < 0))) {
    q -= 1;
    r += b;
  }
  return {q, r};
}

BigInt apply(Operator op, const BigInt& lhs, const BigInt& rhs) {
  switch (op) {
    case Operator::add:
      return lhs + rhs;
    case Operator::sub:
      return lhs - rhs;
    case Operator::floordiv:
      return floor_divmod(lhs, rhs).first;
    case Operator::mod:
      return floor_divmod(lhs, rhs).second;
  }
  return {};
}

// BigInt's string constructor reads a leading 0 as an octal prefix, so
// decimal digit strings are stripped of leading zeros first.
BigInt from_decimal_digits(std::string_view digits) {
  const auto first = digits.find_first_not_of('0');
  if (first == std::string_view::npos) return BigInt(0);
  return BigInt(std::string(digits.substr(first)));
}

// Recursive-descent evaluator:
//   expr  := term (('+' | '-') term)*
//   term  := unary (('//' | '%') unary)*
//   unary := '-' unary | primary
//   primary := INTEGER | '(' expr ')'
class ExpressionParser {
 public:
  explicit ExpressionParser(std::string_view text) : text_(text) {}

  BigInt parse() {
    BigInt value = expr();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected character");
    return value;
  }

 private:
  BigInt expr() {
    BigInt value = term();
    for (;;) {
      skip_space();
      if (consume("+")) {
        value = apply(Operator::add, value, term());
      } else if (consume("-")) {
        value = apply(Operator::sub, value, term());
      } else {
        return value;
      }
    }
  }

  BigInt term() {
    BigInt value = unary();
    for (;;) {
      skip_space();
      if (consume("//")) {
        value = apply(Operator::floordiv, value, unary());
      } else if (consume("%")) {
        value = apply(Operator::mod, value, unary());
      } else {
        return value;
      }
    }
  }

  BigInt unary() {
    skip_space();
    if (consume("-")) return -unary();
    return primary();
  }

  BigInt primary() {
    skip_space();
    if (consume("(")) {
      BigInt value = expr();
      skip_space();
      if (!consume(")")) fail("expected ')'");
      return value;
    }
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) fail("expected integer");
    return from_decimal_digits(text_.substr(start, pos_ - start));
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool consume(std::string_view token) {
    if (text_.substr(pos_, token.size()) == token) {
      pos_ += token.size();
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(what + " at offset " + std::to_string(pos_) + " in '" +
                     std::string(text_) + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

struct ExpressionShape {
  std::vector<BigInt> operands;
  std::vector<Operator> operators;

  std::string render() const {
    std::string out;
    for (std::size_t i = 0; i < operands.size(); ++i) {
      if (i > 0) {
        out += ' ';
        out += operator_symbol(operators[i - 1]);
        out += ' ';
      }
      if (operands[i] < 0 && i > 0) {
        out += '(' + operands[i].str() + ')';
      } else {
        out += operands[i].str();
      }
    }
    return out;
  }
};

BigInt power_of_ten(int exponent) {
  BigInt v = 1;
  for (int i = 0; i < exponent; ++i) v *= 10;
  return v;
}

BigInt random_operand(RngStream& rng, int width) {
  const BigInt low = power_of_ten(width - 1);
  const BigInt span = power_of_ten(width) - low;
  // Operand widths are at most a handful of digits, so span fits in 64 bits.
  BigInt value = low + BigInt(rng.index(span.convert_to<std::size_t>()));
  // One operand in four is negated.
  if (rng.index(4) == 0) value = -value;
  return value;
}

ExpressionShape random_shape(const CorpusConfig& config, RngStream& rng, int operator_count,
                             int max_width) {
  ExpressionShape shape;
  const int n_operands = operator_count + 1;
  const std::size_t widest = rng.index(static_cast<std::size_t>(n_operands));
  for (int i = 0; i < n_operands; ++i) {
    int width = max_width;
    if (static_cast<std::size_t>(i) != widest) {
      width = config.min_digits +
              static_cast<int>(rng.index(static_cast<std::size_t>(max_width - config.min_digits + 1)));
    }
    shape.operands.push_back(random_operand(rng, width));
  }
  for (int i = 0; i < operator_count; ++i) {
    shape.operators.push_back(config.operators[rng.index(config.operators.size())]);
  }
  return shape;
}

// Swaps one random adjacent digit pair of |value|; nullopt when no swap
// changes the number.
std::optional<BigInt> transpose_digits(const BigInt& value, RngStream& rng) {
  const bool negative = value < 0;
  std::string digits = (negative ? BigInt(-value) : value).str();
  if (digits.size() < 2) return std::nullopt;
  const std::size_t i = rng.index(digits.size() - 1);
  if (digits[i] == digits[i + 1]) return std::nullopt;
  std::swap(digits[i], digits[i + 1]);
  const BigInt swapped = from_decimal_digits(digits);
  return negative ? BigInt(-swapped) : swapped;
}

constexpr Operator kAllOperators[] = {Operator::add, Operator::sub, Operator::floordiv,
                                      Operator::mod};

std::optional<BigInt> wrong_operator(const ExpressionShape& shape, RngStream& rng) {
  ExpressionShape altered = shape;
  const std::size_t pos = rng.index(altered.operators.size());
  Operator replacement = kAllOperators[rng.index(4)];
  if (replacement == altered.operators[pos]) return std::nullopt;
  altered.operators[pos] = replacement;
  try {
    return eval_expression(altered.render()).value();
  } catch (const EvalError&) {
    return std::nullopt;
  }
}

Question make_question(const CorpusConfig& config, std::int64_t id) {
  RngStream rng = RngStream::keyed(config.seed, StreamTag::corpus, {static_cast<std::uint64_t>(id)});
  const std::size_t group = static_cast<std::size_t>(id) % config.n_groups;
  const int operator_count = config.min_operators + static_cast<int>(group / config.digit_buckets());
  const int max_width = config.min_digits + static_cast<int>(group % config.digit_buckets());

  const ExpressionShape shape = random_shape(config, rng, operator_count, max_width);
  Question q;
  q.id = id;
  q.expression = shape.render();
  q.truth = eval_expression(q.expression);
  q.group = group;
  q.candidates.push_back(q.truth);

  const BigInt& truth = q.truth.value();
  const std::size_t max_attempts = 64 * config.candidates;
  for (std::size_t attempt = 0; attempt < max_attempts && q.candidates.size() < config.candidates;
       ++attempt) {
    std::optional<BigInt> candidate;
    switch (rng.index(4)) {
      case 0:
        candidate = BigInt(-truth);
        break;
      case 1:
        candidate = rng.index(2) == 0 ? BigInt(truth + 1) : BigInt(truth - 1);
        break;
      case 2:
        candidate = transpose_digits(truth, rng);
        break;
      default:
        candidate = wrong_operator(shape, rng);
        break;
    }
    if (!candidate) continue;
    AnswerLabel label(*candidate);
    if (std::find(q.candidates.begin(), q.candidates.end(), label) == q.candidates.end()) {
      q.candidates.push_back(std::move(label));
    }
  }
  if (q.candidates.size() < config.candidates) {
    throw GenerationError("question " + std::to_string(id) + " ('" + q.expression +
                          "'): only " + std::to_string(q.candidates.size() - 1) + " of " +
                          std::to_string(config.candidates - 1) +
                          " distinct distractors after " + std::to_string(max_attempts) +
                          " attempts");
  }
  return q;
}

}  // namespace

std::string_view operator_symbol(Operator op) {
  switch (op) {
    case Operator::add:
      return "+";
    case Operator::sub:
      return "-";
    case Operator::floordiv:
      return "//";
    case Operator::mod:
      return "%";
  }
  return "?";
}

Operator parse_operator(std::string_view symbol) {
  for (Operator op : kAllOperators) {
    if (operator_symbol(op) == symbol) return op;
  }
  throw ConfigError("unknown operator '" + std::string(symbol) + "'");
}

void CorpusConfig::validate() const {
  if (operators.empty()) throw ConfigError("corpus: operator set is empty");
  if (min_operators < 1 || max_operators > 3 || min_operators > max_operators) {
    throw ConfigError("corpus: operator count range must lie within 1..3");
  }
  if (min_digits < 2 || max_digits > 6 || min_digits > max_digits) {
    throw ConfigError("corpus: operand digit range must lie within 2..6");
  }
  if (n_groups != derived_groups()) {
    throw ConfigError("corpus: n_groups = " + std::to_string(n_groups) +
                      " but operator-count x digit-width grid has " +
                      std::to_string(derived_groups()) + " cells");
  }
  if (n_questions < n_groups) throw ConfigError("corpus: n_questions must be >= n_groups");
  if (candidates < 2) throw ConfigError("corpus: need at least 2 candidates per question");
}

std::size_t difficulty_group(const CorpusConfig& config, int operator_count, int max_width) {
  return static_cast<std::size_t>(operator_count - config.min_operators) * config.digit_buckets() +
         static_cast<std::size_t>(max_width - config.min_digits);
}

AnswerLabel eval_expression(std::string_view expression) {
  return AnswerLabel(ExpressionParser(expression).parse());
}

std::vector<Question> gen_dataset(const CorpusConfig& config) {
  config.validate();
  std::vector<Question> out;
  out.reserve(config.n_questions);
  for (std::size_t i = 0; i < config.n_questions; ++i) {
    out.push_back(make_question(config, static_cast<std::int64_t>(i)));
  }
  return out;
}

std::string to_jsonl_line(const Question& q) {
  nlohmann::ordered_json j;
  j["id"] = q.id;
  j["expression"] = q.expression;
  j["truth"] = q.truth.text();
  auto& cands = j["candidates"] = nlohmann::ordered_json::array();
  for (const auto& c : q.candidates) cands.push_back(c.text());
  j["group"] = q.group;
  return j.dump();
}

Question from_jsonl_line(std::string_view line, std::size_t line_number) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(line_number, std::string("malformed JSON: ") + e.what());
  }
  Question q;
  try {
    q.id = j.at("id").get<std::int64_t>();
    q.expression = j.at("expression").get<std::string>();
    q.truth = AnswerLabel::parse(j.at("truth").get<std::string>());
    for (const auto& c : j.at("candidates")) q.candidates.push_back(AnswerLabel::parse(c.get<std::string>()));
    q.group = j.at("group").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(line_number, std::string("bad field: ") + e.what());
  } catch (const ParseError& e) {
    throw ParseError(line_number, e.what());
  }
  if (q.candidates.empty() || q.candidates.front() != q.truth) {
    throw ParseError(line_number, "candidates[0] must equal truth");
  }
  for (std::size_t i = 0; i < q.candidates.size(); ++i) {
    for (std::size_t k = i + 1; k < q.candidates.size(); ++k) {
      if (q.candidates[i] == q.candidates[k]) throw ParseError(line_number, "duplicate candidate");
    }
  }
  return q;
}

void write_dataset(const std::filesystem::path& path, const std::vector<Question>& questions) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  for (const auto& q : questions) out << to_jsonl_line(q) << '\n';
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

std::vector<Question> read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  std::vector<Question> out;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    out.push_back(from_jsonl_line(line, line_number));
  }
  return out;
}

}  // namespace rler
