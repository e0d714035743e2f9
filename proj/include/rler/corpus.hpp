#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "rler/label.hpp"

namespace rler {

enum class Operator { add, sub, floordiv, mod };

std::string_view operator_symbol(Operator op);
/// Parses "+", "-", "//" or "%"; throws ConfigError otherwise.
Operator parse_operator(std::string_view symbol);

struct Question {
  std::int64_t id = 0;
  std::string expression;
  AnswerLabel truth;
  /// candidates[0] == truth; entries pairwise distinct.
  std::vector<AnswerLabel> candidates;
  std::size_t group = 0;

  friend bool operator==(const Question&, const Question&) = default;
};

struct CorpusConfig {
  std::size_t n_questions = 5000;
  std::vector<Operator> operators{Operator::add, Operator::sub, Operator::floordiv,
                                  Operator::mod};
  int min_operators = 1;
  int max_operators = 3;
  int min_digits = 2;
  int max_digits = 6;
  /// Must equal the operator-count x digit-width cross product (15 by default).
  std::size_t n_groups = 15;
  /// Candidates per question (L).
  std::size_t candidates = 4;
  std::uint64_t seed = 0;

  std::size_t digit_buckets() const {
    return static_cast<std::size_t>(max_digits - min_digits + 1);
  }
  std::size_t derived_groups() const {
    return static_cast<std::size_t>(max_operators - min_operators + 1) * digit_buckets();
  }

  /// Throws ConfigError on any violated invariant.
  void validate() const;
};

/// Difficulty group of an expression shape: operator-count major, digit-width
/// minor, both offset by the config minima.
std::size_t difficulty_group(const CorpusConfig& config, int operator_count, int max_width);

/// Evaluates an integer expression over + - // % with exact integers.
/// // and % floor toward negative infinity; unary minus binds tighter than
/// both, and // and % bind tighter than + and -. Parentheses are allowed.
/// Throws ParseError on malformed input and EvalError on a zero divisor.
AnswerLabel eval_expression(std::string_view expression);

std::vector<Question> gen_dataset(const CorpusConfig& config);

void write_dataset(const std::filesystem::path& path, const std::vector<Question>& questions);
std::vector<Question> read_dataset(const std::filesystem::path& path);

/// Single-line JSON encoding used by the dataset files.
std::string to_jsonl_line(const Question& q);
Question from_jsonl_line(std::string_view line, std::size_t line_number);

}  // namespace rler
