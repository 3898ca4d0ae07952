#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "regmod/chc.hpp"

namespace regmod {

struct SourceSpan {
  std::size_t start = 0;  // byte offsets, end exclusive
  std::size_t end = 0;
  std::size_t line = 1;  // 1-based, of `start`
  std::size_t column = 1;
};

class ParseError : public std::runtime_error {
 public:
  enum class Kind : std::uint8_t { Syntax, Sort, Duplicate };

  ParseError(Kind kind, SourceSpan span, const std::string& message, std::vector<std::string> expected = {});

  Kind kind() const { return kind_; }
  const SourceSpan& span() const { return span_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  Kind kind_;
  SourceSpan span_;
  std::vector<std::string> expected_;
};

/// Parses the supported SMT-LIB 2 subset:
///   (declare-datatypes ((S 0) ...) (((c (sel S')) (d)) ...))
///   (declare-fun p (S1 ... Sn) Bool)
///   (assert (forall ((x S) ...) (=> (and L1 ... Lk) H)))   H is an atom or false
///   (assert (forall ((x S) ...) A))                         universally quantified fact
///   (assert A)                                              ground fact
///   (check-sat)                                             ends the input
/// Literals are (p t...), (= t t), (not (= t t)) and (distinct t t).
/// The result is validated; sort errors are reported as ParseError::Kind::Sort.
/// Validation warnings (e.g. a missing goal) are appended to `warnings`.
Problem parse_problem(std::string_view text, std::vector<std::string>* warnings = nullptr);

/// Inverse of parse_problem: parse_problem(print_problem(p)) == p for every
/// valid p, names included.
std::string print_problem(const Problem& problem);

}  // namespace regmod
