#pragma once

#include <memory>
#include <string>

#include "dcm/geometry.hpp"

namespace dcm {

// Arithmetic expression in the variables x and y: + - * / ^, parentheses,
// exp abs sqrt log sin cos (one argument), max min (two), constant pi.
class Expression {
 public:
  // Throws InputError with the offending position on malformed input.
  explicit Expression(const std::string& text);

  double operator()(Vec2 p) const;
  const std::string& text() const { return text_; }

  struct Node;

 private:
  std::string text_;
  std::shared_ptr<const Node> root_;
};

}  // namespace dcm
