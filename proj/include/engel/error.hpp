#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace engel {

// Caller supplied something the operation's precondition rejects.
class usage_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A binding that breaks conjugation or the circle relation.
class invalid_binding : public usage_error {
 public:
  using usage_error::usage_error;
};

// Text that does not match the expression grammar.
class parse_error : public usage_error {
 public:
  parse_error(const std::string& msg, std::size_t pos)
      : usage_error(msg + " at position " + std::to_string(pos)), pos_(pos) {}
  std::size_t position() const noexcept { return pos_; }

 private:
  std::size_t pos_;
};

// Broken internal invariant (e.g. a model that is not conjugation-closed).
class internal_error : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace engel
