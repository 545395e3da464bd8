#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sqc {

/// Caller supplied an invalid argument or configuration. Maps to CLI exit 2.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed expression source; `position` is a 0-based character offset.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what + " at offset " + std::to_string(position)), position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Evaluation left the real-valued domain (log of non-positive, division by zero, ...).
/// `position` locates the offending expression node when known.
class EvalError : public std::runtime_error {
 public:
  explicit EvalError(const std::string& what, std::size_t position = npos)
      : std::runtime_error(what), position_(position) {}
  std::size_t position() const noexcept { return position_; }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::size_t position_;
};

}  // namespace sqc
