#pragma once

#include <stdexcept>
#include <string>

namespace lemon {

// Bad shapes, out-of-range values, inconsistent configs. CLI maps this to exit 1.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem and format failures. CLI maps this to exit 2.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ValidationError(msg);
}

}  // namespace lemon
