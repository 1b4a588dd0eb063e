#pragma once

#include <stdexcept>
#include <string>

namespace specan {

// Non-finite values or overflow produced where the math promises finite results.
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

// Persisted data that cannot be decoded (bad magic, version, shape, truncation).
class format_error : public std::runtime_error {
 public:
  explicit format_error(const std::string& what) : std::runtime_error(what) {}
};

// Caller handed in data that violates an invariant a producer was supposed
// to guarantee (distinct from plain bad arguments).
class contract_error : public std::logic_error {
 public:
  explicit contract_error(const std::string& what) : std::logic_error(what) {}
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

}  // namespace specan
