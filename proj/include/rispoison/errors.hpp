#pragma once

#include <stdexcept>
#include <string>

namespace rispoison {

/// Bad shapes, invalid parameters, malformed config text.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// API misuse, e.g. backward() on a non-scalar node.
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A loss, gradient or network output became non-finite.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rispoison
