#pragma once

#include <stdexcept>
#include <string>

namespace critfield {

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Conditioning on (grad X(t), grad X(0)) = 0 is impossible or numerically singular.
struct ConditioningError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CollisionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PathError : std::runtime_error {
  PathError(const std::string& what, double r) : std::runtime_error(what), r(r) {}
  double r;
};

struct EmbeddingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InsufficientSamplesError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace critfield
