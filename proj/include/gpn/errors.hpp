#pragma once

#include <stdexcept>
#include <string>

namespace gpn {

// Caller broke a precondition (shape mismatch, invalid label, bad option).
class ContractViolation : public std::logic_error {
 public:
  explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

// Malformed or inconsistent on-disk input.
class LoadError : public std::runtime_error {
 public:
  explicit LoadError(const std::string& what) : std::runtime_error(what) {}
};

// A metric is undefined for the given labels (e.g. no positives).
class EvaluationError : public std::runtime_error {
 public:
  explicit EvaluationError(const std::string& what) : std::runtime_error(what) {}
};

// Training produced a non-finite loss or gradient.
class TrainingError : public std::runtime_error {
 public:
  explicit TrainingError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gpn
