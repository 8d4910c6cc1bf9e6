#pragma once

#include <stdexcept>
#include <string>

namespace cohexp {

// Error categories. The CLI maps each one to an exit code and a short tag.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* code() const noexcept { return "E_INTERNAL"; }
};

// Arity mismatches and malformed expression trees.
class StructuralError : public Error {
 public:
  using Error::Error;
  const char* code() const noexcept override { return "E_STRUCTURE"; }
};

// Input values outside [0,1] or otherwise outside an operation's domain.
class DomainError : public Error {
 public:
  using Error::Error;
  const char* code() const noexcept override { return "E_DOMAIN"; }
};

// Requests that exceed enumeration or minimization limits.
class CapacityError : public Error {
 public:
  using Error::Error;
  const char* code() const noexcept override { return "E_CAPACITY"; }
};

// A caller-supplied object violates a semantic precondition, e.g. a
// repair fallback that is not coherent.
class ContractError : public Error {
 public:
  using Error::Error;
  const char* code() const noexcept override { return "E_CONTRACT"; }
};

// Malformed documents in the structured text format.
class FormatError : public Error {
 public:
  using Error::Error;
  const char* code() const noexcept override { return "E_FORMAT"; }
};

class TrainingError : public Error {
 public:
  TrainingError(const std::string& what, int epoch) : Error(what), epoch_(epoch) {}
  const char* code() const noexcept override { return "E_TRAINING"; }
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

}  // namespace cohexp
