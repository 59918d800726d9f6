#pragma once

#include <stdexcept>
#include <string>

namespace ewclt {

// Bad input to an operation (violated precondition on the arguments).
class invalid_argument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// A logarithm of zero was required where a finite value is needed.
class infinite_value_error : public std::domain_error {
public:
  infinite_value_error(const std::string &what, long long index = -1)
      : std::domain_error(what), index_(index) {}
  long long index() const { return index_; }

private:
  long long index_;
};

// The class function or evaluation point does not meet the CLT hypotheses
// (undeclared circle zero, rational x hitting a zero, ...).
class hypothesis_violation : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

// A runtime precondition on data (not on the argument types) failed.
class precondition_violation : public std::domain_error {
public:
  precondition_violation(const std::string &what, long long index = -1)
      : std::domain_error(what), index_(index) {}
  long long index() const { return index_; }

private:
  long long index_;
};

class quadrature_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace ewclt
