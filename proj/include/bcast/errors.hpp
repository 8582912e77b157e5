#pragma once

#include <stdexcept>
#include <string>

namespace bcast {

// Malformed arguments: wrong arity, size mismatch, non-normalized input.
class input_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Parameters outside a formula's domain (e.g. d < 3 for the majority threshold).
class domain_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Inconsistent construction parameters (schedules, providers).
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Work guard exceeded; the request is refused rather than attempted.
class size_error : public std::length_error {
 public:
  using std::length_error::length_error;
};

// Exhaustive search finished without a hit.
class not_found_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class missing_graph_error : public config_error {
 public:
  using config_error::config_error;
};

}  // namespace bcast
