#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace crowdsim {

/// Invalid configuration or domain description. Maps to CLI exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg)
      : std::runtime_error(msg), problems_{msg} {}
  explicit ValidationError(std::vector<std::string> problems)
      : std::runtime_error(join(problems)), problems_(std::move(problems)) {}

  const std::vector<std::string>& problems() const { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) {
      if (!out.empty()) out += "\n";
      out += s;
    }
    return out;
  }
  std::vector<std::string> problems_;
};

/// Point query outside [0,L]x[0,d].
class OutOfDomainError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Caller broke an operation's precondition (missing velocity guess, too few samples, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A time step produced an inadmissible state. Maps to CLI exit code 3.
class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace crowdsim
