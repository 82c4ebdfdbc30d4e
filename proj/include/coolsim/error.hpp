#pragma once

#include <stdexcept>
#include <string>

namespace coolsim {

enum class ErrorKind {
  invalid_dimension,
  invalid_excitation,
  resource_limit,
  descriptor,
  missing_drive,
  degenerate_drive,
  degenerate_coupling,
  no_cavity_coupling,
  unsupported_combination,
  integration_failure,
  fit_domain,
  config,
  refused_run,
  infeasible_pairing,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace coolsim
