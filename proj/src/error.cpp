#include "coolsim/error.hpp"

namespace coolsim {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_dimension: return "invalid dimension";
    case ErrorKind::invalid_excitation: return "invalid excitation";
    case ErrorKind::resource_limit: return "resource limit";
    case ErrorKind::descriptor: return "descriptor error";
    case ErrorKind::missing_drive: return "missing drive";
    case ErrorKind::degenerate_drive: return "degenerate drive";
    case ErrorKind::degenerate_coupling: return "degenerate coupling";
    case ErrorKind::no_cavity_coupling: return "no cavity coupling";
    case ErrorKind::unsupported_combination: return "unsupported combination";
    case ErrorKind::integration_failure: return "integration failure";
    case ErrorKind::fit_domain: return "fit domain error";
    case ErrorKind::config: return "config error";
    case ErrorKind::refused_run: return "refused run";
    case ErrorKind::infeasible_pairing: return "infeasible pairing";
  }
  return "error";
}

}  // namespace coolsim
