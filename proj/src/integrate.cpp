#include "coolsim/integrate.hpp"

#include "coolsim/error.hpp"

namespace coolsim {

void validate(const IntegratorConfig& cfg) {
  if (!(cfg.dt > 0.0)) throw Error(ErrorKind::config, "dt must be positive");
  if (!(cfg.tolerance > 0.0 && cfg.tolerance <= 1e-3)) throw Error(ErrorKind::config, "tolerance must lie in (0, 1e-3]");
  if (!(cfg.abs_tolerance > 0.0)) throw Error(ErrorKind::config, "abs_tolerance must be positive");
  if (!(cfg.t_final > 0.0)) throw Error(ErrorKind::config, "t_final must be positive");
  if (cfg.samples < 1) throw Error(ErrorKind::config, "need at least one sample interval");
}

}  // namespace coolsim
