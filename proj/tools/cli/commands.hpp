// The four experiment commands.  Each returns the process exit status:
//   0  every enabled assertion passed
//   2  assertion failures present (counted in the stderr summary)
// Configuration and I/O problems throw ConfigError, mapped to 1 in main.

#pragma once

#include <iosfwd>

#include "cli/config.hpp"

namespace perturb::cli {

int run_bound_compare(const BoundCompareConfig& cfg, std::ostream& err);
int run_contour_verify(const ContourVerifyConfig& cfg, std::ostream& err);
int run_sparsify_power(const SparsifyPowerConfig& cfg, std::ostream& err);
int run_singular_rect(const SingularRectConfig& cfg, std::ostream& err);

}  // namespace perturb::cli
