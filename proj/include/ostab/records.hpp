#pragma once

#include <cstdint>
#include <string>

#include "ostab/grid.hpp"

namespace ostab {

/// One measurement of an inequality: a measured left-hand norm against the
/// constant-free right-hand scale it is claimed to be controlled by.  The
/// interesting quantity is the ratio across parameter ladders — boundedness
/// (no growth trend) is the testable content when constants are unknown.
struct AuditRecord {
  std::string case_id;
  double alpha = 0.0;
  double beta = 0.0;
  cplx lambda{0.0, 0.0};
  /// Exponent parameter of the case: the function-space exponent p where
  /// the estimate involves one, or the weight power s for wall-layer norms.
  double p = 2.0;
  double lhs = 0.0;        ///< measured left-hand norm
  double rhs_scale = 0.0;  ///< right-hand side with all constants set to 1
  double ratio = 0.0;      ///< lhs / rhs_scale
  std::uint64_t seed = 0;  ///< generator seed for the sampled data, 0 if none
};

}  // namespace ostab
