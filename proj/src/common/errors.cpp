#include "weaklab/common/errors.hpp"

#include <sstream>

namespace weaklab {

namespace {

std::string join(const std::vector<std::string>& v) {
  std::ostringstream os;
  os << v.size() << " configuration error(s)";
  for (const auto& s : v) os << "\n  - " << s;
  return os.str();
}

std::string fmt(const char* head, double v, const char* tail = "") {
  std::ostringstream os;
  os.precision(6);
  os << head << v << tail;
  return os.str();
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : Error(join(violations)), violations_(std::move(violations)) {}

StepSizeError::StepSizeError(double dt, const std::string& detail)
    : NumericError(fmt("unstable propagation with dt=", dt, ": ") + detail), dt_(dt) {}

NodeSingularity::NodeSingularity(double x)
    : NumericError(fmt("wavefunction node at x=", x)), x_(x) {}

PostSelectionImpossible::PostSelectionImpossible(double x)
    : NumericError(fmt("post-selection impossible, |psi|^2 vanishes at x=", x)) {}

BasisCoverageError::BasisCoverageError(double retained)
    : NumericError(fmt("eigenbasis covers only ", retained, " of the state weight")),
      retained_(retained) {}

GridRangeError::GridRangeError(double outside_mass)
    : NumericError(fmt("outcome grid too narrow, mass outside = ", outside_mass)) {}

InsufficientStatistics::InsufficientStatistics(double probability, std::size_t n)
    : NumericError(fmt("post-selection probability ", probability, " below 10/N, N=") +
                   std::to_string(n)),
      probability_(probability) {}

}  // namespace weaklab
