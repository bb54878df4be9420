#include "canon4/error.hpp"

#include <cstdio>

namespace canon4 {

std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Syntax: return "syntax";
    case ErrorKind::UnknownIdentifier: return "unknown_identifier";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::DegenerateMetric: return "degenerate_metric";
    case ErrorKind::MinimalPoint: return "minimal_point";
    case ErrorKind::NonPrincipal: return "non_principal";
    case ErrorKind::DegenerateDenominator: return "degenerate_denominator";
    case ErrorKind::IntegrationDomain: return "integration_domain";
    case ErrorKind::ConstancyViolation: return "constancy_violation";
    case ErrorKind::NonMonotone: return "non_monotone";
    case ErrorKind::PatternNotApplicable: return "pattern_not_applicable";
    case ErrorKind::NotPnmcvf: return "not_pnmcvf";
    case ErrorKind::NonConvergence: return "non_convergence";
    case ErrorKind::NonPositive: return "non_positive";
    case ErrorKind::BlowUp: return "blow_up";
    case ErrorKind::OrthonormalityDrift: return "orthonormality_drift";
    case ErrorKind::RankDeficient: return "rank_deficient";
    case ErrorKind::ShapeMismatch: return "shape_mismatch";
    case ErrorKind::CompatibilityGate: return "compatibility_gate";
    case ErrorKind::Input: return "input";
  }
  return "unknown";
}

std::string fmt_num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {
std::string with_location(const std::string& message, const std::optional<Point2>& where) {
  if (!where) return message;
  char buf[96];
  std::snprintf(buf, sizeof buf, " at (u, v) = (%.17g, %.17g)", where->u, where->v);
  return message + buf;
}
}  // namespace

Error::Error(ErrorKind kind, const std::string& message, std::optional<Point2> where)
    : std::runtime_error(with_location(message, where)), kind_(kind), where_(where) {}

SyntaxError::SyntaxError(ErrorKind kind, std::size_t offset, const std::string& message)
    : Error(kind, "offset " + std::to_string(offset) + ": " + message), offset_(offset) {}

}  // namespace canon4
