#pragma once

#include <optional>
#include <string>

#include "fasfair/outage.hpp"

namespace fasfair {

enum class Method { special_closed, bisection, quadratic_closed, sca };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::special_closed: return "special_closed";
    case Method::bisection: return "bisection";
    case Method::quadratic_closed: return "quadratic_closed";
    case Method::sca: return "sca";
  }
  return "unknown";
}

struct Bracket {
  double lo = 0.0;
  double hi = 0.0;
};

// Common result record for all four fairness solvers. `outage` always holds
// the exact integral evaluations at the returned point, even for methods
// that optimize an approximate objective.
struct SolveReport {
  Method method = Method::special_closed;
  double alpha = 0.0;
  std::optional<double> beta;    // time share, OMA only
  OutagePair outage;
  std::optional<double> tau;     // surrogate objective value, SCA only
  int iterations = 0;
  bool converged = true;
  std::optional<Bracket> bracket;
  std::string note;              // premise warnings and boundary-clamp flags
};

}  // namespace fasfair
