#pragma once

#include <stdexcept>
#include <string>

namespace ftcost {

/// Base class for all library errors. The CLI maps the derived types to
/// distinct exit codes, so throw the most specific one that applies.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A caller passed a value outside an operation's documented domain.
struct rejected_input : error {
  using error::error;
};

/// A configured cap (entry budget, dimension cap, depth cap, ...) was hit.
/// The message names the cap and its value.
struct resource_limit : error {
  using error::error;
};

/// An iterative search ran out of budget before meeting its target.
struct convergence_failure : error {
  convergence_failure(const std::string& msg, double best)
      : error(msg), best_achieved(best) {}
  double best_achieved;
};

/// A feasibility search (e.g. code-distance solving) proved unsatisfiable.
struct infeasible : error {
  using error::error;
};

}  // namespace ftcost
