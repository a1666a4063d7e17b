// Exception types shared by all obstacle solver components.

#pragma once

#include <stdexcept>
#include <string>

namespace obstacle {

/// Base class for every error raised by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// f(t)/t never reaches 1/k on the search interval; the nonlinearity cannot
/// be penalized with this k.
struct NoBracket : Error {
  using Error::Error;
};

/// A structural hypothesis on (f, V, phi) failed at a sample point.
struct HypothesisViolated : Error {
  HypothesisViolated(const std::string& check, double margin_, double x, double t)
      : Error("hypothesis check '" + check + "' failed (margin " +
              std::to_string(margin_) + " at x=" + std::to_string(x) +
              ", t=" + std::to_string(t) + ")"),
        check_name(check), margin(margin_), witness_x(x), witness_t(t) {}
  std::string check_name;
  double margin;
  double witness_x;
  double witness_t;
};

struct SingularAssembly : Error {
  using Error::Error;
};

/// An iterate left the feasible set by more than roundoff.
struct Infeasible : Error {
  using Error::Error;
};

/// The converged minimizer has ||u||_lambda >= r: the smallness condition
/// failed in discrete form.
struct BallViolation : Error {
  using Error::Error;
};

struct JacobianSingular : Error {
  using Error::Error;
};

/// Doubling search for the path endpoint did not find t with low enough
/// energy; indicates superquadratic growth is missing upstream.
struct EndpointNotFound : Error {
  using Error::Error;
};

/// The path peak descended to the endpoint level without reaching
/// stationarity; the saddle was lost.
struct PathCollapse : Error {
  using Error::Error;
};

/// Energy decrease per sweep stagnated while the residual is still large.
struct StallDetected : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct IOFailure : Error {
  using Error::Error;
};

}  // namespace obstacle
