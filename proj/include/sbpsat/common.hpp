#ifndef SBPSAT_COMMON_HPP
#define SBPSAT_COMMON_HPP

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace sbpsat {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Input lies outside the domain of an operation (bad point, bad degree).
class DomainError : public Error {
public:
  using Error::Error;
};

/// Operator data or derived quantities are inconsistent.
class DataError : public Error {
public:
  using Error::Error;
};

/// Geometry problems: nonconforming facets, inverted elements.
class GeometryError : public Error {
public:
  using Error::Error;
};

/// Linear solver failed to converge or broke down.
class SolverError : public Error {
public:
  using Error::Error;
};

enum class Family { Omega, Gamma, DiagE };

std::string to_string(Family f);
/// Accepts "omega", "gamma", "diage" (case-insensitive).
Family parse_family(const std::string& s);

/// Largest supported operator degree.
inline constexpr int kMaxDegree = 4;

} // namespace sbpsat

#endif
