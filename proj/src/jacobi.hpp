#ifndef SBPSAT_JACOBI_HPP
#define SBPSAT_JACOBI_HPP

namespace sbpsat::detail {

/// Orthonormal Jacobi polynomial P_n^(alpha,beta)(x) on [-1,1].
double jacobi(double x, double alpha, double beta, int n);
/// Derivative of the orthonormal Jacobi polynomial.
double jacobi_grad(double x, double alpha, double beta, int n);

} // namespace sbpsat::detail

#endif
