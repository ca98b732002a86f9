#pragma once

#include <random>

#include "sgalm/scenario.hpp"

namespace sgalm::manifold {

// The search space is the complex unit sphere under the Frobenius norm,
// { Vt in C^{(M+1) x L} : Tr(Vt Vt^H) = 1 }. Rows 0..M-1 hold V/sqrt(p_max),
// the last row is the slack vector z absorbing unused transmit power.

/// Scales V into the top rows and fills the slack row with equal nonnegative
/// real entries so the result has unit Frobenius norm.
/// Throws std::domain_error if Tr(V V^H) exceeds max_power.
MatrixXcd lift(const MatrixXcd& V, double max_power);

/// Inverse of lift up to the slack row: top rows times sqrt(max_power).
MatrixXcd extract(const MatrixXcd& lifted, double max_power);

/// Tangent projection under the real trace metric:
/// xi = G - Re{Tr(Vt^H G)} Vt.
MatrixXcd project_tangent(const MatrixXcd& point, const MatrixXcd& ambient);

/// Entrywise variant (product-of-circles form); kept for comparison only,
/// selectable through SolverOptions. Not tangent to the sphere in general.
MatrixXcd project_tangent_entrywise(const MatrixXcd& point,
                                    const MatrixXcd& ambient);

/// Metric retraction: normalize point + step * tangent back to the sphere.
MatrixXcd retract(const MatrixXcd& point, const MatrixXcd& tangent,
                  double step);

/// i.i.d. complex Gaussian entries, Frobenius-normalized (uniform on the
/// sphere).
MatrixXcd random_point(Eigen::Index rows, Eigen::Index cols,
                       std::mt19937_64& rng);

/// Re{Tr(A^H B)}, the embedding inner product.
double inner(const MatrixXcd& a, const MatrixXcd& b);

}  // namespace sgalm::manifold
