#include "sgalm/manifold.hpp"

#include <cmath>
#include <stdexcept>

namespace sgalm::manifold {

MatrixXcd lift(const MatrixXcd& V, double max_power) {
  const double power = V.squaredNorm();
  if (power > max_power * (1.0 + 1e-9)) {
    throw std::domain_error("lift: transmit power exceeds budget");
  }
  const Eigen::Index cols = V.cols();
  MatrixXcd lifted(V.rows() + 1, cols);
  lifted.topRows(V.rows()) = V / std::sqrt(max_power);
  const double slack = std::max(0.0, 1.0 - power / max_power);
  lifted.row(V.rows()).setConstant(std::sqrt(slack / cols));
  return lifted;
}

MatrixXcd extract(const MatrixXcd& lifted, double max_power) {
  return std::sqrt(max_power) * lifted.topRows(lifted.rows() - 1);
}

double inner(const MatrixXcd& a, const MatrixXcd& b) {
  return a.cwiseProduct(b.conjugate()).sum().real();
}

MatrixXcd project_tangent(const MatrixXcd& point, const MatrixXcd& ambient) {
  return ambient - inner(ambient, point) * point;
}

MatrixXcd project_tangent_entrywise(const MatrixXcd& point,
                                    const MatrixXcd& ambient) {
  const Eigen::MatrixXd radial =
      ambient.cwiseProduct(point.conjugate()).real();
  return ambient - radial.cast<std::complex<double>>().cwiseProduct(point);
}

MatrixXcd retract(const MatrixXcd& point, const MatrixXcd& tangent,
                  double step) {
  MatrixXcd moved = point + step * tangent;
  const double norm = moved.norm();
  if (norm < 1e-14) {
    throw std::domain_error("retract: degenerate step");
  }
  return moved / norm;
}

MatrixXcd random_point(Eigen::Index rows, Eigen::Index cols,
                       std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  MatrixXcd point(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      point(i, j) = std::complex<double>(re, im);
    }
  }
  point /= point.norm();
  return point;
}

}  // namespace sgalm::manifold
