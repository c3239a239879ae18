#include "sbm/spectral.hpp"

#include <cmath>

namespace sbm {

Eigen::VectorXd circle_nodes(int points) {
  if (points < 3) throw std::invalid_argument("circle grid needs at least 3 nodes");
  Eigen::VectorXd x(points);
  for (int j = 0; j < points; ++j) x[j] = 2.0 * M_PI * j / points;
  return x;
}

Eigen::MatrixXd circle_derivative(int points) {
  if (points < 3 || points % 2 == 0)
    throw std::invalid_argument("circle derivative requires an odd node count");
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(points, points);
  for (int i = 0; i < points; ++i)
    for (int j = 0; j < points; ++j) {
      if (i == j) continue;
      int k = i - j;
      double sign = (k % 2 == 0) ? 1.0 : -1.0;
      d(i, j) = sign / (2.0 * std::sin(M_PI * k / points));
    }
  return d;
}

Eigen::MatrixXd line_derivative(int points, double dx) {
  if (points < 2) throw std::invalid_argument("line derivative needs at least 2 nodes");
  if (!(dx > 0)) throw std::invalid_argument("line derivative needs dx > 0");
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(points, points);
  for (int i = 0; i < points; ++i)
    for (int j = 0; j < points; ++j) {
      if (i == j) continue;
      int k = i - j;
      double sign = (k % 2 == 0) ? 1.0 : -1.0;
      d(i, j) = sign / (dx * k);
    }
  return d;
}

Grid1D make_circle_grid(int points) {
  Grid1D g;
  g.domain = Domain::Torus;
  g.nodes = circle_nodes(points);
  g.dx = 2.0 * M_PI / points;
  g.deriv = circle_derivative(points);
  return g;
}

Grid1D make_line_grid(int points, double half_width) {
  if (points < 2) throw std::invalid_argument("line grid needs at least 2 nodes");
  if (!(half_width > 0)) throw std::invalid_argument("line grid needs a positive half width");
  Grid1D g;
  g.domain = Domain::Line;
  g.dx = 2.0 * half_width / (points - 1);
  g.nodes = Eigen::VectorXd::LinSpaced(points, -half_width, half_width);
  g.deriv = line_derivative(points, g.dx);
  return g;
}

Eigen::MatrixXd expm_taylor(const Eigen::MatrixXd& x) {
  if (x.rows() != x.cols()) throw std::invalid_argument("expm_taylor: square matrix required");
  double norm = x.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  double scale = 1.0;
  while (norm * scale > 0.25) {
    scale *= 0.5;
    ++squarings;
  }
  Eigen::MatrixXd xs = scale * x;
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(x.rows(), x.cols());
  Eigen::MatrixXd sum = term;
  for (int k = 1; k <= 12; ++k) {
    term = (term * xs) / double(k);
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

Eigen::VectorXd heat_apply(const Eigen::MatrixXd& h, const Eigen::VectorXd& v, double t) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  if (es.info() != Eigen::Success) throw std::runtime_error("heat_apply: eigensolver failed");
  Eigen::VectorXd w = es.eigenvectors().transpose() * v;
  for (int i = 0; i < w.size(); ++i) w[i] *= std::exp(-t * es.eigenvalues()[i]);
  return es.eigenvectors() * w;
}

double heat_sum(const Eigen::VectorXd& eigenvalues, double t) {
  double s = 0;
  for (int i = 0; i < eigenvalues.size(); ++i) s += std::exp(-t * eigenvalues[i]);
  return s;
}

}  // namespace sbm
