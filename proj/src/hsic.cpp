#include "bridgex/hsic.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "bridgex/error.hpp"
#include "bridgex/text.hpp"

namespace bridgex::bridge {

Kernel parse_kernel(std::string_view text) {
  const auto t = text::trim(text);
  if (t == "rbf_median") return Kernel::rbf_median;
  if (t == "linear") return Kernel::linear;
  throw ConfigError("unknown kernel '" + std::string(t) + "'");
}

std::string_view to_string(Kernel kernel) {
  return kernel == Kernel::rbf_median ? "rbf_median" : "linear";
}

namespace {

double median_of(std::vector<double> v) {
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace

Gram gram_matrix(const Eigen::MatrixXd& samples, Kernel kernel) {
  const auto n = samples.cols();
  Gram g;
  const Eigen::MatrixXd inner = samples.transpose() * samples;
  if (kernel == Kernel::linear) {
    g.matrix = inner;
    return g;
  }

  Eigen::MatrixXd dist2(n, n);
  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i) {
    dist2(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      // Direct differences keep exact zeros for identical samples.
      const double d2 = (samples.col(i) - samples.col(j)).squaredNorm();
      dist2(i, j) = dist2(j, i) = d2;
      dists.push_back(std::sqrt(d2));
    }
  }

  double sigma = dists.empty() ? 0.0 : median_of(dists);
  if (sigma == 0.0) {
    std::vector<double> nonzero;
    for (double d : dists)
      if (d > 0.0) nonzero.push_back(d);
    if (nonzero.empty()) {
      g.matrix = inner;
      g.linear_fallback = true;
      return g;
    }
    sigma = median_of(std::move(nonzero));
  }
  g.bandwidth = sigma;
  g.matrix = (-dist2.array() / (2.0 * sigma * sigma)).exp().matrix();
  return g;
}

Eigen::MatrixXd center_gram(const Eigen::MatrixXd& gram) {
  const Eigen::VectorXd row_mean = gram.rowwise().mean();
  const Eigen::RowVectorXd col_mean = gram.colwise().mean();
  const double grand = gram.mean();
  Eigen::MatrixXd c = gram;
  c.colwise() -= row_mean;
  c.rowwise() -= col_mean;
  c.array() += grand;
  return c;
}

double hsic_from_grams(const Eigen::MatrixXd& k, const Eigen::MatrixXd& l) {
  if (k.rows() != k.cols() || l.rows() != l.cols() || k.rows() != l.rows())
    throw ShapeError("Gram matrices must be square and of equal size");
  const auto n = static_cast<double>(k.rows());
  return center_gram(k).cwiseProduct(l).sum() / (n * n);
}

HsicResult hsic_detailed(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, Kernel kernel) {
  if (x.cols() != y.cols())
    throw ShapeError("HSIC inputs have " + std::to_string(x.cols()) + " and " +
                     std::to_string(y.cols()) + " samples");
  if (x.cols() < 3) throw ShapeError("HSIC needs at least 3 samples");
  if (x.rows() == 0 || y.rows() == 0) throw ShapeError("HSIC inputs need at least one feature");
  const auto gx = gram_matrix(x, kernel);
  const auto gy = gram_matrix(y, kernel);
  return {hsic_from_grams(gx.matrix, gy.matrix), gx.linear_fallback || gy.linear_fallback};
}

double hsic(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, Kernel kernel) {
  return hsic_detailed(x, y, kernel).value;
}

}  // namespace bridgex::bridge
