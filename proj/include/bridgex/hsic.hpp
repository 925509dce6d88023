#pragma once

#include <string_view>

#include <Eigen/Core>

// Biased HSIC estimator n^-2 Tr(K H L H) over kernel Gram matrices.
//
// Sample matrices are features x samples: every column is one observation
// (one probe stimulus), so a single neuron row is a 1 x n sample matrix.
namespace bridgex::bridge {

enum class Kernel { rbf_median, linear };

Kernel parse_kernel(std::string_view text);
std::string_view to_string(Kernel kernel);

struct Gram {
  Eigen::MatrixXd matrix;
  /// RBF bandwidth sigma; 0 for the linear kernel.
  double bandwidth = 0.0;
  /// Every pairwise distance was zero, so the RBF kernel fell back to linear.
  bool linear_fallback = false;
};

/// Gaussian kernel exp(-|a-b|^2 / (2 sigma^2)) with sigma the median
/// pairwise distance (median of the non-zero distances when the median
/// itself is zero), or the linear kernel a.b.
Gram gram_matrix(const Eigen::MatrixXd& samples, Kernel kernel);

/// H K H with H = I - (1/n) 1 1^T.
Eigen::MatrixXd center_gram(const Eigen::MatrixXd& gram);

/// n^-2 Tr(K H L H), evaluated as n^-2 sum((H K H) .* L).
double hsic_from_grams(const Eigen::MatrixXd& k, const Eigen::MatrixXd& l);

struct HsicResult {
  double value = 0.0;
  bool linear_fallback = false;
};

/// Throws ShapeError when sample counts differ or are below 3.
HsicResult hsic_detailed(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, Kernel kernel);
double hsic(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, Kernel kernel = Kernel::rbf_median);

}  // namespace bridgex::bridge
