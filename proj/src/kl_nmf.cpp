#include "nmfhmm/kl_nmf.h"

#include <string>

namespace nmfhmm {

namespace {

void check_factor_shapes(const Eigen::MatrixXd& V, const Eigen::MatrixXd& W,
                         const Eigen::MatrixXd& H) {
  if (W.rows() != V.rows() || H.cols() != V.cols() || W.cols() != H.rows()) {
    throw ShapeMismatch("factor shapes do not match: V " + std::to_string(V.rows()) + "x" +
                        std::to_string(V.cols()) + ", W " + std::to_string(W.rows()) + "x" +
                        std::to_string(W.cols()) + ", H " + std::to_string(H.rows()) + "x" +
                        std::to_string(H.cols()));
  }
}

}  // namespace

double kl_divergence(const Eigen::MatrixXd& B, const Eigen::MatrixXd& B_hat) {
  if (B.rows() != B_hat.rows() || B.cols() != B_hat.cols()) {
    throw ShapeMismatch("kl_divergence on differently shaped matrices");
  }
  if ((B_hat.array() <= 0.0).any()) {
    throw NonPositiveEstimate("kl_divergence needs a strictly positive estimate");
  }
  const auto b = B.array();
  const auto bh = B_hat.array();
  const double cross = (b > 0.0).select(b * (b / bh).log(), 0.0).sum();
  return cross - b.sum() + bh.sum();
}

Eigen::MatrixXd mu_update_h(const Eigen::MatrixXd& V, const Eigen::MatrixXd& W,
                            const Eigen::MatrixXd& H, double eps) {
  check_factor_shapes(V, W, H);
  const Eigen::MatrixXd ratio = V.array() / (W * H).cwiseMax(eps).array();
  const Eigen::MatrixXd num = W.transpose() * ratio;
  const Eigen::VectorXd den = W.colwise().sum().transpose().cwiseMax(eps);
  return (H.array() * (num.array().colwise() / den.array())).cwiseMax(eps);
}

Eigen::MatrixXd mu_update_w_weighted(const Eigen::MatrixXd& V, const Eigen::MatrixXd& W,
                                     const Eigen::MatrixXd& H, const Eigen::VectorXd& weights,
                                     double eps) {
  check_factor_shapes(V, W, H);
  if (weights.size() != V.cols()) {
    throw ShapeMismatch("one weight per frame required");
  }
  // posteriors arrive with rounding noise, so tolerate a hair above one
  if ((weights.array() < 0.0).any() || (weights.array() > 1.0 + 1e-9).any()) {
    throw WeightOutOfRange("frame weights must lie in [0, 1]");
  }
  Eigen::MatrixXd ratio = V.array() / (W * H).cwiseMax(eps).array();
  ratio.array().rowwise() *= weights.transpose().array();
  const Eigen::MatrixXd num = ratio * H.transpose();
  const Eigen::RowVectorXd den = (H * weights).transpose().cwiseMax(eps);
  return (W.array() * (num.array().rowwise() / den.array())).cwiseMax(eps);
}

Eigen::MatrixXd mu_update_h_weighted(const Eigen::MatrixXd& V, const Eigen::MatrixXd& W,
                                     const Eigen::MatrixXd& H, double eps) {
  // state weights scale a frame's whole objective, so they drop out of the
  // per-frame activation update
  return mu_update_h(V, W, H, eps);
}

NmfFactors normalize_columns(NmfFactors factors, double eps) {
  if (factors.W.cols() != factors.H.rows()) {
    throw ShapeMismatch("W columns and H rows disagree");
  }
  const Eigen::ArrayXd scale = factors.W.colwise().sum().transpose().cwiseMax(eps).array();
  factors.W.array().rowwise() /= scale.transpose();
  factors.W = factors.W.cwiseMax(eps);
  factors.H.array().colwise() *= scale;
  return factors;
}

Eigen::MatrixXd random_matrix_open_closed(int rows, int cols, std::mt19937_64& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      // 53-bit mantissa draw in [0,1), flipped into (0,1]
      const double u = double(rng() >> 11) * 0x1.0p-53;
      m(r, c) = 1.0 - u;
    }
  }
  return m;
}

}  // namespace nmfhmm
