#pragma once

#include <Eigen/Dense>
#include <random>

#include "nmfhmm/errors.h"

namespace nmfhmm {

// Floor applied to factor entries and to denominators before division.
inline constexpr double kFactorFloor = 1e-12;

struct NmfFactors {
  Eigen::MatrixXd W;  // bins x basis, columns are spectral atoms
  Eigen::MatrixXd H;  // basis x frames
};

// Generalized KL divergence sum(b*log(b/b_hat) - b + b_hat), with the
// 0*log(0) = 0 convention. B must be non-negative, B_hat strictly positive.
double kl_divergence(const Eigen::MatrixXd& B, const Eigen::MatrixXd& B_hat);

// Multiplicative update H <- H .* (W'(V/(WH))) ./ (W'1). Never increases
// kl_divergence(V, WH). Result entries are floored at eps.
Eigen::MatrixXd mu_update_h(const Eigen::MatrixXd& V, const Eigen::MatrixXd& W,
                            const Eigen::MatrixXd& H, double eps = kFactorFloor);

// Frame-weighted multiplicative update for W. With weights q (one per frame,
// each in [0, 1]) the update is
//   W <- W .* ((V/(WH)) diag(q) H') ./ (H q, broadcast over rows),
// i.e. every frame's contribution enters numerator and denominator scaled by
// its weight. All-ones weights reduce this to the classic unweighted update.
Eigen::MatrixXd mu_update_w_weighted(const Eigen::MatrixXd& V, const Eigen::MatrixXd& W,
                                     const Eigen::MatrixXd& H, const Eigen::VectorXd& weights,
                                     double eps = kFactorFloor);

// Per-frame H update used alongside the weighted W update. The frame weights
// cancel out of the H step, so this is the classic update.
Eigen::MatrixXd mu_update_h_weighted(const Eigen::MatrixXd& V, const Eigen::MatrixXd& W,
                                     const Eigen::MatrixXd& H, double eps = kFactorFloor);

// Rescales each column of W to unit L1 norm and the matching row of H by the
// inverse factor, so the product WH is preserved.
NmfFactors normalize_columns(NmfFactors factors, double eps = kFactorFloor);

// Matrix with entries drawn uniformly from (0, 1]. Consumes rows*cols draws
// in row-major order, independent of the standard library's distributions so
// results are stable across toolchains.
Eigen::MatrixXd random_matrix_open_closed(int rows, int cols, std::mt19937_64& rng);

}  // namespace nmfhmm
