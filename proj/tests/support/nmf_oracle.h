#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace testsupport {

// Classic multiplicative KL-NMF written with bare loops: W first, then H
// against the updated W. Oracle for single-state training, where every frame
// weight is one.
struct LoopNmf {
  Eigen::MatrixXd W, H;
  double eps = 1e-12;

  Eigen::MatrixXd product() const {
    const int F = int(W.rows()), K = int(W.cols()), N = int(H.cols());
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(F, N);
    for (int f = 0; f < F; ++f) {
      for (int n = 0; n < N; ++n) {
        for (int k = 0; k < K; ++k) {
          P(f, n) += W(f, k) * H(k, n);
        }
        if (P(f, n) < eps) P(f, n) = eps;
      }
    }
    return P;
  }

  double poisson_loglik(const Eigen::MatrixXd& V) const {
    const Eigen::MatrixXd P = product();
    double ll = 0.0;
    for (int n = 0; n < V.cols(); ++n) {
      for (int f = 0; f < V.rows(); ++f) {
        ll += V(f, n) * std::log(P(f, n)) - P(f, n);
      }
    }
    return ll;
  }

  Eigen::MatrixXd ratio(const Eigen::MatrixXd& V) const {
    Eigen::MatrixXd R = product();
    for (int f = 0; f < V.rows(); ++f) {
      for (int n = 0; n < V.cols(); ++n) {
        R(f, n) = V(f, n) / R(f, n);
      }
    }
    return R;
  }

  void step(const Eigen::MatrixXd& V) {
    const int F = int(W.rows()), K = int(W.cols()), N = int(H.cols());
    Eigen::MatrixXd R = ratio(V);
    Eigen::MatrixXd W2 = W;
    for (int f = 0; f < F; ++f) {
      for (int k = 0; k < K; ++k) {
        double num = 0.0, den = 0.0;
        for (int n = 0; n < N; ++n) {
          num += R(f, n) * H(k, n);
          den += H(k, n);
        }
        W2(f, k) = std::max(W(f, k) * num / std::max(den, eps), eps);
      }
    }
    W = W2;
    R = ratio(V);
    Eigen::MatrixXd H2 = H;
    for (int k = 0; k < K; ++k) {
      for (int n = 0; n < N; ++n) {
        double num = 0.0, den = 0.0;
        for (int f = 0; f < F; ++f) {
          num += W(f, k) * R(f, n);
          den += W(f, k);
        }
        H2(k, n) = std::max(H(k, n) * num / std::max(den, eps), eps);
      }
    }
    H = H2;
    for (int k = 0; k < K; ++k) {
      double s = 0.0;
      for (int f = 0; f < F; ++f) s += W(f, k);
      s = std::max(s, eps);
      for (int f = 0; f < F; ++f) W(f, k) = std::max(W(f, k) / s, eps);
      for (int n = 0; n < N; ++n) H(k, n) *= s;
    }
  }
};

}  // namespace testsupport
