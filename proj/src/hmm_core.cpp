#include "nmfhmm/hmm_core.h"

#include <cmath>
#include <string>

#include "nmfhmm/kl_nmf.h"

namespace nmfhmm {

void ChainParams::validate(double tol) const {
  const int J = states();
  if (J < 1) {
    throw InvariantViolation("chain needs at least one state");
  }
  if (A.rows() != J || A.cols() != J) {
    throw InvariantViolation("transition matrix must be square with one row per state");
  }
  if ((pi.array() < 0.0).any() || (A.array() < 0.0).any()) {
    throw InvariantViolation("chain probabilities must be non-negative");
  }
  if (std::abs(pi.sum() - 1.0) > tol) {
    throw InvariantViolation("initial distribution does not sum to one");
  }
  for (int i = 0; i < J; ++i) {
    if (std::abs(A.row(i).sum() - 1.0) > tol) {
      throw InvariantViolation("transition row " + std::to_string(i) + " does not sum to one");
    }
  }
}

double poisson_state_loglik(const Eigen::VectorXd& y, const Eigen::VectorXd& rate) {
  if (y.size() != rate.size()) {
    throw ShapeMismatch("observation and rate lengths differ");
  }
  if ((rate.array() <= 0.0).any()) {
    throw NonPositiveRate("poisson rates must be positive");
  }
  return (y.array() * rate.array().log() - rate.array()).sum();
}

Eigen::RowVectorXd poisson_loglik_frames(const Eigen::MatrixXd& V, const Eigen::MatrixXd& rates) {
  if (V.rows() != rates.rows() || V.cols() != rates.cols()) {
    throw ShapeMismatch("spectrogram and rate matrix shapes differ");
  }
  if ((rates.array() <= 0.0).any()) {
    throw NonPositiveRate("poisson rates must be positive");
  }
  return (V.array() * rates.array().log() - rates.array()).colwise().sum();
}

PosteriorSet forward_backward(const Eigen::MatrixXd& loglik, const ChainParams& chain) {
  const int J = chain.states();
  const int N = static_cast<int>(loglik.cols());
  if (loglik.rows() != J || N < 1) {
    throw ShapeMismatch("loglik must be states x frames");
  }

  // Per-frame max shift keeps the scaled recursions in exp range; the shifts
  // are added back into the log-likelihood at the end. Scalar std::exp so
  // hopeless states underflow to an honest zero (the vectorized exp clamps
  // its argument and would hide a vanished frame).
  Eigen::MatrixXd L(J, N);
  Eigen::VectorXd shift(N);
  for (int n = 0; n < N; ++n) {
    shift(n) = loglik.col(n).maxCoeff();
    for (int j = 0; j < J; ++j) {
      L(j, n) = std::exp(loglik(j, n) - shift(n));
    }
  }

  Eigen::MatrixXd alpha(J, N);
  Eigen::VectorXd c(N);
  Eigen::VectorXd a = chain.pi.cwiseProduct(L.col(0));
  c(0) = a.sum();
  if (!(c(0) > 0.0)) {
    throw DegenerateChain("forward mass vanished at frame 0");
  }
  alpha.col(0) = a / c(0);
  for (int n = 1; n < N; ++n) {
    a = (chain.A.transpose() * alpha.col(n - 1)).cwiseProduct(L.col(n));
    c(n) = a.sum();
    if (!(c(n) > 0.0)) {
      throw DegenerateChain("forward mass vanished at frame " + std::to_string(n));
    }
    alpha.col(n) = a / c(n);
  }

  Eigen::MatrixXd beta(J, N);
  beta.col(N - 1).setOnes();
  for (int n = N - 2; n >= 0; --n) {
    beta.col(n) = chain.A * L.col(n + 1).cwiseProduct(beta.col(n + 1)) / c(n + 1);
  }

  PosteriorSet out;
  out.gamma = alpha.cwiseProduct(beta);
  out.xi.reserve(std::size_t(N - 1));
  for (int n = 0; n + 1 < N; ++n) {
    const Eigen::VectorXd right = L.col(n + 1).cwiseProduct(beta.col(n + 1));
    out.xi.push_back(chain.A.cwiseProduct(alpha.col(n) * right.transpose()) / c(n + 1));
  }
  out.log_likelihood = c.array().log().sum() + shift.sum();
  return out;
}

Eigen::VectorXd forward_predict(const ForwardState& prev, const ChainParams& chain) {
  if (prev.probs.size() != chain.states()) {
    throw ShapeMismatch("forward state size does not match chain");
  }
  return chain.A.transpose() * prev.probs;
}

ForwardState forward_update(const Eigen::VectorXd& pred, const Eigen::VectorXd& frame_loglik,
                            int frame_index) {
  if (pred.size() != frame_loglik.size()) {
    throw ShapeMismatch("prediction and loglik lengths differ");
  }
  const double m = frame_loglik.maxCoeff();
  Eigen::VectorXd w(pred.size());
  for (Eigen::Index j = 0; j < pred.size(); ++j) {
    w(j) = pred(j) * std::exp(frame_loglik(j) - m);
  }
  const double s = w.sum();
  if (!(s > 0.0)) {
    throw AllZeroPosterior("prediction puts no mass on any likely state");
  }
  return {w / s, frame_index};
}

ChainStats::ChainStats(int states)
    : initial(Eigen::VectorXd::Zero(states)), transitions(Eigen::MatrixXd::Zero(states, states)) {}

void ChainStats::accumulate(const PosteriorSet& posteriors) {
  if (posteriors.gamma.rows() != initial.size()) {
    throw ShapeMismatch("posterior state count does not match statistics");
  }
  initial += posteriors.gamma.col(0);
  for (const Eigen::MatrixXd& x : posteriors.xi) {
    transitions += x;
  }
  ++sequences;
}

ChainParams mstep_chain(const ChainStats& stats) {
  if (stats.sequences == 0 || stats.initial.size() == 0) {
    throw EmptyStatistics("no sequences accumulated");
  }
  ChainParams chain;
  // The floor turns all-zero rows into uniform ones and keeps every
  // probability strictly positive.
  chain.pi = stats.initial.cwiseMax(kFactorFloor);
  chain.pi /= chain.pi.sum();
  const int J = static_cast<int>(stats.initial.size());
  chain.A.resize(J, J);
  for (int i = 0; i < J; ++i) {
    Eigen::RowVectorXd row = stats.transitions.row(i).cwiseMax(kFactorFloor);
    chain.A.row(i) = row / row.sum();
  }
  return chain;
}

ChainParams kronecker_compose(const ChainParams& speech, const ChainParams& noise) {
  speech.validate();
  noise.validate();
  const int Js = speech.states();
  const int Jn = noise.states();
  ChainParams out;
  out.pi.resize(Js * Jn);
  out.A.resize(Js * Jn, Js * Jn);
  for (int s = 0; s < Js; ++s) {
    for (int m = 0; m < Jn; ++m) {
      out.pi(s * Jn + m) = speech.pi(s) * noise.pi(m);
    }
  }
  for (int s = 0; s < Js; ++s) {
    for (int m = 0; m < Jn; ++m) {
      for (int s2 = 0; s2 < Js; ++s2) {
        for (int m2 = 0; m2 < Jn; ++m2) {
          out.A(s * Jn + m, s2 * Jn + m2) = speech.A(s, s2) * noise.A(m, m2);
        }
      }
    }
  }
  return out;
}

}  // namespace nmfhmm
