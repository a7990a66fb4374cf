#pragma once

#include <Eigen/Dense>
#include <vector>

#include "nmfhmm/errors.h"

namespace nmfhmm {

struct ChainParams {
  Eigen::VectorXd pi;  // initial state distribution
  Eigen::MatrixXd A;   // row-stochastic, A(i, j) = P(next = j | current = i)

  int states() const { return static_cast<int>(pi.size()); }
  void validate(double tol = 1e-6) const;  // throws InvariantViolation
};

struct PosteriorSet {
  Eigen::MatrixXd gamma;            // states x frames, per-frame posteriors
  std::vector<Eigen::MatrixXd> xi;  // frames-1 joint posteriors of (frame n, frame n+1)
  double log_likelihood = 0.0;      // up to dropped per-frame constants
};

struct ForwardState {
  Eigen::VectorXd probs;
  int frame_index = -1;  // -1 means nothing observed yet; probs hold the prior
};

// Addresses one of the speech_states * noise_states composite states.
// Flattening is speech-major: flat = speech * noise_states + noise.
struct CompositeIndex {
  int speech = 0;
  int noise = 0;

  static CompositeIndex from_flat(int flat, int noise_states) {
    return {flat / noise_states, flat % noise_states};
  }
  int flat(int noise_states) const { return speech * noise_states + noise; }
};

// log p(y | rate) for independent Poisson bins, dropping the data-only
// log-factorial term: sum_f y_f*log(rate_f) - rate_f. Rates must be positive.
double poisson_state_loglik(const Eigen::VectorXd& y, const Eigen::VectorXd& rate);

// Column-wise variant of poisson_state_loglik over a whole spectrogram.
Eigen::RowVectorXd poisson_loglik_frames(const Eigen::MatrixXd& V, const Eigen::MatrixXd& rates);

// Scaled forward-backward over per-state log-likelihood columns. gamma columns
// and every xi matrix sum to one; log_likelihood is the full-sequence value
// under the same dropped-constant convention as the input.
PosteriorSet forward_backward(const Eigen::MatrixXd& loglik, const ChainParams& chain);

// One-step predictive distribution A' * prev.probs. The first frame of a
// sequence uses the prior directly instead.
Eigen::VectorXd forward_predict(const ForwardState& prev, const ChainParams& chain);

// Bayes update of a predictive distribution with one frame's log-likelihoods,
// shifted by their max before exponentiation and renormalized.
ForwardState forward_update(const Eigen::VectorXd& pred, const Eigen::VectorXd& frame_loglik,
                            int frame_index = 0);

// Posterior statistics accumulated across one or more sequences.
struct ChainStats {
  Eigen::VectorXd initial;       // sum of first-frame posteriors
  Eigen::MatrixXd transitions;   // sum of xi over frames and sequences
  int sequences = 0;

  explicit ChainStats(int states = 0);
  void accumulate(const PosteriorSet& posteriors);
};

// Chain re-estimation: pi from first-frame posteriors, A rows from expected
// transition counts. Zero rows fall back to uniform via the entry floor.
ChainParams mstep_chain(const ChainStats& stats);

// Composite chain over independent source chains: pi = kron(pi_s, pi_n),
// A = kron(A_s, A_n), with the speech-major state order of CompositeIndex.
ChainParams kronecker_compose(const ChainParams& speech, const ChainParams& noise);

}  // namespace nmfhmm
