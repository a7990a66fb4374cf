#include "nmfhmm/trainer.h"

#include <cmath>
#include <string>
#include <utility>

namespace nmfhmm {

void HmmNmfModel::validate(double tol) const {
  chain.validate(tol);
  if (basis < 1 || bins < 1) {
    throw InvariantViolation("model needs positive basis and bin counts");
  }
  if (static_cast<int>(bases.size()) != states()) {
    throw InvariantViolation("one basis per state required");
  }
  if (meta.role != "speech" && meta.role != "noise") {
    throw InvariantViolation("model role must be speech or noise");
  }
  for (std::size_t j = 0; j < bases.size(); ++j) {
    const Eigen::MatrixXd& W = bases[j];
    if (W.rows() != bins || W.cols() != basis) {
      throw InvariantViolation("basis " + std::to_string(j) + " has wrong shape");
    }
    if ((W.array() <= 0.0).any()) {
      throw InvariantViolation("basis " + std::to_string(j) + " has non-positive entries");
    }
    for (int k = 0; k < basis; ++k) {
      if (std::abs(W.col(k).sum() - 1.0) > tol) {
        throw InvariantViolation("basis " + std::to_string(j) + " column " + std::to_string(k) +
                                 " is not normalized");
      }
    }
  }
}

InitState init_model(int bins, int total_frames, const TrainConfig& cfg) {
  if (bins < 1 || total_frames < 1 || cfg.states < 1 || cfg.basis < 1) {
    throw DimensionMismatch("init_model needs positive dimensions");
  }
  std::mt19937_64 rng(cfg.seed);
  InitState init;
  init.model.basis = cfg.basis;
  init.model.bins = bins;
  init.model.chain.pi = Eigen::VectorXd::Constant(cfg.states, 1.0 / cfg.states);
  init.model.chain.A = Eigen::MatrixXd::Constant(cfg.states, cfg.states, 1.0 / cfg.states);
  init.model.meta.seed = cfg.seed;
  init.model.meta.iterations = 0;
  init.model.meta.role = cfg.role;
  for (int j = 0; j < cfg.states; ++j) {
    init.model.bases.push_back(random_matrix_open_closed(bins, cfg.basis, rng));
    init.activations.push_back(random_matrix_open_closed(cfg.basis, total_frames, rng));
  }
  return init;
}

TrainResult train(const std::vector<Eigen::MatrixXd>& spectrograms, const TrainConfig& cfg) {
  if (spectrograms.empty()) {
    throw DimensionMismatch("no training spectrograms");
  }
  int total = 0;
  for (const Eigen::MatrixXd& s : spectrograms) {
    total += static_cast<int>(s.cols());
  }
  return train_from(spectrograms, cfg,
                    init_model(static_cast<int>(spectrograms.front().rows()), total, cfg));
}

TrainResult train_from(const std::vector<Eigen::MatrixXd>& spectrograms, const TrainConfig& cfg,
                       InitState init) {
  if (spectrograms.empty()) {
    throw DimensionMismatch("no training spectrograms");
  }
  const int F = static_cast<int>(spectrograms.front().rows());
  int total = 0;
  for (const Eigen::MatrixXd& s : spectrograms) {
    if (s.rows() != F) {
      throw DimensionMismatch("all spectrograms must share the bin count");
    }
    if (s.cols() < 1) {
      throw DimensionMismatch("empty spectrogram in training set");
    }
    total += static_cast<int>(s.cols());
  }
  const int J = cfg.states;
  const int K = cfg.basis;
  if (total < J) {
    throw DimensionMismatch("need at least one frame per state");
  }
  if (init.model.bins != F || init.model.basis != K || init.model.states() != J ||
      static_cast<int>(init.activations.size()) != J ||
      init.activations.front().cols() != total) {
    throw DimensionMismatch("initialization does not match data and config");
  }
  const double eps = cfg.epsilon;

  // Utterances are packed side by side; activation updates are per-frame so
  // only the chain statistics need the boundaries.
  Eigen::MatrixXd V(F, total);
  std::vector<std::pair<int, int>> spans;  // (offset, frames)
  {
    int off = 0;
    for (const Eigen::MatrixXd& s : spectrograms) {
      const int n = static_cast<int>(s.cols());
      V.middleCols(off, n) = s;
      spans.emplace_back(off, n);
      off += n;
    }
  }

  ChainParams chain = std::move(init.model.chain);
  std::vector<Eigen::MatrixXd> W = std::move(init.model.bases);
  std::vector<Eigen::MatrixXd> H = std::move(init.activations);

  TrainResult result;
  for (int iter = 0; iter < cfg.iterations; ++iter) {
    Eigen::MatrixXd loglik(J, total);
    for (int j = 0; j < J; ++j) {
      loglik.row(j) = poisson_loglik_frames(V, (W[std::size_t(j)] * H[std::size_t(j)]).cwiseMax(eps));
    }

    ChainStats stats(J);
    Eigen::MatrixXd gamma(J, total);
    double total_ll = 0.0;
    for (const auto& [off, n] : spans) {
      PosteriorSet post = forward_backward(loglik.middleCols(off, n), chain);
      gamma.middleCols(off, n) = post.gamma;
      total_ll += post.log_likelihood;
      stats.accumulate(post);
    }
    result.loglik_trace.push_back(total_ll);

    chain = mstep_chain(stats);
    for (int j = 0; j < J; ++j) {
      W[std::size_t(j)] =
          mu_update_w_weighted(V, W[std::size_t(j)], H[std::size_t(j)],
                               gamma.row(j).transpose(), eps);
    }
    for (int j = 0; j < J; ++j) {
      H[std::size_t(j)] = mu_update_h_weighted(V, W[std::size_t(j)], H[std::size_t(j)], eps);
    }
    for (int j = 0; j < J; ++j) {
      NmfFactors f = normalize_columns({std::move(W[std::size_t(j)]), std::move(H[std::size_t(j)])}, eps);
      W[std::size_t(j)] = std::move(f.W);
      H[std::size_t(j)] = std::move(f.H);
    }

    if (cfg.early_stop && result.loglik_trace.size() >= 2) {
      const double prev = result.loglik_trace[result.loglik_trace.size() - 2];
      const double cur = result.loglik_trace.back();
      if (std::abs(cur - prev) <= cfg.early_stop_tol * (1.0 + std::abs(prev))) {
        break;
      }
    }
  }

  result.model.chain = std::move(chain);
  result.model.bases = std::move(W);
  result.model.basis = K;
  result.model.bins = F;
  result.model.meta = init.model.meta;
  result.model.meta.iterations = static_cast<int>(result.loglik_trace.size());
  result.model.meta.role = cfg.role;
  result.model.meta.seed = cfg.seed;
  return result;
}

}  // namespace nmfhmm
