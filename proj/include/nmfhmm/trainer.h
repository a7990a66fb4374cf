#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "nmfhmm/hmm_core.h"
#include "nmfhmm/kl_nmf.h"
#include "nmfhmm/spectral.h"

namespace nmfhmm {

struct ModelMeta {
  std::uint64_t seed = 0;
  int iterations = 0;
  std::string role = "speech";    // "speech" or "noise"
  std::int64_t created_epoch = 0; // unix seconds, 0 when unspecified
  StftConfig stft;
};

// A trained source model: a state chain plus one non-negative basis per state.
struct HmmNmfModel {
  ChainParams chain;
  std::vector<Eigen::MatrixXd> bases;  // one bins x basis matrix per state
  int basis = 0;
  int bins = 0;
  ModelMeta meta;

  int states() const { return chain.states(); }
  void validate(double tol = 1e-6) const;  // throws InvariantViolation
};

struct TrainConfig {
  int states = 5;
  int basis = 10;
  int iterations = 30;
  std::uint64_t seed = 0;
  double epsilon = kFactorFloor;
  bool early_stop = false;       // stop once |dLL| <= early_stop_tol * (1 + |LL|)
  double early_stop_tol = 1e-6;
  std::string role = "speech";
};

// Random starting point: per-state bases and activations with entries uniform
// in (0, 1], uniform prior and uniform transition rows.
struct InitState {
  HmmNmfModel model;
  std::vector<Eigen::MatrixXd> activations;  // per state, basis x total_frames
};

struct TrainResult {
  HmmNmfModel model;
  std::vector<double> loglik_trace;  // one entry per completed iteration
};

InitState init_model(int bins, int total_frames, const TrainConfig& cfg);

// Offline EM over magnitude spectrograms (one matrix per utterance, shared
// bin count). Each iteration runs forward-backward per utterance, then
// re-estimates the chain, the per-state bases (posterior-weighted updates
// pooled across utterances) and the per-state activations, and renormalizes
// basis columns. The log-likelihood trace is non-decreasing.
TrainResult train(const std::vector<Eigen::MatrixXd>& spectrograms, const TrainConfig& cfg);
TrainResult train_from(const std::vector<Eigen::MatrixXd>& spectrograms, const TrainConfig& cfg,
                       InitState init);

}  // namespace nmfhmm
