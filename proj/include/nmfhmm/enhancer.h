#pragma once

#include <Eigen/Dense>

#include "nmfhmm/hmm_core.h"
#include "nmfhmm/spectral.h"
#include "nmfhmm/trainer.h"

namespace nmfhmm {

struct EnhanceConfig {
  int mu_iterations = 15;   // activation updates per frame and state
  double epsilon = kFactorFloor;
  bool parallel = false;    // evaluate composite states on worker threads
  double gain_floor = 0.0;  // 0 keeps the estimator untouched
};

// Speech and noise models glued together for streaming enhancement: the
// composite chain over state pairs and one stacked basis [W_speech W_noise]
// per composite state.
struct CompositeModel {
  HmmNmfModel speech;
  HmmNmfModel noise;
  ChainParams composite_chain;
  std::vector<Eigen::MatrixXd> stacked_bases;

  int bins() const { return speech.bins; }
  int composite_states() const { return composite_chain.states(); }

  static CompositeModel build(HmmNmfModel speech, HmmNmfModel noise);
};

// Per-frame activation for one composite state: multiplicative updates of an
// all-ones vector against the stacked basis, cfg.mu_iterations times.
Eigen::VectorXd estimate_activation(const Eigen::VectorXd& y, const CompositeIndex& state,
                                    const CompositeModel& model, const EnhanceConfig& cfg);

// Per-bin speech presence ratio s/(s+m) where s and m are the speech and
// noise rate vectors implied by a stacked activation. Entries lie in (0, 1).
Eigen::VectorXd state_gain(const Eigen::VectorXd& h, const CompositeIndex& state,
                           const CompositeModel& model, double eps = kFactorFloor);

struct FrameResult {
  Eigen::VectorXd enhanced;  // gain-scaled magnitudes
  ForwardState next;         // filtering posterior, the mixture weights
  Eigen::VectorXd gain;      // per-bin gain in [0, 1]
};

// One strictly causal enhancement step: per composite state an activation,
// a likelihood and a presence ratio; a forward filtering update; and the
// posterior-weighted mix of per-state ratios as the spectral gain.
FrameResult enhance_frame(const Eigen::VectorXd& y, const ForwardState& prev,
                          const CompositeModel& model, const EnhanceConfig& cfg);

struct EnhanceResult {
  AudioClip clip;
  Eigen::MatrixXd gains;  // bins x frames
};

// Full pipeline: STFT, per-frame gains with the noisy phase kept, synthesis.
EnhanceResult enhance(const AudioClip& noisy, const HmmNmfModel& speech,
                      const HmmNmfModel& noise, const EnhanceConfig& cfg = {},
                      const StftConfig& stft_cfg = {});

}  // namespace nmfhmm
