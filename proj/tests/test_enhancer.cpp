#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "nmfhmm/enhancer.h"
#include "nmfhmm/metrics.h"
#include "nmfhmm/spectral.h"
#include "nmfhmm/trainer.h"
#include "support/synth.h"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using namespace nmfhmm;

namespace {

HmmNmfModel toy_model(const std::string& role, int states, int basis, int bins,
                      std::uint64_t seed) {
  HmmNmfModel model;
  std::mt19937_64 rng(seed);
  model.chain.pi = random_matrix_open_closed(states, 1, rng);
  model.chain.pi /= model.chain.pi.sum();
  model.chain.A = random_matrix_open_closed(states, states, rng);
  for (int i = 0; i < states; ++i) {
    model.chain.A.row(i) /= model.chain.A.row(i).sum();
  }
  for (int j = 0; j < states; ++j) {
    MatrixXd W = random_matrix_open_closed(bins, basis, rng);
    for (int k = 0; k < basis; ++k) {
      W.col(k) /= W.col(k).sum();
    }
    model.bases.push_back(std::move(W));
  }
  model.basis = basis;
  model.bins = bins;
  model.meta.role = role;
  return model;
}

// Flat two-bin basis shared by speech and noise: y = (4, 4) is then an exact
// fixed point of the activation update with h = (4, 4).
CompositeModel flat_composite() {
  HmmNmfModel speech = toy_model("speech", 1, 1, 2, 1);
  HmmNmfModel noise = toy_model("noise", 1, 1, 2, 2);
  speech.bases[0] = MatrixXd::Constant(2, 1, 0.5);
  noise.bases[0] = MatrixXd::Constant(2, 1, 0.5);
  return CompositeModel::build(speech, noise);
}

StftConfig tiny_stft() {
  StftConfig cfg;
  cfg.frame_len = 64;
  cfg.hop = 32;
  return cfg;
}

}  // namespace

TEST_SUITE_BEGIN("enhancer");

TEST_CASE("composite model stacks bases and chains in speech-major order") {
  const HmmNmfModel speech = toy_model("speech", 2, 3, 5, 10);
  const HmmNmfModel noise = toy_model("noise", 3, 2, 5, 11);
  const CompositeModel model = CompositeModel::build(speech, noise);

  CHECK(model.bins() == 5);
  CHECK(model.composite_states() == 6);
  REQUIRE(model.stacked_bases.size() == 6);
  for (int s = 0; s < 2; ++s) {
    for (int m = 0; m < 3; ++m) {
      const MatrixXd& stacked = model.stacked_bases[std::size_t(CompositeIndex{s, m}.flat(3))];
      CHECK((stacked.leftCols(3) - speech.bases[std::size_t(s)]).cwiseAbs().maxCoeff() == 0.0);
      CHECK((stacked.rightCols(2) - noise.bases[std::size_t(m)]).cwiseAbs().maxCoeff() == 0.0);
    }
  }
  const ChainParams expect = kronecker_compose(speech.chain, noise.chain);
  CHECK((model.composite_chain.pi - expect.pi).cwiseAbs().maxCoeff() == 0.0);
  CHECK((model.composite_chain.A - expect.A).cwiseAbs().maxCoeff() == 0.0);

  const HmmNmfModel other = toy_model("noise", 1, 1, 7, 12);
  CHECK_THROWS_AS((void)CompositeModel::build(speech, other), ModelDimensionMismatch);
}

TEST_CASE("activation estimate hand case") {
  const CompositeModel model = flat_composite();
  EnhanceConfig cfg;
  VectorXd y(2);
  y << 4.0, 4.0;
  const VectorXd h = estimate_activation(y, CompositeIndex{0, 0}, model, cfg);
  REQUIRE(h.size() == 2);
  CHECK(h(0) == 4.0);
  CHECK(h(1) == 4.0);

  const VectorXd h0 = estimate_activation(VectorXd::Zero(2), CompositeIndex{0, 0}, model, cfg);
  CHECK(h0(0) == cfg.epsilon);
  CHECK(h0(1) == cfg.epsilon);

  CHECK_THROWS_AS((void)estimate_activation(VectorXd::Ones(3), CompositeIndex{0, 0}, model, cfg),
                  ModelDimensionMismatch);
  CHECK_THROWS_AS((void)estimate_activation(y, CompositeIndex{1, 0}, model, cfg),
                  ModelDimensionMismatch);
}

TEST_CASE("state gain splits equal sources evenly and sums to one") {
  const CompositeModel model = flat_composite();
  VectorXd h(2);
  h << 4.0, 4.0;
  const VectorXd gain = state_gain(h, CompositeIndex{0, 0}, model, kFactorFloor);
  CHECK(gain(0) == 0.5);
  CHECK(gain(1) == 0.5);

  // speech ratio and its complement reconstruct one exactly, bin by bin
  const HmmNmfModel speech = toy_model("speech", 2, 3, 9, 20);
  const HmmNmfModel noise = toy_model("noise", 2, 2, 9, 21);
  const CompositeModel mixed = CompositeModel::build(speech, noise);
  std::mt19937_64 rng(22);
  for (int flat = 0; flat < mixed.composite_states(); ++flat) {
    const VectorXd ha = random_matrix_open_closed(5, 1, rng) * 3.0;
    const VectorXd p =
        state_gain(ha, CompositeIndex::from_flat(flat, 2), mixed, kFactorFloor);
    for (int f = 0; f < p.size(); ++f) {
      CHECK(p(f) > 0.0);
      CHECK(p(f) < 1.0);
      const double q = 1.0 - p(f);
      CHECK(p(f) + q == 1.0);
    }
  }
}

TEST_CASE("with one composite state the frame gain is the state gain") {
  const HmmNmfModel speech = toy_model("speech", 1, 3, 6, 30);
  const HmmNmfModel noise = toy_model("noise", 1, 2, 6, 31);
  const CompositeModel model = CompositeModel::build(speech, noise);
  EnhanceConfig cfg;
  std::mt19937_64 rng(32);
  const VectorXd y = random_matrix_open_closed(6, 1, rng) * 2.0;

  const FrameResult frame = enhance_frame(y, ForwardState{model.composite_chain.pi, -1}, model, cfg);
  const VectorXd h = estimate_activation(y, CompositeIndex{0, 0}, model, cfg);
  const VectorXd direct = state_gain(h, CompositeIndex{0, 0}, model, cfg.epsilon);

  CHECK(frame.next.probs(0) == 1.0);
  CHECK(frame.next.frame_index == 0);
  CHECK((frame.gain - direct).cwiseAbs().maxCoeff() == 0.0);
  CHECK((frame.enhanced - y.cwiseProduct(direct)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("frame gain is the posterior blend of state gains") {
  const HmmNmfModel speech = toy_model("speech", 2, 2, 6, 40);
  const HmmNmfModel noise = toy_model("noise", 1, 2, 6, 41);
  const CompositeModel model = CompositeModel::build(speech, noise);
  EnhanceConfig cfg;
  std::mt19937_64 rng(42);
  const VectorXd y = random_matrix_open_closed(6, 1, rng) * 3.0;

  ForwardState prev{VectorXd::Zero(2), 3};
  prev.probs << 0.25, 0.75;
  const FrameResult frame = enhance_frame(y, prev, model, cfg);
  CHECK(frame.next.frame_index == 4);

  VectorXd logliks(2);
  std::vector<VectorXd> p;
  for (int c = 0; c < 2; ++c) {
    const CompositeIndex idx = CompositeIndex::from_flat(c, 1);
    const VectorXd h = estimate_activation(y, idx, model, cfg);
    p.push_back(state_gain(h, idx, model, cfg.epsilon));
    const VectorXd rs =
        (model.speech.bases[std::size_t(idx.speech)] * h.head(2)).cwiseMax(cfg.epsilon);
    const VectorXd rm =
        (model.noise.bases[std::size_t(idx.noise)] * h.tail(2)).cwiseMax(cfg.epsilon);
    logliks(c) = poisson_state_loglik(y, rs + rm);
  }
  const ForwardState expect_state =
      forward_update(forward_predict(prev, model.composite_chain), logliks, 4);
  CHECK((frame.next.probs - expect_state.probs).cwiseAbs().maxCoeff() == 0.0);

  VectorXd blend = VectorXd::Zero(6);
  for (int c = 0; c < 2; ++c) {
    blend += expect_state.probs(c) * p[std::size_t(c)];
  }
  CHECK((frame.gain - blend).cwiseAbs().maxCoeff() == 0.0);
  CHECK(frame.gain.minCoeff() >= 0.0);
  CHECK(frame.gain.maxCoeff() <= 1.0);
}

TEST_CASE("a model that explains the input passes it through") {
  const StftConfig cfg = tiny_stft();
  const int bins = cfg.bins();

  HmmNmfModel speech = toy_model("speech", 1, bins, bins, 50);
  speech.bases[0] = MatrixXd::Identity(bins, bins);
  HmmNmfModel noise = toy_model("noise", 1, 1, bins, 51);
  noise.bases[0] = MatrixXd::Constant(bins, 1, 1e-12);

  const AudioClip clip = testsupport::random_clip(52, 500, 0.4);
  const EnhanceResult out = enhance(clip, speech, noise, EnhanceConfig{}, cfg);
  REQUIRE(out.clip.samples.size() == clip.samples.size());
  CHECK(out.gains.minCoeff() > 0.9);
  for (std::size_t t = 1; t < clip.samples.size(); ++t) {
    CHECK(std::abs(out.clip.samples[t] - clip.samples[t]) < 1e-6);
  }
}

TEST_CASE("gain floor keeps bins audible") {
  const int bins = tiny_stft().bins();
  HmmNmfModel speech = toy_model("speech", 1, 1, bins, 60);
  speech.bases[0] = MatrixXd::Constant(bins, 1, 1.0 / bins);
  HmmNmfModel noise = toy_model("noise", 1, bins, bins, 61);
  noise.bases[0] = MatrixXd::Identity(bins, bins);
  const AudioClip clip = testsupport::random_clip(62, 400, 0.4);

  const EnhanceResult raw = enhance(clip, speech, noise, EnhanceConfig{}, tiny_stft());
  REQUIRE(raw.gains.minCoeff() < 0.3);  // the noise basis wins most bins

  EnhanceConfig floored;
  floored.gain_floor = 0.3;
  const EnhanceResult out = enhance(clip, speech, noise, floored, tiny_stft());
  CHECK(out.gains.minCoeff() >= 0.3);
  CHECK(out.gains.maxCoeff() <= std::max(raw.gains.maxCoeff(), 0.3));
}

TEST_CASE("parallel evaluation is bit-identical to sequential") {
  const HmmNmfModel speech = toy_model("speech", 3, 2, tiny_stft().bins(), 70);
  const HmmNmfModel noise = toy_model("noise", 2, 2, tiny_stft().bins(), 71);
  const AudioClip clip = testsupport::random_clip(72, 700, 0.4);

  EnhanceConfig seq;
  EnhanceConfig par;
  par.parallel = true;
  const EnhanceResult a = enhance(clip, speech, noise, seq, tiny_stft());
  const EnhanceResult b = enhance(clip, speech, noise, par, tiny_stft());

  CHECK((a.gains - b.gains).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(a.clip.samples.size() == b.clip.samples.size());
  for (std::size_t t = 0; t < a.clip.samples.size(); ++t) {
    CHECK(a.clip.samples[t] == b.clip.samples[t]);
  }
}

TEST_CASE("gains are causal in the frame sequence") {
  const StftConfig cfg = tiny_stft();
  const HmmNmfModel speech = toy_model("speech", 2, 2, cfg.bins(), 80);
  const HmmNmfModel noise = toy_model("noise", 2, 2, cfg.bins(), 81);
  const AudioClip clip = testsupport::random_clip(82, 64 + 9 * 32, 0.4);

  const EnhanceResult full = enhance(clip, speech, noise, EnhanceConfig{}, cfg);
  AudioClip prefix = clip;
  prefix.samples.resize(64 + 5 * 32);  // first six frames unchanged
  const EnhanceResult head = enhance(prefix, speech, noise, EnhanceConfig{}, cfg);

  REQUIRE(head.gains.cols() == 6);
  CHECK((full.gains.leftCols(6) - head.gains).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("denoising a disjoint-band mixture helps") {
  const StftConfig cfg = tiny_stft();
  const AudioClip voice = testsupport::synthetic_voice(5, 0.6);
  const AudioClip hiss = testsupport::synthetic_band_noise(6, 0.6);

  TrainConfig tc;
  tc.states = 2;
  tc.basis = 3;
  tc.iterations = 12;
  tc.seed = 2;
  const TrainResult speech = train({stft(voice, cfg).magnitudes}, tc);
  tc.states = 1;
  tc.basis = 2;
  tc.role = "noise";
  const TrainResult noise = train({stft(hiss, cfg).magnitudes}, tc);

  const AudioClip mixed = testsupport::mix_at_snr(voice, hiss, 0.0);
  const EnhanceResult out = enhance(mixed, speech.model, noise.model, EnhanceConfig{}, cfg);

  const double before = segmental_snr(voice, mixed, 512);
  const double after = segmental_snr(voice, out.clip, 512);
  CHECK(after > before + 1.0);
}

TEST_CASE("dimension guards") {
  const HmmNmfModel speech = toy_model("speech", 2, 2, 5, 90);
  const HmmNmfModel noise = toy_model("noise", 2, 2, 5, 91);
  const CompositeModel model = CompositeModel::build(speech, noise);
  EnhanceConfig cfg;

  CHECK_THROWS_AS((void)enhance_frame(VectorXd::Ones(5), ForwardState{VectorXd::Ones(3), -1}, model, cfg),
                  ModelDimensionMismatch);
  CHECK_THROWS_AS((void)enhance_frame(VectorXd::Ones(4), ForwardState{model.composite_chain.pi, -1},
                                      model, cfg),
                  ModelDimensionMismatch);

  const AudioClip clip = testsupport::random_clip(92, 300, 0.3);
  CHECK_THROWS_AS((void)enhance(clip, speech, noise, cfg, tiny_stft()), ModelDimensionMismatch);
}

TEST_SUITE_END();
