#include "nmfhmm/enhancer.h"

#include <future>
#include <thread>
#include <utility>

namespace nmfhmm {

namespace {

struct SourceRates {
  Eigen::VectorXd speech;
  Eigen::VectorXd noise;
};

// Speech and noise rate vectors implied by a stacked activation, floored so
// the ratio and the likelihood are always defined.
SourceRates split_rates(const Eigen::VectorXd& h, const CompositeIndex& state,
                        const CompositeModel& model, double eps) {
  const int kb = model.speech.basis;
  const int kd = model.noise.basis;
  if (h.size() != kb + kd) {
    throw ShapeMismatch("activation length does not match the stacked basis");
  }
  SourceRates r;
  r.speech = (model.speech.bases[std::size_t(state.speech)] * h.head(kb)).cwiseMax(eps);
  r.noise = (model.noise.bases[std::size_t(state.noise)] * h.tail(kd)).cwiseMax(eps);
  return r;
}

struct StateEval {
  Eigen::VectorXd p;  // per-bin speech presence ratio
  double loglik = 0.0;
};

StateEval eval_state(const Eigen::VectorXd& y, int flat, const CompositeModel& model,
                     const EnhanceConfig& cfg) {
  const CompositeIndex idx = CompositeIndex::from_flat(flat, model.noise.states());
  const Eigen::VectorXd h = estimate_activation(y, idx, model, cfg);
  const SourceRates r = split_rates(h, idx, model, cfg.epsilon);
  StateEval ev;
  ev.p = r.speech.array() / (r.speech + r.noise).array();
  ev.loglik = poisson_state_loglik(y, r.speech + r.noise);
  return ev;
}

}  // namespace

CompositeModel CompositeModel::build(HmmNmfModel speech, HmmNmfModel noise) {
  if (speech.bins != noise.bins) {
    throw ModelDimensionMismatch("speech model has " + std::to_string(speech.bins) +
                                 " bins, noise model " + std::to_string(noise.bins));
  }
  CompositeModel model;
  model.composite_chain = kronecker_compose(speech.chain, noise.chain);
  model.stacked_bases.reserve(std::size_t(speech.states() * noise.states()));
  for (int s = 0; s < speech.states(); ++s) {
    for (int m = 0; m < noise.states(); ++m) {
      Eigen::MatrixXd stacked(speech.bins, speech.basis + noise.basis);
      stacked << speech.bases[std::size_t(s)], noise.bases[std::size_t(m)];
      model.stacked_bases.push_back(std::move(stacked));
    }
  }
  model.speech = std::move(speech);
  model.noise = std::move(noise);
  return model;
}

Eigen::VectorXd estimate_activation(const Eigen::VectorXd& y, const CompositeIndex& state,
                                    const CompositeModel& model, const EnhanceConfig& cfg) {
  const int flat = state.flat(model.noise.states());
  if (flat < 0 || flat >= model.composite_states()) {
    throw ModelDimensionMismatch("composite state out of range");
  }
  const Eigen::MatrixXd& W = model.stacked_bases[std::size_t(flat)];
  if (y.size() != W.rows()) {
    throw ModelDimensionMismatch("frame has " + std::to_string(y.size()) + " bins, model " +
                                 std::to_string(W.rows()));
  }
  Eigen::MatrixXd h = Eigen::MatrixXd::Ones(W.cols(), 1);
  for (int i = 0; i < cfg.mu_iterations; ++i) {
    h = mu_update_h(y, W, h, cfg.epsilon);
  }
  return h.col(0);
}

Eigen::VectorXd state_gain(const Eigen::VectorXd& h, const CompositeIndex& state,
                           const CompositeModel& model, double eps) {
  const SourceRates r = split_rates(h, state, model, eps);
  return r.speech.array() / (r.speech + r.noise).array();
}

FrameResult enhance_frame(const Eigen::VectorXd& y, const ForwardState& prev,
                          const CompositeModel& model, const EnhanceConfig& cfg) {
  const int C = model.composite_states();
  if (prev.probs.size() != C) {
    throw ModelDimensionMismatch("forward state does not match composite chain");
  }

  // Per-state work is independent; results land in slots indexed by the flat
  // state so the later reduction order is the same with and without threads.
  std::vector<StateEval> evals{std::size_t(C)};
  if (cfg.parallel && C > 1) {
    const int workers = std::min(C, int(std::max(1u, std::thread::hardware_concurrency())));
    std::vector<std::future<void>> futs;
    futs.reserve(std::size_t(workers));
    for (int w = 0; w < workers; ++w) {
      futs.push_back(std::async(std::launch::async, [&, w] {
        for (int c = w; c < C; c += workers) {
          evals[std::size_t(c)] = eval_state(y, c, model, cfg);
        }
      }));
    }
    for (auto& f : futs) f.get();
  } else {
    for (int c = 0; c < C; ++c) {
      evals[std::size_t(c)] = eval_state(y, c, model, cfg);
    }
  }

  Eigen::VectorXd logliks(C);
  for (int c = 0; c < C; ++c) {
    logliks(c) = evals[std::size_t(c)].loglik;
  }
  const Eigen::VectorXd pred =
      prev.frame_index < 0 ? model.composite_chain.pi : forward_predict(prev, model.composite_chain);

  FrameResult out;
  out.next = forward_update(pred, logliks, prev.frame_index + 1);
  out.gain = Eigen::VectorXd::Zero(y.size());
  for (int c = 0; c < C; ++c) {
    out.gain += out.next.probs(c) * evals[std::size_t(c)].p;
  }
  if (cfg.gain_floor > 0.0) {
    out.gain = out.gain.cwiseMax(cfg.gain_floor);
  }
  out.enhanced = y.cwiseProduct(out.gain);
  return out;
}

EnhanceResult enhance(const AudioClip& noisy, const HmmNmfModel& speech, const HmmNmfModel& noise,
                      const EnhanceConfig& cfg, const StftConfig& stft_cfg) {
  stft_cfg.validate();
  if (speech.bins != stft_cfg.bins() || noise.bins != stft_cfg.bins()) {
    throw ModelDimensionMismatch("model bins do not match the transform size");
  }
  const CompositeModel model = CompositeModel::build(speech, noise);

  Spectrogram spec = stft(noisy, stft_cfg);
  const int frames = static_cast<int>(spec.complex_frames.cols());
  EnhanceResult result;
  result.gains.resize(spec.magnitudes.rows(), frames);

  ForwardState state{model.composite_chain.pi, -1};
  for (int n = 0; n < frames; ++n) {
    FrameResult fr = enhance_frame(spec.magnitudes.col(n), state, model, cfg);
    result.gains.col(n) = fr.gain;
    spec.complex_frames.col(n) = spec.complex_frames.col(n).cwiseProduct(
        fr.gain.cast<std::complex<double>>());  // noisy phase kept
    state = std::move(fr.next);
  }
  spec.magnitudes = spec.complex_frames.cwiseAbs();
  result.clip = istft(spec);
  return result;
}

}  // namespace nmfhmm
