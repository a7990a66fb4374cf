#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nmfhmm/spectral.h"
#include "support/synth.h"

using namespace nmfhmm;

namespace {

StftConfig small_cfg() {
  StftConfig cfg;
  cfg.frame_len = 256;
  cfg.hop = 128;
  return cfg;
}

}  // namespace

TEST_SUITE_BEGIN("spectral");

TEST_CASE("config validation") {
  StftConfig cfg;
  CHECK_NOTHROW(cfg.validate());  // 1024/512 defaults
  CHECK(cfg.bins() == 513);
  CHECK(small_cfg().bins() == 129);

  cfg.frame_len = 100;
  CHECK_THROWS_AS(cfg.validate(), ConfigMismatch);
  cfg.frame_len = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigMismatch);
  cfg = StftConfig{};
  cfg.hop = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigMismatch);
  cfg.hop = 768;  // does not divide 1024
  CHECK_THROWS_AS(cfg.validate(), ConfigMismatch);
  cfg.hop = 2048;
  CHECK_THROWS_AS(cfg.validate(), ConfigMismatch);
  cfg.hop = 1024;  // no overlap is still legal
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("frame counting") {
  const StftConfig cfg = small_cfg();
  CHECK(frame_count(1, cfg) == 1);
  CHECK(frame_count(256, cfg) == 1);
  CHECK(frame_count(257, cfg) == 2);
  CHECK(frame_count(384, cfg) == 2);
  CHECK(frame_count(385, cfg) == 3);
  CHECK(frame_count(1000, cfg) == 7);
  CHECK_THROWS_AS((void)frame_count(0, cfg), EmptyInput);
}

TEST_CASE("zero clip has zero magnitudes") {
  AudioClip clip;
  clip.samples.assign(700, 0.0);
  const Spectrogram spec = stft(clip, small_cfg());
  CHECK(spec.magnitudes.rows() == 129);
  CHECK(spec.magnitudes.cols() == 5);
  CHECK(spec.magnitudes.maxCoeff() == 0.0);
  CHECK(spec.num_samples == 700);
}

TEST_CASE("bin-centered sinusoid lands in its bin") {
  const StftConfig cfg = small_cfg();
  AudioClip clip;
  clip.samples.resize(256);
  const int k = 16;
  for (int t = 0; t < 256; ++t) {
    clip.samples[std::size_t(t)] = std::sin(2.0 * std::numbers::pi * k * t / 256.0);
  }
  const Spectrogram spec = stft(clip, cfg);
  REQUIRE(spec.magnitudes.cols() == 1);

  int argmax = 0;
  spec.magnitudes.col(0).maxCoeff(&argmax);
  CHECK(argmax == k);
  // periodic Hann at an exact bin: peak A*N/4, neighbours A*N/8, no other leakage
  CHECK(spec.magnitudes(k, 0) == doctest::Approx(64.0).epsilon(1e-12));
  CHECK(spec.magnitudes(k - 1, 0) == doctest::Approx(32.0).epsilon(1e-9));
  CHECK(spec.magnitudes(k + 1, 0) == doctest::Approx(32.0).epsilon(1e-9));
  for (int f = 0; f < 129; ++f) {
    if (std::abs(f - k) > 1) {
      CHECK(spec.magnitudes(f, 0) < 1e-9);
    }
  }
}

TEST_CASE("stft is linear in its input") {
  const StftConfig cfg = small_cfg();
  const AudioClip a = testsupport::random_clip(3, 900);
  const AudioClip b = testsupport::random_clip(4, 900);
  AudioClip sum = a;
  for (std::size_t i = 0; i < sum.samples.size(); ++i) {
    sum.samples[i] += b.samples[i];
  }
  const Spectrogram sa = stft(a, cfg);
  const Spectrogram sb = stft(b, cfg);
  const Spectrogram ss = stft(sum, cfg);
  CHECK((ss.complex_frames - sa.complex_frames - sb.complex_frames).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("analysis-synthesis round trip") {
  const StftConfig cfg = small_cfg();
  for (int n : {256, 777, 1000, 1024}) {
    const AudioClip clip = testsupport::random_clip(std::uint64_t(n), n);
    const AudioClip back = istft(stft(clip, cfg));
    REQUIRE(int(back.samples.size()) == n);
    CHECK(back.sample_rate_hz == clip.sample_rate_hz);
    // t = 0 sits under the window zero and cannot be recovered
    for (int t = 1; t < n; ++t) {
      CHECK(std::abs(back.samples[std::size_t(t)] - clip.samples[std::size_t(t)]) < 1e-6);
    }
  }
}

TEST_CASE("synthesis follows a spectral gain") {
  const StftConfig cfg = small_cfg();
  const AudioClip clip = testsupport::random_clip(9, 800);
  Spectrogram spec = stft(clip, cfg);
  spec.complex_frames *= 0.5;
  const AudioClip back = istft(spec);
  for (int t = 1; t < 800; ++t) {
    CHECK(std::abs(back.samples[std::size_t(t)] - 0.5 * clip.samples[std::size_t(t)]) < 1e-6);
  }
}

TEST_CASE("shape and input errors") {
  AudioClip empty;
  CHECK_THROWS_AS((void)stft(empty, small_cfg()), EmptyInput);

  AudioClip clip;
  clip.samples.assign(300, 0.1);
  Spectrogram spec = stft(clip, small_cfg());
  spec.complex_frames.conservativeResize(64, spec.complex_frames.cols());
  CHECK_THROWS_AS((void)istft(spec), ConfigMismatch);

  StftConfig bad;
  bad.frame_len = 300;
  CHECK_THROWS_AS((void)stft(clip, bad), ConfigMismatch);
}

TEST_SUITE_END();
