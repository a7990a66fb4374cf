#include "nmfhmm/spectral.h"

#include <cmath>
#include <numbers>
#include <vector>

namespace nmfhmm {

namespace {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

// Iterative radix-2 transform, enough for power-of-two frame sizes.
void fft_inplace(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * std::numbers::pi / double(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse) {
    for (auto& x : a) x /= double(n);
  }
}

std::vector<double> make_window(const StftConfig& cfg) {
  std::vector<double> w(std::size_t(cfg.frame_len));
  // periodic Hann
  for (int i = 0; i < cfg.frame_len; ++i) {
    w[std::size_t(i)] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / cfg.frame_len);
  }
  return w;
}

}  // namespace

void StftConfig::validate() const {
  if (!is_pow2(frame_len)) {
    throw ConfigMismatch("frame_len must be a power of two, got " + std::to_string(frame_len));
  }
  if (hop <= 0 || hop > frame_len || frame_len % hop != 0) {
    throw ConfigMismatch("hop must divide frame_len, got hop=" + std::to_string(hop) +
                         " frame_len=" + std::to_string(frame_len));
  }
}

int frame_count(int num_samples, const StftConfig& cfg) {
  cfg.validate();
  if (num_samples <= 0) {
    throw EmptyInput("frame_count needs a non-empty clip");
  }
  if (num_samples <= cfg.frame_len) {
    return 1;
  }
  const int tail = num_samples - cfg.frame_len;
  return 1 + (tail + cfg.hop - 1) / cfg.hop;
}

Spectrogram stft(const AudioClip& clip, const StftConfig& cfg) {
  cfg.validate();
  if (clip.samples.empty()) {
    throw EmptyInput("stft on empty clip");
  }
  const int num_samples = static_cast<int>(clip.samples.size());
  const int frames = frame_count(num_samples, cfg);
  const int bins = cfg.bins();
  const std::vector<double> window = make_window(cfg);

  Spectrogram spec;
  spec.config = cfg;
  spec.num_samples = num_samples;
  spec.sample_rate_hz = clip.sample_rate_hz;
  spec.complex_frames.resize(bins, frames);

  std::vector<std::complex<double>> buf(std::size_t(cfg.frame_len));
  for (int m = 0; m < frames; ++m) {
    const int start = m * cfg.hop;
    for (int i = 0; i < cfg.frame_len; ++i) {
      const int t = start + i;
      const double x = t < num_samples ? clip.samples[std::size_t(t)] : 0.0;  // tail padding
      buf[std::size_t(i)] = window[std::size_t(i)] * x;
    }
    fft_inplace(buf, false);
    for (int f = 0; f < bins; ++f) {
      spec.complex_frames(f, m) = buf[std::size_t(f)];
    }
  }
  spec.magnitudes = spec.complex_frames.cwiseAbs();
  return spec;
}

AudioClip istft(const Spectrogram& spec) {
  const StftConfig& cfg = spec.config;
  cfg.validate();
  const int bins = cfg.bins();
  if (spec.complex_frames.rows() != bins || spec.complex_frames.cols() < 1) {
    throw ConfigMismatch("spectrogram shape does not match its config");
  }
  const int frames = static_cast<int>(spec.complex_frames.cols());
  const int padded = cfg.frame_len + (frames - 1) * cfg.hop;
  const int out_len = spec.num_samples > 0 ? std::min(spec.num_samples, padded) : padded;

  const std::vector<double> window = make_window(cfg);
  std::vector<double> acc(std::size_t(padded), 0.0);
  std::vector<double> norm(std::size_t(padded), 0.0);

  std::vector<std::complex<double>> buf(std::size_t(cfg.frame_len));
  for (int m = 0; m < frames; ++m) {
    // rebuild the two-sided spectrum by conjugate symmetry
    for (int f = 0; f < bins; ++f) {
      buf[std::size_t(f)] = spec.complex_frames(f, m);
    }
    for (int f = bins; f < cfg.frame_len; ++f) {
      buf[std::size_t(f)] = std::conj(spec.complex_frames(cfg.frame_len - f, m));
    }
    fft_inplace(buf, true);
    const int start = m * cfg.hop;
    for (int i = 0; i < cfg.frame_len; ++i) {
      const double w = window[std::size_t(i)];
      acc[std::size_t(start + i)] += w * buf[std::size_t(i)].real();
      norm[std::size_t(start + i)] += w * w;
    }
  }

  AudioClip clip;
  clip.sample_rate_hz = spec.sample_rate_hz;
  clip.samples.resize(std::size_t(out_len));
  for (int t = 0; t < out_len; ++t) {
    const double d = norm[std::size_t(t)];
    clip.samples[std::size_t(t)] = d > 1e-300 ? acc[std::size_t(t)] / d : 0.0;
  }
  return clip;
}

}  // namespace nmfhmm
