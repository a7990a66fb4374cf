#include "nmfhmm/metrics.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace nmfhmm {

namespace {

constexpr double kMagFloor = 1e-12;
constexpr double kTiny = 1e-300;

std::vector<double> per_frame_snr(const AudioClip& reference, const AudioClip& test,
                                  int frame_len) {
  if (frame_len < 1) {
    throw LengthMismatch("metric frame length must be positive");
  }
  if (reference.sample_rate_hz != test.sample_rate_hz) {
    throw RateMismatch("sample rates differ: " + std::to_string(reference.sample_rate_hz) +
                       " vs " + std::to_string(test.sample_rate_hz));
  }
  const std::size_t nr = reference.samples.size();
  const std::size_t nt = test.samples.size();
  const std::size_t n = std::min(nr, nt);
  if (n == 0) {
    throw LengthMismatch("empty signal");
  }
  if (std::max(nr, nt) - n > std::size_t(frame_len)) {
    throw LengthMismatch("signal lengths differ by more than one frame");
  }
  const std::size_t frames = n / std::size_t(frame_len);
  if (frames == 0) {
    throw LengthMismatch("signals shorter than one metric frame");
  }
  std::vector<double> out(frames);
  for (std::size_t m = 0; m < frames; ++m) {
    double sig = 0.0, err = 0.0;
    for (std::size_t i = m * std::size_t(frame_len); i < (m + 1) * std::size_t(frame_len); ++i) {
      const double r = reference.samples[i];
      const double d = r - test.samples[i];
      sig += r * r;
      err += d * d;
    }
    double snr;
    if (err <= kTiny) {
      snr = kSegSnrCeilDb;  // matching frames hit the ceiling
    } else {
      snr = 10.0 * std::log10(std::max(sig, kTiny) / err);
    }
    out[m] = std::clamp(snr, kSegSnrFloorDb, kSegSnrCeilDb);
  }
  return out;
}

std::vector<double> per_frame_lsd(const AudioClip& reference, const AudioClip& test,
                                  const StftConfig& cfg) {
  if (reference.sample_rate_hz != test.sample_rate_hz) {
    throw RateMismatch("sample rates differ");
  }
  const std::size_t n = std::min(reference.samples.size(), test.samples.size());
  if (n == 0) {
    throw LengthMismatch("empty signal");
  }
  if (std::max(reference.samples.size(), test.samples.size()) - n > std::size_t(cfg.frame_len)) {
    throw LengthMismatch("signal lengths differ by more than one frame");
  }
  AudioClip a{std::vector<double>(reference.samples.begin(), reference.samples.begin() + long(n)),
              reference.sample_rate_hz};
  AudioClip b{std::vector<double>(test.samples.begin(), test.samples.begin() + long(n)),
              test.sample_rate_hz};
  const Spectrogram sa = stft(a, cfg);
  const Spectrogram sb = stft(b, cfg);
  const int frames = static_cast<int>(sa.magnitudes.cols());
  std::vector<double> out(static_cast<std::size_t>(frames));
  for (int m = 0; m < frames; ++m) {
    const Eigen::ArrayXd diff = 20.0 * (sa.magnitudes.col(m).cwiseMax(kMagFloor).array().log10() -
                                        sb.magnitudes.col(m).cwiseMax(kMagFloor).array().log10());
    out[std::size_t(m)] = std::sqrt(diff.square().mean());
  }
  return out;
}

}  // namespace

double segmental_snr(const AudioClip& reference, const AudioClip& test, int frame_len) {
  const std::vector<double> snr = per_frame_snr(reference, test, frame_len);
  double sum = 0.0;
  for (double v : snr) sum += v;
  return sum / double(snr.size());
}

double log_spectral_distortion(const AudioClip& reference, const AudioClip& test,
                               const StftConfig& cfg) {
  const std::vector<double> lsd = per_frame_lsd(reference, test, cfg);
  double sq = 0.0;
  for (double v : lsd) sq += v * v;
  return std::sqrt(sq / double(lsd.size()));
}

EvalReport evaluate(const AudioClip& reference, const AudioClip& test, const StftConfig& cfg) {
  EvalReport report;
  report.per_frame_snr_db = per_frame_snr(reference, test, cfg.frame_len);
  report.per_frame_lsd_db = per_frame_lsd(reference, test, cfg);
  double sum = 0.0;
  for (double v : report.per_frame_snr_db) sum += v;
  report.seg_snr_db = sum / double(report.per_frame_snr_db.size());
  double sq = 0.0;
  for (double v : report.per_frame_lsd_db) sq += v * v;
  report.lsd_db = std::sqrt(sq / double(report.per_frame_lsd_db.size()));
  return report;
}

}  // namespace nmfhmm
