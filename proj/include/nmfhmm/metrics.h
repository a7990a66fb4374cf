#pragma once

#include <vector>

#include "nmfhmm/audio_io.h"
#include "nmfhmm/spectral.h"

namespace nmfhmm {

inline constexpr double kSegSnrFloorDb = -10.0;
inline constexpr double kSegSnrCeilDb = 35.0;

struct EvalReport {
  double seg_snr_db = 0.0;
  double lsd_db = 0.0;
  std::vector<double> per_frame_snr_db;
  std::vector<double> per_frame_lsd_db;
};

// Mean over non-overlapping frames of 10*log10(sum ref^2 / sum (ref-test)^2),
// each frame clamped to [kSegSnrFloorDb, kSegSnrCeilDb]. Lengths may differ by
// at most one frame; both signals are truncated to the shorter one.
double segmental_snr(const AudioClip& reference, const AudioClip& test, int frame_len = 1024);

// RMS over frames of the per-frame RMS of 20*(log10|S_ref| - log10|S_test|),
// magnitudes floored before the log.
double log_spectral_distortion(const AudioClip& reference, const AudioClip& test,
                               const StftConfig& cfg = {});

EvalReport evaluate(const AudioClip& reference, const AudioClip& test,
                    const StftConfig& cfg = {});

}  // namespace nmfhmm
