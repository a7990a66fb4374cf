#pragma once

#include <string>
#include <vector>

#include "nmfhmm/errors.h"

namespace nmfhmm {

inline constexpr int kPipelineSampleRate = 16000;

struct AudioClip {
  std::vector<double> samples;  // mono, nominally in [-1, 1]
  int sample_rate_hz = kPipelineSampleRate;
};

// Reads a PCM WAV file (16-bit integer samples). Multi-channel files are
// reduced to channel 0. Rejects sample rates other than 16 kHz unless
// allow_rate_mismatch is set.
AudioClip read_wav(const std::string& path, bool allow_rate_mismatch = false);

// Writes mono 16-bit PCM. Samples outside [-1, 1] are hard-clipped.
void write_wav(const AudioClip& clip, const std::string& path);

}  // namespace nmfhmm
