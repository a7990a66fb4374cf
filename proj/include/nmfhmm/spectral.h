#pragma once

#include <Eigen/Dense>
#include <complex>

#include "nmfhmm/audio_io.h"
#include "nmfhmm/errors.h"

namespace nmfhmm {

enum class Window { Hann };

struct StftConfig {
  int frame_len = 1024;  // power of two, also the transform size
  int hop = 512;         // must divide frame_len
  Window window = Window::Hann;

  int bins() const { return frame_len / 2 + 1; }
  void validate() const;  // throws ConfigMismatch
};

struct Spectrogram {
  Eigen::MatrixXcd complex_frames;  // bins x frames, one-sided
  Eigen::MatrixXd magnitudes;       // |complex_frames|
  StftConfig config;
  int num_samples = 0;  // pre-padding clip length, used to trim synthesis
  int sample_rate_hz = kPipelineSampleRate;
};

// Number of analysis frames for a clip of the given length: the clip is
// zero-padded at the tail so every sample falls inside a whole frame.
int frame_count(int num_samples, const StftConfig& cfg);

Spectrogram stft(const AudioClip& clip, const StftConfig& cfg = {});

// Weighted overlap-add synthesis with the analysis window and per-sample
// COLA normalization. Inverts stft() exactly away from the clip edges.
AudioClip istft(const Spectrogram& spec);

}  // namespace nmfhmm
