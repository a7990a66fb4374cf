#include "nmfhmm/audio_io.h"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace nmfhmm {

namespace {

constexpr double kInt16Scale = 32768.0;

std::uint32_t read_u32(const unsigned char* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
         std::uint32_t(p[3]) << 24;
}

std::uint16_t read_u16(const unsigned char* p) {
  return std::uint16_t(p[0] | p[1] << 8);
}

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(char(v & 0xff));
  out.push_back(char(v >> 8 & 0xff));
  out.push_back(char(v >> 16 & 0xff));
  out.push_back(char(v >> 24 & 0xff));
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(char(v & 0xff));
  out.push_back(char(v >> 8 & 0xff));
}

}  // namespace

AudioClip read_wav(const std::string& path, bool allow_rate_mismatch) {
  if (!std::filesystem::exists(path)) {
    throw MissingFile("no such file: " + path);
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoFailure("cannot open for reading: " + path);
  }
  std::string raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) {
    throw IoFailure("read failed: " + path);
  }
  const auto* p = reinterpret_cast<const unsigned char*>(raw.data());
  const std::size_t n = raw.size();
  if (n < 12 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0) {
    throw UnsupportedEncoding("not a RIFF/WAVE file: " + path);
  }

  // Walk the chunk list; unknown chunks are skipped.
  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::uint32_t data_len = 0;
  std::size_t off = 12;
  while (off + 8 <= n) {
    const std::uint32_t chunk_len = read_u32(p + off + 4);
    const unsigned char* body = p + off + 8;
    if (off + 8 + chunk_len > n) {
      throw UnsupportedEncoding("truncated chunk in " + path);
    }
    if (std::memcmp(p + off, "fmt ", 4) == 0) {
      if (chunk_len < 16) {
        throw UnsupportedEncoding("short fmt chunk in " + path);
      }
      format = read_u16(body);
      channels = read_u16(body + 2);
      rate = read_u32(body + 4);
      bits = read_u16(body + 14);
      have_fmt = true;
    } else if (std::memcmp(p + off, "data", 4) == 0) {
      data = body;
      data_len = chunk_len;
    }
    off += 8 + chunk_len + (chunk_len & 1);  // chunks are word-aligned
  }
  if (!have_fmt || data == nullptr) {
    throw UnsupportedEncoding("missing fmt or data chunk in " + path);
  }
  if (format != 1) {
    throw UnsupportedEncoding("non-PCM format code " + std::to_string(format) + " in " + path);
  }
  if (bits != 16) {
    throw UnsupportedEncoding(std::to_string(bits) + "-bit samples unsupported in " + path);
  }
  if (channels == 0) {
    throw UnsupportedEncoding("zero channels in " + path);
  }
  if (rate != std::uint32_t(kPipelineSampleRate) && !allow_rate_mismatch) {
    throw SampleRateMismatch("sample rate " + std::to_string(rate) + " in " + path +
                             ", expected " + std::to_string(kPipelineSampleRate));
  }

  const std::uint32_t stride = 2u * channels;
  const std::uint32_t frames = data_len / stride;
  if (frames == 0) {
    throw EmptyInput("no samples in " + path);
  }
  AudioClip clip;
  clip.sample_rate_hz = static_cast<int>(rate);
  clip.samples.resize(frames);
  for (std::uint32_t i = 0; i < frames; ++i) {
    const std::int16_t s =
        static_cast<std::int16_t>(read_u16(data + std::size_t(i) * stride));  // channel 0
    clip.samples[i] = double(s) / kInt16Scale;
  }
  return clip;
}

void write_wav(const AudioClip& clip, const std::string& path) {
  if (clip.samples.empty()) {
    throw EmptyInput("refusing to write empty clip: " + path);
  }
  const std::uint32_t frames = static_cast<std::uint32_t>(clip.samples.size());
  const std::uint32_t data_len = frames * 2;

  std::string out;
  out.reserve(44 + data_len);
  out.append("RIFF");
  put_u32(out, 36 + data_len);
  out.append("WAVE");
  out.append("fmt ");
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, 1);  // mono
  put_u32(out, std::uint32_t(clip.sample_rate_hz));
  put_u32(out, std::uint32_t(clip.sample_rate_hz) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out.append("data");
  put_u32(out, data_len);
  for (double x : clip.samples) {
    double v = std::lrint(x * kInt16Scale);
    if (v > 32767.0) v = 32767.0;
    if (v < -32768.0) v = -32768.0;
    put_u16(out, std::uint16_t(std::int16_t(v)));
  }

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) {
    throw IoFailure("cannot open for writing: " + path);
  }
  os.write(out.data(), std::streamsize(out.size()));
  if (!os) {
    throw IoFailure("write failed: " + path);
  }
}

}  // namespace nmfhmm
