#include "nmfhmm/cli.h"

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "nmfhmm/audio_io.h"
#include "nmfhmm/enhancer.h"
#include "nmfhmm/metrics.h"
#include "nmfhmm/model_store.h"
#include "nmfhmm/spectral.h"
#include "nmfhmm/trainer.h"

namespace nmfhmm::cli {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Reproducible-builds convention: the recorded creation time comes from the
// environment, never the wall clock, so repeated runs stay byte-identical.
std::int64_t creation_epoch() {
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH")) {
    return std::strtoll(env, nullptr, 10);
  }
  return 0;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) {
    throw IoFailure("cannot open for writing: " + path);
  }
  os.write(text.data(), std::streamsize(text.size()));
  if (!os) {
    throw IoFailure("write failed: " + path);
  }
}

std::vector<Eigen::MatrixXd> load_magnitudes(const std::vector<std::string>& paths,
                                             const StftConfig& cfg, bool allow_rate_mismatch) {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(paths.size());
  for (const std::string& p : paths) {
    out.push_back(stft(read_wav(p, allow_rate_mismatch), cfg).magnitudes);
  }
  return out;
}

struct TrainArgs {
  std::vector<std::string> inputs;
  std::string manifest;
  std::string out;
  std::string trace;
  std::string role = "speech";
  int states_speech = 40;
  int states_noise = 2;
  int basis_speech = 25;
  int basis_noise = 70;
  int iterations = 30;
  std::uint64_t seed = 0;
  int frame_len = 1024;
  int hop = 512;
  bool early_stop = false;
  bool allow_rate_mismatch = false;
};

int do_train(const TrainArgs& a) {
  std::vector<std::string> paths = a.inputs;
  if (!a.manifest.empty()) {
    for (std::string& p : read_manifest(a.manifest)) {
      paths.push_back(std::move(p));
    }
  }
  if (paths.empty()) {
    throw MissingFile("no training inputs given");
  }
  const StftConfig stft_cfg{a.frame_len, a.hop};
  stft_cfg.validate();

  TrainConfig cfg;
  cfg.role = a.role;
  cfg.states = a.role == "noise" ? a.states_noise : a.states_speech;
  cfg.basis = a.role == "noise" ? a.basis_noise : a.basis_speech;
  cfg.iterations = a.iterations;
  cfg.seed = a.seed;
  cfg.early_stop = a.early_stop;

  TrainResult result = train(load_magnitudes(paths, stft_cfg, a.allow_rate_mismatch), cfg);
  result.model.meta.stft = stft_cfg;
  result.model.meta.created_epoch = creation_epoch();
  save_model(result.model, a.out);

  std::ostringstream trace;
  trace << "iteration,loglik\n";
  for (std::size_t i = 0; i < result.loglik_trace.size(); ++i) {
    trace << i + 1 << ',' << fmt(result.loglik_trace[i]) << '\n';
  }
  write_text_file(a.trace.empty() ? a.out + ".trace.csv" : a.trace, trace.str());
  return 0;
}

struct EnhanceArgs {
  std::string noisy;
  std::string speech_model;
  std::string noise_model;
  std::string out;
  std::string gain_dump;
  int iterations = 15;
  int frame_len = 1024;
  int hop = 512;
  double gain_floor = 0.0;
  bool parallel = false;
  bool allow_rate_mismatch = false;
};

int do_enhance(const EnhanceArgs& a) {
  const StftConfig stft_cfg{a.frame_len, a.hop};
  stft_cfg.validate();
  const HmmNmfModel speech = load_model(a.speech_model);
  const HmmNmfModel noise = load_model(a.noise_model);
  const AudioClip noisy = read_wav(a.noisy, a.allow_rate_mismatch);

  EnhanceConfig cfg;
  cfg.mu_iterations = a.iterations;
  cfg.parallel = a.parallel;
  cfg.gain_floor = a.gain_floor;
  const EnhanceResult result = enhance(noisy, speech, noise, cfg, stft_cfg);
  write_wav(result.clip, a.out);

  if (!a.gain_dump.empty()) {
    std::ostringstream os;
    for (Eigen::Index n = 0; n < result.gains.cols(); ++n) {  // one row per frame
      for (Eigen::Index f = 0; f < result.gains.rows(); ++f) {
        if (f) os << ',';
        os << fmt(result.gains(f, n));
      }
      os << '\n';
    }
    write_text_file(a.gain_dump, os.str());
  }
  return 0;
}

struct EvalArgs {
  std::string reference;
  std::string test;
  std::string csv;
  std::string extra_scores;
  int frame_len = 1024;
  int hop = 512;
  bool allow_rate_mismatch = false;
};

int do_eval(const EvalArgs& a) {
  const StftConfig stft_cfg{a.frame_len, a.hop};
  stft_cfg.validate();
  const AudioClip ref = read_wav(a.reference, a.allow_rate_mismatch);
  const AudioClip test = read_wav(a.test, a.allow_rate_mismatch);
  const EvalReport report = evaluate(ref, test, stft_cfg);

  std::cout << "seg_snr_db " << fmt(report.seg_snr_db) << '\n';
  std::cout << "lsd_db " << fmt(report.lsd_db) << '\n';
  if (!a.extra_scores.empty()) {
    // externally computed scores ride along in the same key-value shape
    std::ifstream in(a.extra_scores);
    if (!in) {
      throw MissingFile("cannot open score file: " + a.extra_scores);
    }
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line[0] != '#') {
        std::cout << line << '\n';
      }
    }
  }

  if (!a.csv.empty()) {
    const bool fresh = !std::filesystem::exists(a.csv);
    std::ofstream os(a.csv, std::ios::binary | std::ios::app);
    if (!os) {
      throw IoFailure("cannot open for writing: " + a.csv);
    }
    if (fresh) {
      os << "reference,test,seg_snr_db,lsd_db\n";
    }
    os << a.reference << ',' << a.test << ',' << fmt(report.seg_snr_db) << ','
       << fmt(report.lsd_db) << '\n';
  }
  return 0;
}

struct SweepArgs {
  std::string train_speech;
  std::string train_noise;
  std::string noisy;
  std::string reference;
  std::string out;
  std::vector<int> states_speech{40};
  std::vector<int> states_noise{2};
  std::vector<int> basis_speech{25};
  std::vector<int> basis_noise{70};
  int train_iters = 30;
  int enhance_iters = 15;
  std::uint64_t seed = 0;
  int frame_len = 1024;
  int hop = 512;
  bool parallel = false;
  bool allow_rate_mismatch = false;
};

int do_sweep(const SweepArgs& a) {
  const StftConfig stft_cfg{a.frame_len, a.hop};
  stft_cfg.validate();
  const auto speech_mags =
      load_magnitudes(read_manifest(a.train_speech), stft_cfg, a.allow_rate_mismatch);
  const auto noise_mags =
      load_magnitudes(read_manifest(a.train_noise), stft_cfg, a.allow_rate_mismatch);
  const AudioClip noisy = read_wav(a.noisy, a.allow_rate_mismatch);
  const AudioClip reference = read_wav(a.reference, a.allow_rate_mismatch);

  std::ostringstream os;
  os << "states_speech,states_noise,basis_speech,basis_noise,seg_snr_db,lsd_db,status\n";
  for (int js : a.states_speech) {
    for (int jn : a.states_noise) {
      for (int ks : a.basis_speech) {
        for (int kn : a.basis_noise) {
          os << js << ',' << jn << ',' << ks << ',' << kn << ',';
          try {
            TrainConfig sc{js, ks, a.train_iters, a.seed};
            sc.role = "speech";
            TrainConfig nc{jn, kn, a.train_iters, a.seed};
            nc.role = "noise";
            const HmmNmfModel speech = train(speech_mags, sc).model;
            const HmmNmfModel noise = train(noise_mags, nc).model;
            EnhanceConfig ec;
            ec.mu_iterations = a.enhance_iters;
            ec.parallel = a.parallel;
            const EnhanceResult res = enhance(noisy, speech, noise, ec, stft_cfg);
            const EvalReport report = evaluate(reference, res.clip, stft_cfg);
            os << fmt(report.seg_snr_db) << ',' << fmt(report.lsd_db) << ",ok\n";
          } catch (const Error& e) {
            // a failed grid point is reported, not fatal
            std::string why = e.what();
            for (char& ch : why) {
              if (ch == ',' || ch == '\n') ch = ';';
            }
            os << ",,error: " << why << '\n';
          }
        }
      }
    }
  }
  write_text_file(a.out, os.str());
  return 0;
}

int do_inspect(const std::string& path) {
  const HmmNmfModel model = load_model(path);
  std::cout << "role " << model.meta.role << '\n';
  std::cout << "states " << model.states() << '\n';
  std::cout << "basis " << model.basis << '\n';
  std::cout << "bins " << model.bins << '\n';
  std::cout << "seed " << model.meta.seed << '\n';
  std::cout << "iterations " << model.meta.iterations << '\n';
  std::cout << "created " << model.meta.created_epoch << '\n';
  std::cout << "frame_len " << model.meta.stft.frame_len << '\n';
  std::cout << "hop " << model.meta.stft.hop << '\n';
  std::cout << "pi";
  for (int j = 0; j < model.states(); ++j) {
    std::cout << ' ' << fmt(model.chain.pi(j));
  }
  std::cout << '\n';
  return 0;
}

}  // namespace

std::vector<std::string> read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw MissingFile("cannot open manifest: " + path);
  }
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    if (line.empty() || line[0] == '#') continue;
    out.push_back(line);
  }
  return out;
}

int run(int argc, const char* const* argv) {
  CLI::App app{"NMF-HMM speech enhancement"};
  app.require_subcommand(1);

  TrainArgs train_args;
  CLI::App* t = app.add_subcommand("train", "Train a source model from WAV files");
  t->add_option("inputs", train_args.inputs, "training WAV files");
  t->add_option("--manifest", train_args.manifest, "file with one WAV path per line");
  t->add_option("--out", train_args.out, "model output path")->required();
  t->add_option("--trace", train_args.trace, "log-likelihood trace CSV (default <out>.trace.csv)");
  t->add_option("--role", train_args.role, "speech or noise")
      ->check(CLI::IsMember({"speech", "noise"}));
  t->add_option("--states-speech", train_args.states_speech, "chain states for role speech");
  t->add_option("--states-noise", train_args.states_noise, "chain states for role noise");
  t->add_option("--basis-speech", train_args.basis_speech, "basis vectors per state, role speech");
  t->add_option("--basis-noise", train_args.basis_noise, "basis vectors per state, role noise");
  t->add_option("--train-iters", train_args.iterations, "EM iterations");
  t->add_option("--seed", train_args.seed, "RNG seed");
  t->add_option("--frame-len", train_args.frame_len, "analysis frame length");
  t->add_option("--hop", train_args.hop, "analysis hop");
  t->add_flag("--early-stop", train_args.early_stop, "stop when the log-likelihood plateaus");
  t->add_flag("--allow-rate-mismatch", train_args.allow_rate_mismatch,
              "accept sample rates other than 16 kHz");

  EnhanceArgs enhance_args;
  CLI::App* e = app.add_subcommand("enhance", "Enhance a noisy WAV with trained models");
  e->add_option("noisy", enhance_args.noisy, "noisy input WAV")->required();
  e->add_option("--speech-model", enhance_args.speech_model)->required();
  e->add_option("--noise-model", enhance_args.noise_model)->required();
  e->add_option("--out", enhance_args.out, "enhanced WAV output")->required();
  e->add_option("--gain-dump", enhance_args.gain_dump,
                "CSV of per-frame gains, one row per frame");
  e->add_option("--enhance-iters", enhance_args.iterations, "activation updates per frame");
  e->add_option("--frame-len", enhance_args.frame_len, "analysis frame length");
  e->add_option("--hop", enhance_args.hop, "analysis hop");
  e->add_option("--gain-floor", enhance_args.gain_floor, "lower bound on the spectral gain");
  e->add_flag("--parallel", enhance_args.parallel, "evaluate composite states on worker threads");
  e->add_flag("--allow-rate-mismatch", enhance_args.allow_rate_mismatch,
              "accept sample rates other than 16 kHz");

  EvalArgs eval_args;
  CLI::App* v = app.add_subcommand("eval", "Score a test WAV against a reference");
  v->add_option("reference", eval_args.reference)->required();
  v->add_option("test", eval_args.test)->required();
  v->add_option("--csv", eval_args.csv, "append one result row to this CSV");
  v->add_option("--extra-scores", eval_args.extra_scores,
                "merge externally computed key-value scores into the report");
  v->add_option("--frame-len", eval_args.frame_len, "analysis frame length");
  v->add_option("--hop", eval_args.hop, "analysis hop");
  v->add_flag("--allow-rate-mismatch", eval_args.allow_rate_mismatch,
              "accept sample rates other than 16 kHz");

  SweepArgs sweep_args;
  CLI::App* s = app.add_subcommand("sweep", "Grid-search model sizes and score each point");
  s->add_option("--train-speech", sweep_args.train_speech, "speech training manifest")->required();
  s->add_option("--train-noise", sweep_args.train_noise, "noise training manifest")->required();
  s->add_option("--noisy", sweep_args.noisy, "noisy test WAV")->required();
  s->add_option("--reference", sweep_args.reference, "clean reference WAV")->required();
  s->add_option("--out", sweep_args.out, "result table CSV")->required();
  s->add_option("--states-speech", sweep_args.states_speech, "grid values")->delimiter(',');
  s->add_option("--states-noise", sweep_args.states_noise, "grid values")->delimiter(',');
  s->add_option("--basis-speech", sweep_args.basis_speech, "grid values")->delimiter(',');
  s->add_option("--basis-noise", sweep_args.basis_noise, "grid values")->delimiter(',');
  s->add_option("--train-iters", sweep_args.train_iters, "EM iterations per point");
  s->add_option("--enhance-iters", sweep_args.enhance_iters, "activation updates per frame");
  s->add_option("--seed", sweep_args.seed, "RNG seed");
  s->add_option("--frame-len", sweep_args.frame_len, "analysis frame length");
  s->add_option("--hop", sweep_args.hop, "analysis hop");
  s->add_flag("--parallel", sweep_args.parallel, "evaluate composite states on worker threads");
  s->add_flag("--allow-rate-mismatch", sweep_args.allow_rate_mismatch,
              "accept sample rates other than 16 kHz");

  std::string inspect_path;
  CLI::App* i = app.add_subcommand("inspect", "Print a model file's header");
  i->add_option("model", inspect_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    return app.exit(err);
  }

  try {
    if (t->parsed()) return do_train(train_args);
    if (e->parsed()) return do_enhance(enhance_args);
    if (v->parsed()) return do_eval(eval_args);
    if (s->parsed()) return do_sweep(sweep_args);
    if (i->parsed()) return do_inspect(inspect_path);
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
  return 0;
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("nmfhmm");
  for (const std::string& a : args) {
    argv.push_back(a.c_str());
  }
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace nmfhmm::cli
