#include "nmfhmm/model_store.h"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nmfhmm/kl_nmf.h"

namespace nmfhmm {

namespace {

// 17 significant digits round-trip any double exactly.
std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_matrix_rows(std::ostream& os, const Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) os << ' ';
      os << fmt(m(r, c));
    }
    os << '\n';
  }
}

struct TokenReader {
  std::istringstream in;
  std::string path;

  explicit TokenReader(std::string text, std::string p) : in(std::move(text)), path(std::move(p)) {}

  std::string word(const char* what) {
    std::string t;
    if (!(in >> t)) {
      throw SchemaViolation(std::string("unexpected end of file, wanted ") + what + " in " + path);
    }
    return t;
  }

  void expect(const std::string& literal) {
    const std::string t = word(literal.c_str());
    if (t != literal) {
      throw SchemaViolation("expected '" + literal + "', found '" + t + "' in " + path);
    }
  }

  long integer(const char* what) {
    const std::string t = word(what);
    char* end = nullptr;
    const long v = std::strtol(t.c_str(), &end, 10);
    if (end == t.c_str() || *end != '\0') {
      throw SchemaViolation(std::string("bad integer for ") + what + ": '" + t + "' in " + path);
    }
    return v;
  }

  double number(const char* what) {
    const std::string t = word(what);
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end == t.c_str() || *end != '\0') {
      throw SchemaViolation(std::string("bad number for ") + what + ": '" + t + "' in " + path);
    }
    return v;
  }
};

}  // namespace

void save_model(const HmmNmfModel& model, const std::string& path) {
  model.validate();
  std::ostringstream os;
  os << "nmfhmm-model " << kModelSchemaVersion << '\n';
  os << "role " << model.meta.role << '\n';
  os << "states " << model.states() << '\n';
  os << "basis " << model.basis << '\n';
  os << "bins " << model.bins << '\n';
  os << "seed " << model.meta.seed << '\n';
  os << "iterations " << model.meta.iterations << '\n';
  os << "created " << model.meta.created_epoch << '\n';
  os << "frame_len " << model.meta.stft.frame_len << '\n';
  os << "hop " << model.meta.stft.hop << '\n';
  os << "pi\n";
  write_matrix_rows(os, model.chain.pi.transpose());
  os << "A\n";
  write_matrix_rows(os, model.chain.A);
  for (int j = 0; j < model.states(); ++j) {
    os << "W " << j << '\n';
    write_matrix_rows(os, model.bases[std::size_t(j)]);
  }
  os << "end\n";

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) {
    throw IoFailure("cannot open for writing: " + path);
  }
  const std::string text = os.str();
  file.write(text.data(), std::streamsize(text.size()));
  if (!file) {
    throw IoFailure("write failed: " + path);
  }
}

HmmNmfModel load_model(const std::string& path) {
  if (!std::filesystem::exists(path)) {
    throw MissingFile("no such file: " + path);
  }
  std::ifstream file(path, std::ios::binary);
  if (!file) {
    throw IoFailure("cannot open for reading: " + path);
  }
  std::string text((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
  TokenReader r(std::move(text), path);

  r.expect("nmfhmm-model");
  const long version = r.integer("schema version");
  if (version != kModelSchemaVersion) {
    throw SchemaViolation("unsupported schema version " + std::to_string(version) + " in " + path);
  }

  HmmNmfModel model;
  r.expect("role");
  model.meta.role = r.word("role");
  if (model.meta.role != "speech" && model.meta.role != "noise") {
    throw SchemaViolation("role must be speech or noise, found '" + model.meta.role + "' in " + path);
  }
  r.expect("states");
  const long J = r.integer("states");
  r.expect("basis");
  const long K = r.integer("basis");
  r.expect("bins");
  const long F = r.integer("bins");
  if (J < 1 || K < 1 || F < 1) {
    throw SchemaViolation("states, basis and bins must be positive in " + path);
  }
  r.expect("seed");
  model.meta.seed = std::uint64_t(r.integer("seed"));
  r.expect("iterations");
  model.meta.iterations = int(r.integer("iterations"));
  r.expect("created");
  model.meta.created_epoch = r.integer("created");
  r.expect("frame_len");
  model.meta.stft.frame_len = int(r.integer("frame_len"));
  r.expect("hop");
  model.meta.stft.hop = int(r.integer("hop"));

  model.basis = int(K);
  model.bins = int(F);
  r.expect("pi");
  model.chain.pi.resize(J);
  for (long j = 0; j < J; ++j) {
    model.chain.pi(j) = r.number("pi entry");
  }
  r.expect("A");
  model.chain.A.resize(J, J);
  for (long i = 0; i < J; ++i) {
    for (long j = 0; j < J; ++j) {
      model.chain.A(i, j) = r.number("A entry");
    }
  }
  for (long j = 0; j < J; ++j) {
    r.expect("W");
    if (r.integer("basis index") != j) {
      throw SchemaViolation("basis blocks out of order in " + path);
    }
    Eigen::MatrixXd W(F, K);
    for (long f = 0; f < F; ++f) {
      for (long k = 0; k < K; ++k) {
        W(f, k) = r.number("W entry");
      }
    }
    model.bases.push_back(std::move(W));
  }
  r.expect("end");

  // Entries that lost their last bits in transit are restored to the floor;
  // anything non-positive is a broken file, not rounding.
  for (Eigen::MatrixXd& W : model.bases) {
    if ((W.array() <= 0.0).any()) {
      throw InvariantViolation("non-positive basis entry in " + path);
    }
    W = W.cwiseMax(kFactorFloor);
  }
  try {
    model.validate();
  } catch (const InvariantViolation& e) {
    throw InvariantViolation(std::string(e.what()) + " in " + path);
  }
  return model;
}

}  // namespace nmfhmm
