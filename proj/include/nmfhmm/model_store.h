#pragma once

#include <string>

#include "nmfhmm/trainer.h"

namespace nmfhmm {

inline constexpr int kModelSchemaVersion = 1;

// Writes the model as versioned plain text with 17 significant digits, enough
// for doubles to round-trip exactly. Format documented in docs/model_format.md.
void save_model(const HmmNmfModel& model, const std::string& path);

// Parses and validates a model file. Malformed structure raises
// SchemaViolation; well-formed files whose matrices break model invariants
// (negative entries, non-stochastic rows, unnormalized basis columns) raise
// InvariantViolation.
HmmNmfModel load_model(const std::string& path);

}  // namespace nmfhmm
