#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lmdc/evaluation.hpp"
#include "lmdc/training.hpp"

namespace lmdc {

// Every tunable of the system behind one flat, string-addressable key space.
// Precedence is applied by the caller: defaults, then a checkpoint snapshot,
// then a config file, then individual overrides, each layer applied with
// set_key / apply_config_text in that order.
struct RunConfig {
  TrainConfig train;

  struct Eval {
    std::vector<double> densities{0.0, 0.1, 0.2, 0.3, 0.4, 0.5,
                                  0.6, 0.7, 0.8, 0.9, 1.0};
    int rounds = 10;
    int trials = 20;
    std::uint64_t seed = 0;
    int workers = 1;  // 0: one per hardware thread
  } eval;
};

// All recognized keys, in serialization order.
std::vector<std::string> config_keys();

// Throw std::invalid_argument naming the key when it is not recognized or
// the value does not parse.
std::string get_key(const RunConfig& cfg, const std::string& key);
void set_key(RunConfig& cfg, const std::string& key, const std::string& value);

// "key = value" per line, every key, values in shortest round-trip form so
// serialize followed by apply is lossless.
std::string serialize_config(const RunConfig& cfg);

// Applies "key = value" lines; blank lines and '#' comments are skipped.
// source_name labels parse errors (file path, "--set", ...).
void apply_config_text(RunConfig& cfg, const std::string& text,
                       const std::string& source_name);

// Projection of the shared world/rays/reward plus the eval block.
SweepConfig sweep_config(const RunConfig& cfg);

// Observation width implied by the ray configuration.
int state_dim(const RunConfig& cfg);

}  // namespace lmdc
