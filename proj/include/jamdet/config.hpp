#pragma once

// JSON configuration objects for datasets, STL, classifier hyperparameters
// and sweeps. Every parser rejects unknown keys with a ConfigError naming
// the key; absent keys keep their defaults.

#include <string>
#include <string_view>

#include "jamdet/channel_sim.hpp"
#include "jamdet/classifier.hpp"
#include "jamdet/evaluation.hpp"
#include "jamdet/stl.hpp"

namespace jamdet {

/// Starts from DatasetSpec::paper() when "preset" is "paper", otherwise from
/// the defaults, then applies the remaining keys and validates.
DatasetSpec parse_dataset_spec(std::string_view json);
std::string dataset_spec_to_json(const DatasetSpec& spec);

/// Keys override triple_stl_params(fft_size).
StlParams parse_stl_params(std::string_view json, std::uint32_t fft_size);
std::string stl_params_to_json(const StlParams& params);

struct ClassifierHyper {
    LogisticHyper logistic;
    SvmHyper svm;
};

ClassifierHyper parse_classifier_hyper(std::string_view json);

SweepConfig parse_sweep_config(std::string_view json);
std::string sweep_config_to_json(const SweepConfig& config);

}  // namespace jamdet
