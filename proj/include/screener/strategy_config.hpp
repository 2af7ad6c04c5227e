#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include "screener/logistic.hpp"

namespace screener {

enum class Strategy { kNaive, kIg, kLc };

std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);

struct StrategyConfig {
  Strategy strategy = Strategy::kIg;
  std::size_t batch_size = 25;       // s
  std::size_t components = 3;        // t
  std::size_t max_topics = 150;
  double lc_low = 0.4;
  double lc_high = 0.6;
  double lc_fraction = 0.10;
  std::uint64_t seed = 0;
  std::size_t seed_size = 25;
  bool center_novelty = false;
  TrainOptions classifier;
  // Replaces every novelty score with this constant (diagnostics: 1.0 makes
  // IG rank exactly like naive).
  std::optional<double> novelty_override;

  // Throws InvalidArgument when an invariant is violated.
  void validate() const;
};

// Flat "key = value" text, '#' comments. Unknown keys are rejected.
StrategyConfig parse_strategy_config(std::istream& in, StrategyConfig base = {});
StrategyConfig load_strategy_config(const std::filesystem::path& path, StrategyConfig base = {});
// Applies one key/value pair; throws InvalidArgument for unknown keys or bad values.
void apply_config_value(StrategyConfig& config, const std::string& key, const std::string& value);
std::string format_strategy_config(const StrategyConfig& config);

}  // namespace screener
