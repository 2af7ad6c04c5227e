#include "screener/strategy_config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "screener/error.hpp"

namespace screener {

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::kNaive: return "naive";
    case Strategy::kIg: return "ig";
    case Strategy::kLc: return "lc";
  }
  return "unknown";
}

Strategy strategy_from_string(const std::string& s) {
  if (s == "naive") return Strategy::kNaive;
  if (s == "ig") return Strategy::kIg;
  if (s == "lc") return Strategy::kLc;
  throw InvalidArgument("unknown strategy \"" + s + "\"");
}

void StrategyConfig::validate() const {
  if (batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
  if (components < 1) throw InvalidArgument("components (t) must be >= 1");
  if (!(lc_low >= 0.0 && lc_low < lc_high && lc_high <= 1.0)) {
    throw InvalidArgument("LC band must satisfy 0 <= low < high <= 1");
  }
  if (!(lc_fraction > 0.0 && lc_fraction < 1.0)) throw InvalidArgument("lc_fraction must lie in (0, 1)");
  if (seed_size < 2) throw InvalidArgument("seed_size must be >= 2 to hold both classes");
  if (novelty_override && !(*novelty_override >= 0.0 && *novelty_override <= 1.0)) {
    throw InvalidArgument("novelty_override must lie in [0, 1]");
  }
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw InvalidArgument("bad value \"" + v + "\" for " + key);
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw InvalidArgument("bad boolean \"" + v + "\" for " + key);
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

void apply_config_value(StrategyConfig& c, const std::string& key, const std::string& value) {
  if (key == "strategy") c.strategy = strategy_from_string(value);
  else if (key == "batch_size" || key == "s") c.batch_size = parse_number<std::size_t>(key, value);
  else if (key == "components" || key == "t") c.components = parse_number<std::size_t>(key, value);
  else if (key == "max_topics") c.max_topics = parse_number<std::size_t>(key, value);
  else if (key == "lc_low") c.lc_low = parse_number<double>(key, value);
  else if (key == "lc_high") c.lc_high = parse_number<double>(key, value);
  else if (key == "lc_fraction") c.lc_fraction = parse_number<double>(key, value);
  else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "seed_size") c.seed_size = parse_number<std::size_t>(key, value);
  else if (key == "center_novelty") c.center_novelty = parse_bool(key, value);
  else if (key == "lambda") c.classifier.lambda = parse_number<double>(key, value);
  else if (key == "tol") c.classifier.tol = parse_number<double>(key, value);
  else if (key == "max_iter") c.classifier.max_iter = parse_number<std::size_t>(key, value);
  else if (key == "novelty_override") {
    if (value.empty() || value == "none") c.novelty_override.reset();
    else c.novelty_override = parse_number<double>(key, value);
  } else {
    throw InvalidArgument("unknown config key \"" + key + "\"");
  }
}

StrategyConfig parse_strategy_config(std::istream& in, StrategyConfig base) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value", lineno);
    try {
      apply_config_value(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const InvalidArgument& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  base.validate();
  return base;
}

StrategyConfig load_strategy_config(const std::filesystem::path& path, StrategyConfig base) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  return parse_strategy_config(in, base);
}

std::string format_strategy_config(const StrategyConfig& c) {
  std::ostringstream os;
  os << "strategy = " << to_string(c.strategy) << '\n'
     << "batch_size = " << c.batch_size << '\n'
     << "components = " << c.components << '\n'
     << "max_topics = " << c.max_topics << '\n'
     << "lc_low = " << fmt(c.lc_low) << '\n'
     << "lc_high = " << fmt(c.lc_high) << '\n'
     << "lc_fraction = " << fmt(c.lc_fraction) << '\n'
     << "seed = " << c.seed << '\n'
     << "seed_size = " << c.seed_size << '\n'
     << "center_novelty = " << (c.center_novelty ? "true" : "false") << '\n'
     << "lambda = " << fmt(c.classifier.lambda) << '\n'
     << "tol = " << fmt(c.classifier.tol) << '\n'
     << "max_iter = " << c.classifier.max_iter << '\n'
     << "novelty_override = " << (c.novelty_override ? fmt(*c.novelty_override) : "none") << '\n';
  return os.str();
}

}  // namespace screener
