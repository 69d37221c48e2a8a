#include "driftsync/config.hpp"

#include <charconv>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string_view>

namespace driftsync {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

struct Parser {
  const std::string& origin;
  int line = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError(origin + ":" + std::to_string(line) + ": " + what);
  }

  double number(std::string_view key, std::string_view v) const {
    double out = 0.0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size())
      fail("key '" + std::string(key) + "': expected a number, got '" +
           std::string(v) + "'");
    return out;
  }

  std::int64_t integer(std::string_view key, std::string_view v) const {
    std::int64_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size())
      fail("key '" + std::string(key) + "': expected an integer, got '" +
           std::string(v) + "'");
    return out;
  }

  std::uint64_t uinteger(std::string_view key, std::string_view v) const {
    std::uint64_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size())
      fail("key '" + std::string(key) + "': expected a nonnegative integer, got '" +
           std::string(v) + "'");
    return out;
  }

  bool boolean(std::string_view key, std::string_view v) const {
    if (v == "true") return true;
    if (v == "false") return false;
    fail("key '" + std::string(key) + "': expected true or false, got '" +
         std::string(v) + "'");
  }
};

}  // namespace

ExperimentConfig parse_config_text(const std::string& text,
                                   const std::string& origin) {
  ExperimentConfig cfg;
  Parser p{origin};
  std::set<std::string, std::less<>> seen;
  bool have_m = false, have_rounds = false, have_stream = false,
       have_strategy = false;

  std::istringstream in(text);
  std::string raw;
  while (std::getline(in, raw)) {
    ++p.line;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;

    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) p.fail("expected 'key = value'");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view val = trim(line.substr(eq + 1));
    if (key.empty()) p.fail("empty key");
    if (val.empty()) p.fail("key '" + std::string(key) + "': empty value");
    if (!seen.insert(std::string(key)).second)
      p.fail("duplicate key '" + std::string(key) + "'");

    if (key == "m") {
      cfg.m = static_cast<int>(p.integer(key, val));
      have_m = true;
    } else if (key == "rounds") {
      cfg.rounds = p.integer(key, val);
      have_rounds = true;
    } else if (key == "metrics_every") {
      cfg.metrics_every = p.integer(key, val);
    } else if (key == "seed") {
      cfg.seed = p.uinteger(key, val);
    } else if (key == "model") {
      if (val == "kernel")
        cfg.model_type = ModelType::kernel;
      else if (val == "linear")
        cfg.model_type = ModelType::linear;
      else
        p.fail("key 'model': expected kernel or linear, got '" + std::string(val) +
               "'");
    } else if (key == "stream.kind") {
      if (val == "gaussian_xor")
        cfg.stream.kind = StreamSpec::Kind::gaussian_xor;
      else if (val == "rotating_hyperplane")
        cfg.stream.kind = StreamSpec::Kind::rotating_hyperplane;
      else if (val == "csv")
        cfg.stream.kind = StreamSpec::Kind::csv;
      else
        p.fail("key 'stream.kind': expected gaussian_xor, rotating_hyperplane or "
               "csv, got '" +
               std::string(val) + "'");
      have_stream = true;
    } else if (key == "stream.d") {
      cfg.stream.d = static_cast<int>(p.integer(key, val));
    } else if (key == "stream.cluster_sd") {
      cfg.stream.cluster_sd = p.number(key, val);
    } else if (key == "stream.drift_rate") {
      cfg.stream.drift_rate = p.number(key, val);
    } else if (key == "stream.angular_rate") {
      cfg.stream.angular_rate = p.number(key, val);
    } else if (key == "stream.margin") {
      cfg.stream.margin = p.number(key, val);
    } else if (key == "stream.noise") {
      cfg.stream.noise = p.number(key, val);
    } else if (key == "stream.path") {
      cfg.stream.path = std::string(val);
    } else if (key == "stream.label_column") {
      cfg.stream.label_column = static_cast<int>(p.integer(key, val));
    } else if (key == "stream.partition") {
      if (val == "round_robin")
        cfg.stream.partition = StreamSpec::Partition::round_robin;
      else if (val == "contiguous")
        cfg.stream.partition = StreamSpec::Partition::contiguous;
      else
        p.fail("key 'stream.partition': expected round_robin or contiguous, got '" +
               std::string(val) + "'");
    } else if (key == "stream.label_mode") {
      if (val == "sign")
        cfg.stream.label_mode = StreamSpec::LabelMode::sign;
      else if (val == "raw")
        cfg.stream.label_mode = StreamSpec::LabelMode::raw;
      else
        p.fail("key 'stream.label_mode': expected sign or raw, got '" +
               std::string(val) + "'");
    } else if (key == "stream.normalize") {
      cfg.stream.normalize = p.boolean(key, val);
    } else if (key == "stream.header") {
      cfg.stream.header = p.boolean(key, val);
    } else if (key == "kernel.kind") {
      if (val == "gaussian")
        cfg.kernel.kind = KernelKind::gaussian;
      else if (val == "linear")
        cfg.kernel.kind = KernelKind::linear;
      else if (val == "polynomial")
        cfg.kernel.kind = KernelKind::polynomial;
      else
        p.fail("key 'kernel.kind': expected gaussian, linear or polynomial, got '" +
               std::string(val) + "'");
    } else if (key == "kernel.bandwidth") {
      cfg.kernel.bandwidth = p.number(key, val);
    } else if (key == "kernel.degree") {
      cfg.kernel.degree = static_cast<int>(p.integer(key, val));
    } else if (key == "kernel.offset") {
      cfg.kernel.offset = p.number(key, val);
    } else if (key == "loss.kind") {
      if (val == "hinge")
        cfg.loss.kind = LossKind::hinge;
      else if (val == "squared")
        cfg.loss.kind = LossKind::squared;
      else
        p.fail("key 'loss.kind': expected hinge or squared, got '" +
               std::string(val) + "'");
    } else if (key == "learner.learn_rate") {
      cfg.learner.learn_rate = p.number(key, val);
    } else if (key == "learner.reg") {
      cfg.learner.reg = p.number(key, val);
    } else if (key == "learner.compression") {
      if (val == "none")
        cfg.learner.compression.kind = CompressionKind::none;
      else if (val == "truncate")
        cfg.learner.compression.kind = CompressionKind::truncate;
      else if (val == "project")
        cfg.learner.compression.kind = CompressionKind::project;
      else
        p.fail("key 'learner.compression': expected none, truncate or project, "
               "got '" +
               std::string(val) + "'");
    } else if (key == "learner.budget") {
      cfg.learner.compression.budget = static_cast<int>(p.integer(key, val));
    } else if (key == "learner.tolerance") {
      cfg.learner.compression.tolerance = p.number(key, val);
    } else if (key == "strategy.kind") {
      if (val == "none")
        cfg.strategy.kind = SyncStrategy::Kind::none;
      else if (val == "continuous")
        cfg.strategy.kind = SyncStrategy::Kind::continuous;
      else if (val == "periodic")
        cfg.strategy.kind = SyncStrategy::Kind::periodic;
      else if (val == "dynamic")
        cfg.strategy.kind = SyncStrategy::Kind::dynamic;
      else
        p.fail("key 'strategy.kind': expected none, continuous, periodic or "
               "dynamic, got '" +
               std::string(val) + "'");
      have_strategy = true;
    } else if (key == "strategy.period") {
      cfg.strategy.period = p.integer(key, val);
    } else if (key == "strategy.delta") {
      cfg.strategy.delta = p.number(key, val);
    } else if (key == "strategy.check_period") {
      cfg.strategy.check_period = p.integer(key, val);
    } else if (key == "costs.bytes_per_sv") {
      cfg.costs.bytes_per_sv = p.integer(key, val);
    } else if (key == "costs.bytes_per_coeff") {
      cfg.costs.bytes_per_coeff = p.integer(key, val);
    } else if (key == "costs.bytes_per_linear_model") {
      cfg.costs.bytes_per_linear_model = p.integer(key, val);
    } else {
      p.fail("unknown key '" + std::string(key) + "'");
    }
  }

  p.line = 0;  // end-of-file diagnostics
  if (!have_m) throw ConfigError(origin + ": missing required key 'm'");
  if (!have_rounds) throw ConfigError(origin + ": missing required key 'rounds'");
  if (!have_stream)
    throw ConfigError(origin + ": missing required key 'stream.kind'");
  if (!have_strategy)
    throw ConfigError(origin + ": missing required key 'strategy.kind'");

  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

}  // namespace driftsync
