#include "specgrid/run_config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <thread>

namespace specgrid {
namespace {

using Setter = std::function<void(RunConfig&, const std::string&)>;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

long long to_int(const std::string& v) {
  std::size_t used = 0;
  const long long r = std::stoll(v, &used);
  if (used != v.size()) throw std::invalid_argument("trailing characters");
  return r;
}

double to_double(const std::string& v) {
  std::size_t used = 0;
  const double r = std::stod(v, &used);
  if (used != v.size()) throw std::invalid_argument("trailing characters");
  return r;
}

Range to_range(const std::string& v) {
  const auto parts = split(v, ',');
  if (parts.size() != 2) throw std::invalid_argument("expected 'lo,hi'");
  return {to_double(parts[0]), to_double(parts[1])};
}

IntRange to_int_range(const std::string& v) {
  const auto parts = split(v, ',');
  if (parts.size() != 2) throw std::invalid_argument("expected 'lo,hi'");
  return {static_cast<int>(to_int(parts[0])), static_cast<int>(to_int(parts[1]))};
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("expected true/false");
}

const std::map<std::string, Setter>& schema() {
  static const std::map<std::string, Setter> table = {
      {"corpus_dir", [](RunConfig& c, const std::string& v) { c.corpus_dir = v; }},
      {"checkpoint_dir", [](RunConfig& c, const std::string& v) { c.checkpoint_dir = v; }},
      {"holdout_count", [](RunConfig& c, const std::string& v) { c.holdout_count = static_cast<std::size_t>(to_int(v)); }},
      {"threads", [](RunConfig& c, const std::string& v) { c.threads = static_cast<int>(to_int(v)); }},
      {"resume", [](RunConfig& c, const std::string& v) { c.resume = to_bool(v); }},
      {"bin_size", [](RunConfig& c, const std::string& v) { c.net.bin_size = to_int(v); }},
      {"luma_bins", [](RunConfig& c, const std::string& v) { c.net.luma_bins = to_int(v); }},
      {"trunk_depth", [](RunConfig& c, const std::string& v) { c.net.trunk_depth = to_int(v); }},
      {"downscale_channels",
       [](RunConfig& c, const std::string& v) {
         c.net.downscale_channels.clear();
         for (const auto& p : split(v, ',')) c.net.downscale_channels.push_back(to_int(p));
       }},
      {"alpha", [](RunConfig& c, const std::string& v) { c.hyper.alpha = to_double(v); }},
      {"lr0", [](RunConfig& c, const std::string& v) { c.hyper.lr0 = to_double(v); }},
      {"halve_epochs",
       [](RunConfig& c, const std::string& v) {
         c.hyper.halve_epochs.clear();
         for (const auto& p : split(v, ',')) c.hyper.halve_epochs.push_back(static_cast<int>(to_int(p)));
       }},
      {"epochs", [](RunConfig& c, const std::string& v) { c.hyper.epochs = static_cast<int>(to_int(v)); }},
      {"beta1", [](RunConfig& c, const std::string& v) { c.hyper.beta1 = to_double(v); }},
      {"beta2", [](RunConfig& c, const std::string& v) { c.hyper.beta2 = to_double(v); }},
      {"eps", [](RunConfig& c, const std::string& v) { c.hyper.eps = to_double(v); }},
      {"batch_size", [](RunConfig& c, const std::string& v) { c.hyper.batch_size = static_cast<int>(to_int(v)); }},
      {"seed", [](RunConfig& c, const std::string& v) { c.hyper.seed = static_cast<std::uint64_t>(to_int(v)); }},
      {"max_steps", [](RunConfig& c, const std::string& v) { c.hyper.max_steps = to_int(v); }},
      {"augment.hue_anchors", [](RunConfig& c, const std::string& v) { c.augment.hue_anchors = to_int_range(v); }},
      {"augment.exposure", [](RunConfig& c, const std::string& v) { c.augment.exposure = to_range(v); }},
      {"augment.noise_sigma", [](RunConfig& c, const std::string& v) { c.augment.noise_sigma = to_range(v); }},
      {"augment.stroke_count", [](RunConfig& c, const std::string& v) { c.augment.stroke_count = to_int_range(v); }},
      {"augment.stroke_width", [](RunConfig& c, const std::string& v) { c.augment.stroke_width = to_range(v); }},
      {"augment.stroke_max_fraction",
       [](RunConfig& c, const std::string& v) { c.augment.stroke_max_fraction = to_double(v); }},
      {"augment.pixel_probability",
       [](RunConfig& c, const std::string& v) { c.augment.pixel_probability = to_range(v); }},
      {"augment.block_count", [](RunConfig& c, const std::string& v) { c.augment.block_count = to_int_range(v); }},
      {"augment.block_size", [](RunConfig& c, const std::string& v) { c.augment.block_size = to_range(v); }},
      {"augment.block_max_fraction",
       [](RunConfig& c, const std::string& v) { c.augment.block_max_fraction = to_double(v); }},
      {"augment.border_max_fraction",
       [](RunConfig& c, const std::string& v) { c.augment.border_max_fraction = to_double(v); }},
      {"augment.edge_width", [](RunConfig& c, const std::string& v) { c.augment.edge_width = to_range(v); }},
      {"augment.edge_max_fraction",
       [](RunConfig& c, const std::string& v) { c.augment.edge_max_fraction = to_double(v); }},
      {"augment.canny_low", [](RunConfig& c, const std::string& v) { c.augment.canny_low = to_double(v); }},
      {"augment.canny_high", [](RunConfig& c, const std::string& v) { c.augment.canny_high = to_double(v); }},
  };
  return table;
}

void apply(RunConfig& cfg, const std::string& key, const std::string& value) {
  const auto& table = schema();
  auto it = table.find(key);
  if (it == table.end()) throw ArgumentError("config: unknown key '" + key + "'");
  try {
    it->second(cfg, value);
  } catch (const std::logic_error& e) {
    throw ArgumentError("config: bad value '" + value + "' for key '" + key + "' (" + e.what() + ")");
  }
  cfg.keys_set.push_back(key);
}

std::pair<std::string, std::string> split_assignment(std::string_view line, std::string_view where) {
  const auto eq = line.find('=');
  if (eq == std::string_view::npos) {
    throw ArgumentError("config: expected 'key = value' at " + std::string(where) + ": '" + std::string(line) + "'");
  }
  std::string key = trim(line.substr(0, eq));
  if (key.empty()) throw ArgumentError("config: empty key at " + std::string(where));
  return {std::move(key), trim(line.substr(eq + 1))};
}

}  // namespace

bool RunConfig::has(std::string_view key) const {
  return std::find(keys_set.begin(), keys_set.end(), key) != keys_set.end();
}

std::vector<std::string> run_config_keys() {
  std::vector<std::string> out;
  for (const auto& [k, _] : schema()) out.push_back(k);
  return out;
}

RunConfig parse_run_config(std::string_view text, std::span<const std::string> overrides) {
  RunConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    auto [key, value] = split_assignment(line, "line " + std::to_string(number));
    apply(cfg, key, value);
  }
  for (const auto& o : overrides) {
    auto [key, value] = split_assignment(o, "override");
    apply(cfg, key, value);
  }
  // bin_size follows the downscale chain unless set explicitly.
  if (!cfg.has("bin_size")) cfg.net.bin_size = Index{1} << cfg.net.downscale_channels.size();
  cfg.net.validate();
  cfg.hyper.validate();
  cfg.augment.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path, std::span<const std::string> overrides) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), overrides);
}

int resolve_thread_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("SPECGRID_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace specgrid
