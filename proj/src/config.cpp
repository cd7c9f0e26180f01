#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

#include "curvelab/experiments.hpp"

namespace curvelab {

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    auto t = trim(item);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

double parse_real(const std::string& key, const std::string& raw) {
  auto slash = raw.find('/');
  if (slash != std::string::npos)
    return parse_real(key, trim(raw.substr(0, slash))) / parse_real(key, trim(raw.substr(slash + 1)));
  if (raw == "inf") return std::numeric_limits<double>::infinity();
  double v = 0;
  auto [end, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
  if (ec != std::errc() || end != raw.data() + raw.size()) throw ConfigError("key '" + key + "': not a number: " + raw);
  return v;
}

long long parse_integer(const std::string& key, const std::string& raw) {
  long long v = 0;
  auto [end, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
  if (ec != std::errc() || end != raw.data() + raw.size())
    throw ConfigError("key '" + key + "': not an integer: " + raw);
  return v;
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(std::string_view text, const std::string& origin) {
  ExperimentConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    auto body = trim(line);
    if (body.empty()) continue;
    auto eq = body.find('=');
    std::string where = origin + ":" + std::to_string(number);
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    auto key = trim(body.substr(0, eq)), value = trim(body.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    if (cfg.values_.count(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
    cfg.values_[key] = value;
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.string());
}

const std::string* ExperimentConfig::find(const std::string& key) const {
  used_.insert(key);
  auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

std::string ExperimentConfig::text(const std::string& key, const std::string& fallback) const {
  auto v = find(key);
  return v ? *v : fallback;
}

double ExperimentConfig::real(const std::string& key, double fallback) const {
  auto v = find(key);
  return v ? parse_real(key, *v) : fallback;
}

long long ExperimentConfig::integer(const std::string& key, long long fallback) const {
  auto v = find(key);
  return v ? parse_integer(key, *v) : fallback;
}

std::uint64_t ExperimentConfig::seed() const {
  auto v = find("seed");
  if (!v) return 1;
  std::uint64_t s = 0;
  auto [end, ec] = std::from_chars(v->data(), v->data() + v->size(), s);
  if (ec != std::errc() || end != v->data() + v->size()) throw ConfigError("key 'seed': not a u64: " + *v);
  return s;
}

std::vector<double> ExperimentConfig::reals(const std::string& key, const std::vector<double>& fallback) const {
  auto v = find(key);
  if (!v) return fallback;
  std::vector<double> out;
  for (const auto& item : split_list(*v)) out.push_back(parse_real(key, item));
  if (out.empty()) throw ConfigError("key '" + key + "': empty list");
  return out;
}

// Items are integers or inclusive ranges a..b.
std::vector<long long> ExperimentConfig::integers(const std::string& key,
                                                  const std::vector<long long>& fallback) const {
  auto v = find(key);
  if (!v) return fallback;
  std::vector<long long> out;
  for (const auto& item : split_list(*v)) {
    auto dots = item.find("..");
    if (dots == std::string::npos) {
      out.push_back(parse_integer(key, item));
      continue;
    }
    long long a = parse_integer(key, trim(item.substr(0, dots))), b = parse_integer(key, trim(item.substr(dots + 2)));
    if (b < a) throw ConfigError("key '" + key + "': empty range " + item);
    for (long long i = a; i <= b; ++i) out.push_back(i);
  }
  if (out.empty()) throw ConfigError("key '" + key + "': empty list");
  return out;
}

void ExperimentConfig::reject_unused() const {
  std::string unknown;
  for (const auto& [k, v] : values_)
    if (!used_.count(k)) unknown += (unknown.empty() ? "" : ", ") + k;
  if (!unknown.empty()) throw ConfigError("unknown config keys: " + unknown);
}

}  // namespace curvelab
