#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "curvelab/error.hpp"
#include "curvelab/fit.hpp"

namespace curvelab {

// Flat `key = value` configuration with typed, default-aware lookups. Every lookup
// marks the key as used so misspelled keys can be rejected.
class ExperimentConfig {
 public:
  static ExperimentConfig parse(std::string_view text, const std::string& origin = "<config>");
  static ExperimentConfig load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string text(const std::string& key, const std::string& fallback) const;
  double real(const std::string& key, double fallback) const;
  long long integer(const std::string& key, long long fallback) const;
  std::uint64_t seed() const;
  std::vector<double> reals(const std::string& key, const std::vector<double>& fallback) const;
  std::vector<long long> integers(const std::string& key, const std::vector<long long>& fallback) const;

  // Throws ConfigError naming keys that no lookup has touched.
  void reject_unused() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  const std::string* find(const std::string& key) const;

  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

using Cell = std::variant<long long, double, std::string>;

struct Check {
  std::string name;
  double value = 0;
  std::string relation;  // one of < <= > >=
  double bound = 0;
  bool passed = false;
};

struct SweepResult {
  std::string experiment;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::optional<FitResult> fit;
  std::string x_label = "x", y_label = "y";
  std::vector<std::pair<double, double>> plot_points;
  std::vector<Check> checks;

  void add_row(std::vector<Cell> row);
  void add_check(const std::string& name, double value, const std::string& relation, double bound);
  bool passed() const;
};

const std::vector<std::string>& experiment_names();

// Runs the experiment named by the `experiment` key.
SweepResult run_experiment(const ExperimentConfig& config);

std::string csv_text(const SweepResult& result);
std::string svg_text(const SweepResult& result);
std::string fit_json_text(const SweepResult& result);

void emit_csv(const SweepResult& result, const std::filesystem::path& path);
void emit_plot(const SweepResult& result, const std::filesystem::path& path);
void emit_fit(const SweepResult& result, const std::filesystem::path& path);

// Shortest decimal that reads back to the same double.
std::string format_real(double v);

// (max - min) / min of positive values.
double relative_drift(const std::vector<double>& values);

}  // namespace curvelab
