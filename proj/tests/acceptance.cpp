// Acceptance run: one PASS/FAIL line per criterion. Exit status is nonzero if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "curvelab/experiments.hpp"

using namespace curvelab;

namespace {

struct Criterion {
  int id;
  std::string experiment;
  std::string overrides;  // config text
  double time_limit_s;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> list = {
      {1, "partition-of-unity", "", 1},
      {2, "commutation", "", 30},
      {3, "hilbert-classical", "", 10},
      {4, "lemma21-decay", "", 120},
      {5, "vdc-baseline", "", 30},
      {6, "shifted-max-growth", "", 120},
      {7, "rectangle-domination", "", 120},
      {8, "multiplier-sum", "", 120},
      {9, "dyadic-max-stability", "", 180},
      {10, "sharpness-ball", "", 300},
      {11, "local-smoothing", "", 600},
      {12, "decoupling", "", 600},
      {13, "bilinear", "", 300},
      {14, "carleson-sup", "", 300},
      {15, "annulus-decay-1d", "", 300},
  };
  return list;
}

// Small settings so that every experiment can be rerun a few times.
const std::vector<std::pair<std::string, std::string>>& quick_configs() {
  static const std::vector<std::pair<std::string, std::string>> list = {
      {"max-norm-stability", "n = 32, 64\np = 2\nnodes_per_side = 32\nladder_depth = 2\nfield = measurable"},
      {"ht-one-variable", "n = 32, 64\np = 2\nnodes_per_side = 32"},
      {"single-annulus-measurable", "n = 32, 64\np = 3\nk = 1\nnodes_per_side = 32"},
      {"sharpness-ball", "n = 64\nradii = 1/2, 1/4\nladder_depth = 3\nnodes_per_side = 32"},
      {"shifted-max-growth", "length = 256\nshifts = 1, 2, 4\nfamilies = 2\nmembers = 2"},
      {"lemma21-decay", "l = 2..4\nxi_per_sign = 4\nquad_depth = 64"},
      {"annulus-decay-1d", "n = 16\nl = 1..3\nquad_depth = 32"},
      {"multiplier-sum", "ranges = 4, 6"},
      {"local-smoothing", "n = 64\nside = 6.283185307179586\nk = 1..3\ntrials = 2"},
      {"decoupling", "delta = 1/2, 1/4\ntrials = 3"},
      {"bilinear", "trials = 2\nradius = 8"},
      {"carleson-sup", "n = 32\nladder_points = 2\nnodes_per_side = 16\ntrials = 2"},
      {"rectangle-domination", "n = 32\nj = 1"},
      {"dyadic-max-stability", "n = 32, 64\nj = -1..1\nnodes_per_side = 32\nladder_depth = 2"},
      {"vdc-baseline", "lambda_exponents = 4..6"},
      {"commutation", "n = 32\nk = 2\ntrials = 2"},
      {"hilbert-classical", "n = 32\nnodes_per_side = 256\ntrials = 1"},
      {"partition-of-unity", "samples = 1000"},
  };
  return list;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string rounded(double s) { return format_real(std::round(s * 100) / 100); }

bool report_sweep(const Criterion& c) {
  auto cfg = ExperimentConfig::parse(c.overrides);
  cfg.set("experiment", c.experiment);
  std::ostringstream detail;
  bool ok = true;
  auto t0 = std::chrono::steady_clock::now();
  try {
    SweepResult r = run_experiment(cfg);
    double secs = seconds_since(t0);
    for (const auto& ck : r.checks) {
      detail << "; " << ck.name << " " << format_real(ck.value) << " " << ck.relation << " " << format_real(ck.bound)
             << (ck.passed ? "" : " (failed)");
      ok = ok && ck.passed;
    }
    if (r.checks.empty()) {
      detail << "; no checks produced";
      ok = false;
    }
    bool in_time = secs < c.time_limit_s;
    detail << "; runtime " << rounded(secs) << " s < " << format_real(c.time_limit_s) << " s"
           << (in_time ? "" : " (exceeded)");
    ok = ok && in_time;
  } catch (const std::exception& e) {
    detail << "; error: " << e.what();
    ok = false;
  }
  std::printf("%s criterion %02d %s%s\n", ok ? "PASS" : "FAIL", c.id, c.experiment.c_str(), detail.str().c_str());
  std::fflush(stdout);
  return ok;
}

std::string csv_with_threads(const std::string& name, const std::string& text, const char* threads) {
  setenv("CURVELAB_THREADS", threads, 1);
  auto cfg = ExperimentConfig::parse(text);
  cfg.set("experiment", name);
  cfg.set("seed", "20261018");
  return csv_text(run_experiment(cfg));
}

bool report_determinism() {
  auto t0 = std::chrono::steady_clock::now();
  std::vector<std::string> mismatched;
  std::string error;
  std::size_t covered = 0;
  try {
    for (const auto& [name, text] : quick_configs()) {
      std::string a = csv_with_threads(name, text, "1");
      std::string b = csv_with_threads(name, text, "8");
      std::string c = csv_with_threads(name, text, "1");
      if (a != b || a != c || a.empty()) mismatched.push_back(name);
      ++covered;
    }
  } catch (const std::exception& e) {
    error = e.what();
  }
  unsetenv("CURVELAB_THREADS");
  bool all_listed = covered == experiment_names().size();
  bool ok = error.empty() && mismatched.empty() && all_listed;
  std::ostringstream detail;
  detail << "; " << covered << "/" << experiment_names().size() << " experiments byte-identical across reruns with "
         << "CURVELAB_THREADS in {1, 8}";
  for (const auto& m : mismatched) detail << "; differs: " << m;
  if (!error.empty()) detail << "; error: " << error;
  detail << "; runtime " << rounded(seconds_since(t0)) << " s";
  std::printf("%s criterion 16 determinism%s\n", ok ? "PASS" : "FAIL", detail.str().c_str());
  std::fflush(stdout);
  return ok;
}

}  // namespace

int main() {
  int failed = 0;
  for (const auto& c : criteria())
    if (!report_sweep(c)) ++failed;
  if (!report_determinism()) ++failed;
  std::printf("%d of 16 criteria passed\n", 16 - failed);
  return failed == 0 ? 0 : 1;
}
