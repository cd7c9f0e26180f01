#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "curvelab/curve_ops.hpp"
#include "curvelab/cutoff_lp.hpp"
#include "curvelab/decoupling.hpp"
#include "curvelab/experiments.hpp"
#include "curvelab/oscillatory.hpp"
#include "curvelab/rng.hpp"
#include "curvelab/shifted_max.hpp"

namespace curvelab {

namespace {

constexpr double kGiB = 1024.0 * 1024.0 * 1024.0;

// ---- shared configuration helpers ----

void guard_memory(const ExperimentConfig& cfg, double bytes) {
  double cap = cfg.real("memory_cap_gib", 8.0) * kGiB;
  if (bytes > cap)
    throw ConfigError("infeasible grid: estimated " + format_real(std::round(bytes / kGiB * 100) / 100) +
                      " GiB exceeds the memory cap of " + format_real(cap / kGiB) + " GiB");
}

// Buffers held by the grid operators: sampled field, shells, interpolation rows.
double grid_bytes(long long n, int buffers) { return static_cast<double>(n) * n * 16.0 * buffers; }

Parity parse_parity(const std::string& s) {
  if (s == "even") return Parity::even;
  if (s == "odd") return Parity::odd;
  throw ConfigError("parity must be 'even' or 'odd', got '" + s + "'");
}

int to_int(long long v, const std::string& key) {
  if (v < -(1LL << 30) || v > (1LL << 30)) throw ConfigError("key '" + key + "' out of range");
  return static_cast<int>(v);
}

std::vector<int> int_list(const ExperimentConfig& cfg, const std::string& key, std::vector<long long> fallback) {
  std::vector<int> out;
  for (auto v : cfg.integers(key, fallback)) out.push_back(to_int(v, key));
  return out;
}

TorusGrid grid_or_config_error(long long n, double side, int dims) {
  try {
    return make_grid(to_int(n, "n"), side, dims);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

struct FieldSpec {
  std::string kind;
  double alpha = 2;
  Parity parity = Parity::even;
  double base = 1, amplitude = 0.5, clip = 64;
  int cells = 16;
  std::uint64_t seed = 1;
};

FieldSpec read_field(const ExperimentConfig& cfg, const std::string& default_kind, double alpha_default,
                     const std::string& parity_default) {
  FieldSpec s;
  s.kind = cfg.text("field", default_kind);
  s.alpha = cfg.real("alpha", alpha_default);
  s.parity = parse_parity(cfg.text("parity", parity_default));
  s.base = cfg.real("field_base", 1.0);
  s.amplitude = cfg.real("field_amplitude", 0.5);
  s.clip = cfg.real("clip", 64.0);
  s.cells = to_int(cfg.integer("field_cells", 16), "field_cells");
  s.seed = cfg.seed();
  if (!(s.alpha > 0) || s.alpha == 1) throw ConfigError("alpha must be positive and not 1");
  if (s.cells < 1) throw ConfigError("field_cells must be positive");
  return s;
}

// Coefficient fields: u = base + amplitude * profile, on a torus of side L.
CurveField make_field(const FieldSpec& s, const std::string& kind, double side) {
  double w = 2 * kPi / side, base = s.base, amp = s.amplitude;
  if (kind == "constant") return CurveField::constant(s.alpha, s.parity, base);
  if (kind == "one-variable")
    return CurveField::one_variable(s.alpha, s.parity, [=](double x) { return base + amp * std::sin(w * x); });
  if (kind == "lipschitz")
    return CurveField::lipschitz(
        s.alpha, s.parity, [=](double x, double y) { return base + amp * std::sin(w * x) * std::cos(w * y); },
        std::abs(amp) * w * std::sqrt(2.0));
  if (kind == "measurable") {
    // Piecewise constant on a cells x cells mesh with seeded values.
    int c = s.cells;
    std::vector<double> table(static_cast<std::size_t>(c) * c);
    CounterRng rng(s.seed, 0x6d656173ULL);
    for (auto& v : table) v = base + amp * (2 * rng.uniform() - 1);
    return CurveField::measurable(s.alpha, s.parity, [=](double x, double y) {
      auto cell = [&](double t) {
        long long i = static_cast<long long>(std::floor((t / side + 0.5) * c));
        return static_cast<std::size_t>(((i % c) + c) % c);
      };
      return table[cell(x) * c + cell(y)];
    });
  }
  if (kind == "adversarial") return CurveField::adversarial(s.alpha, s.parity, 0.0, 0.0, s.clip);
  throw ConfigError("unknown field kind '" + kind + "'");
}

struct Member {
  std::string name;
  GridFunction f;
};

GridFunction indicator(const TorusGrid& g, const std::function<bool(double, double)>& inside) {
  return sample(g, [&](double x, double y) { return cplx(inside(x, y) ? 1.0 : 0.0); });
}

// Random annulus fields, a plane wave, balls and axis rectangles at three radii, a thin tilted rectangle.
std::vector<Member> test_library(const TorusGrid& g, std::uint64_t seed, const std::vector<int>& annulus_k,
                                 double radius) {
  std::vector<Member> lib;
  std::uint64_t stream = 0;
  for (int k : annulus_k) {
    detail::check_band(g, std::exp2(k + 1));
    lib.push_back({"annulus-" + std::to_string(k), random_field(g, seed, Band::annulus(k), stream++)});
  }
  double w = 2 * kPi / g.side_length;
  lib.push_back({"plane-wave", random_field(g, seed, Band::single(3 * w, 2 * w), stream++)});
  for (int i = 0; i < 3; ++i) {
    double r = std::ldexp(radius, -i);
    lib.push_back({"ball-" + format_real(r), indicator(g, [r](double x, double y) { return x * x + y * y <= r * r; })});
    lib.push_back({"rect-" + format_real(r),
                   indicator(g, [r](double x, double y) { return std::abs(x) <= r && std::abs(y) <= r / 2; })});
  }
  double len = g.side_length / 4, thick = g.side_length / 64, c = std::cos(kPi / 6), s = std::sin(kPi / 6);
  lib.push_back({"tilted-thin", indicator(g, [=](double x, double y) {
                   double a = c * x + s * y, b = -s * x + c * y;
                   return std::abs(a) <= len && std::abs(b) <= thick;
                 })});
  return lib;
}

TruncationScheme read_truncation(const ExperimentConfig& cfg, double eps0_default, int depth_default,
                                 int nodes_default) {
  TruncationScheme tr;
  tr.eps0 = cfg.real("eps0", eps0_default);
  tr.ladder_depth = to_int(cfg.integer("ladder_depth", depth_default), "ladder_depth");
  tr.nodes_per_side = to_int(cfg.integer("nodes_per_side", nodes_default), "nodes_per_side");
  return tr;
}

void config_error_on_invalid(const TruncationScheme& tr, const TorusGrid& g) {
  try {
    validate(tr, g);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

double max_of(const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); }

void set_fit(SweepResult& r, const std::vector<std::pair<double, double>>& pts, const std::string& x,
             const std::string& y) {
  r.x_label = x, r.y_label = y;
  r.plot_points = pts;
  if (pts.size() >= 3) r.fit = fit_exponent(pts);
}

// ---- norm-ratio studies on the test library ----

enum class LibraryOperator { maximal, hilbert, hilbert_single_annulus };

SweepResult library_study(const ExperimentConfig& cfg, const std::string& name, LibraryOperator op) {
  std::string default_field = op == LibraryOperator::maximal ? "lipschitz"
                              : op == LibraryOperator::hilbert ? "one-variable"
                                                               : "measurable";
  auto ns = cfg.integers("n", {64, 128});
  double side = cfg.real("side", 8.0);
  auto spec = read_field(cfg, default_field, 2.0, "even");
  auto ps = cfg.reals("p", op == LibraryOperator::hilbert_single_annulus ? std::vector<double>{3, 4}
                                                                         : std::vector<double>{1.5, 2, 4});
  auto annulus_k = int_list(cfg, "annulus_k", {0, 1, 2});
  double radius = cfg.real("radius", side / 8);
  auto ks = op == LibraryOperator::hilbert_single_annulus ? int_list(cfg, "k", {1, 2, 3}) : std::vector<int>{0};
  auto field = make_field(spec, spec.kind, side);
  double eps0_default = op == LibraryOperator::maximal ? std::min(default_eps0(field), side / 4) : 1.0;
  auto tr = read_truncation(cfg, eps0_default, op == LibraryOperator::maximal ? 4 : 1, 256);
  cfg.reject_unused();
  for (double p : ps)
    if (!(p > 1) || !std::isfinite(p)) throw ConfigError("p must lie in (1, inf)");
  if (op == LibraryOperator::hilbert && !field.y_independent())
    throw ConfigError("ht-one-variable needs a field with u(x, y) = u(x, 0)");
  for (auto n : ns) guard_memory(cfg, grid_bytes(n, 64));

  SweepResult r;
  r.experiment = name;
  r.columns = op == LibraryOperator::hilbert_single_annulus
                  ? std::vector<std::string>{"n", "k", "p", "function", "ratio"}
                  : std::vector<std::string>{"n", "p", "function", "ratio"};
  // best[(k, p)][n index] = max over the library
  std::map<std::pair<int, double>, std::vector<double>> best;
  for (std::size_t ni = 0; ni < ns.size(); ++ni) {
    auto n = ns[ni];
    auto g = grid_or_config_error(n, side, 2);
    config_error_on_invalid(tr, g);
    auto lib = test_library(g, spec.seed, annulus_k, radius);
    for (int k : ks) {
      for (const auto& m : lib) {
        GridFunction out;
        if (op == LibraryOperator::maximal) out = maximal_along_curve(m.f, field, tr);
        else if (op == LibraryOperator::hilbert) out = hilbert_along_curve(m.f, field, tr);
        else out = hilbert_along_curve(project_second(m.f, k), field, tr);
        for (double p : ps) {
          double ratio = norm_lp(out, p) / norm_lp(m.f, p);
          auto& slot = best[{k, p}];
          slot.resize(ns.size(), 0.0);
          slot[ni] = std::max(slot[ni], ratio);
          if (op == LibraryOperator::hilbert_single_annulus) r.add_row({n, static_cast<long long>(k), p, m.name, ratio});
          else r.add_row({n, p, m.name, ratio});
        }
      }
    }
  }
  std::vector<std::pair<double, double>> pts;
  for (const auto& [key, vals] : best) {
    std::string label = "p=" + format_real(key.second);
    if (op == LibraryOperator::hilbert_single_annulus) label = "k=" + std::to_string(key.first) + " " + label;
    if (vals.size() >= 2) r.add_check("refinement drift " + label, relative_drift(vals), "<", 0.2);
    if (pts.empty())
      for (std::size_t i = 0; i < vals.size(); ++i) pts.emplace_back(static_cast<double>(ns[i]), vals[i]);
  }
  r.x_label = "n", r.y_label = "max ratio";
  r.plot_points = pts;
  return r;
}

// ---- individual experiments ----

SweepResult sharpness_ball(const ExperimentConfig& cfg) {
  auto n = cfg.integer("n", 256);
  double side = cfg.real("side", 4.0);
  auto spec = read_field(cfg, "lipschitz", 2.0, "even");
  double p = cfg.real("p", 1.5);
  auto radii = cfg.reals("radii", {0.25, 0.125, 0.0625});
  auto tr = read_truncation(cfg, 1.0, 8, 512);
  cfg.reject_unused();
  if (!(p > 1)) throw ConfigError("p must exceed 1");
  guard_memory(cfg, grid_bytes(n, 64));
  auto g = grid_or_config_error(n, side, 2);
  config_error_on_invalid(tr, g);

  SweepResult r;
  r.experiment = "sharpness-ball";
  r.columns = {"field", "radius", "p", "ratio"};
  std::vector<std::pair<double, double>> blowup;
  std::vector<double> regular;
  for (const std::string& kind : {spec.kind, std::string("adversarial")}) {
    auto field = make_field(spec, kind, side);
    for (double rad : radii) {
      auto ball = indicator(g, [rad](double x, double y) { return x * x + y * y <= rad * rad; });
      if (norm_lp(ball, p) == 0) throw ConfigError("ball radius " + format_real(rad) + " is below the grid spacing");
      double ratio = norm_lp(maximal_along_curve(ball, field, tr), p) / norm_lp(ball, p);
      r.add_row({kind, rad, p, ratio});
      if (kind == "adversarial") blowup.emplace_back(1 / rad, ratio);
      else regular.push_back(ratio);
    }
  }
  r.add_check("drift " + spec.kind, relative_drift(regular), "<", 0.2);
  set_fit(r, blowup, "1/r", "adversarial ratio");
  if (r.fit) r.add_check("adversarial blowup slope", r.fit->slope, ">", 0.2);
  return r;
}

SweepResult dyadic_max_stability(const ExperimentConfig& cfg) {
  auto ns = cfg.integers("n", {256, 512, 1024});
  double side = cfg.real("side", 8.0);
  double alpha = cfg.real("alpha", 2.0);
  auto parity = parse_parity(cfg.text("parity", "even"));
  double radius = cfg.real("radius", 1.0);
  double p = cfg.real("p", 2.0);
  auto js = int_list(cfg, "j", {-2, -1, 0, 1, 2});
  auto tr = read_truncation(cfg, 1.0, 4, 256);
  cfg.reject_unused();
  for (auto n : ns) guard_memory(cfg, grid_bytes(n, 24));
  SweepResult r;
  r.experiment = "dyadic-max-stability";
  r.columns = {"n", "p", "ratio"};
  std::vector<double> vals;
  for (auto n : ns) {
    auto g = grid_or_config_error(n, side, 2);
    config_error_on_invalid(tr, g);
    auto ball = indicator(g, [radius](double x, double y) { return x * x + y * y <= radius * radius; });
    auto m = dyadic_monomial_maximal(ball, alpha, parity, js.front(), js.back(), tr);
    double ratio = norm_lp(m, p) / norm_lp(ball, p);
    r.add_row({n, p, ratio});
    vals.push_back(ratio);
    r.plot_points.emplace_back(static_cast<double>(n), ratio);
  }
  r.x_label = "n", r.y_label = "ratio";
  if (vals.size() >= 2) r.add_check("refinement drift", relative_drift(vals), "<", 0.2);
  return r;
}

SweepResult shifted_max_growth(const ExperimentConfig& cfg) {
  auto len = cfg.integer("length", 4096);
  auto shifts = cfg.integers("shifts", {1, 2, 4, 8, 16, 32, 64, 128, 256});
  auto families = to_int(cfg.integer("families", 10), "families");
  auto members = to_int(cfg.integer("members", 8), "members");
  double p = cfg.real("p", 2.0), q = cfg.real("q", 2.0);
  auto seed = cfg.seed();
  cfg.reject_unused();
  if (!is_power_of_two(len)) throw ConfigError("length must be a power of two");
  if (families < 1 || members < 1) throw ConfigError("families and members must be positive");
  if (std::find(shifts.begin(), shifts.end(), 1LL) == shifts.end()) throw ConfigError("shifts must include 1");
  guard_memory(cfg, static_cast<double>(len) * members * families * 8.0 * 3);

  std::vector<std::vector<std::vector<double>>> fams(families);
  for (int f = 0; f < families; ++f)
    for (int m = 0; m < members; ++m) {
      CounterRng rng(seed, static_cast<std::uint64_t>(f) * members + m);
      std::vector<double> a(static_cast<std::size_t>(len));
      for (auto& v : a) v = rng.uniform();
      fams[f].push_back(std::move(a));
    }
  SweepResult r;
  r.experiment = "shifted-max-growth";
  r.columns = {"n", "family", "ratio"};
  std::vector<std::vector<double>> ratio(shifts.size(), std::vector<double>(families));
  parallel_for(shifts.size() * families, [&](std::size_t i) {
    std::size_t s = i / families, f = i % families;
    ratio[s][f] = vv_norm_ratio(fams[f], shifts[s], p, q);
  });
  auto one = std::find(shifts.begin(), shifts.end(), 1LL) - shifts.begin();
  auto log2_bracket = [](long long n) { return std::pow(std::log(2.0 + std::abs(static_cast<double>(n))), 2); };
  double worst = 0;
  std::vector<std::pair<double, double>> pts;
  for (std::size_t s = 0; s < shifts.size(); ++s) {
    double mx = 0;
    for (int f = 0; f < families; ++f) {
      r.add_row({shifts[s], static_cast<long long>(f), ratio[s][f]});
      mx = std::max(mx, ratio[s][f]);
      worst = std::max(worst, (ratio[s][f] / log2_bracket(shifts[s])) / (ratio[one][f] / log2_bracket(1)));
    }
    pts.emplace_back(2.0 + std::abs(static_cast<double>(shifts[s])), mx);
  }
  r.add_check("normalized growth vs n=1", worst, "<=", 3.0);
  set_fit(r, pts, "2+|n|", "max ratio");
  return r;
}

SweepResult lemma21_decay(const ExperimentConfig& cfg) {
  double alpha = cfg.real("alpha", 3.0), h = cfg.real("h", 1.0), w = cfg.real("w", 0.0);
  auto levels = int_list(cfg, "l", {2, 3, 4, 5, 6, 7, 8});
  int per_sign = to_int(cfg.integer("xi_per_sign", 64), "xi_per_sign");
  int depth = to_int(cfg.integer("quad_depth", 1024), "quad_depth");
  cfg.reject_unused();
  SweepResult r;
  r.experiment = "lemma21-decay";
  r.columns = {"l", "sup"};
  std::vector<std::pair<double, double>> pts;
  for (int l : levels) {
    double s = kernel_sup(OscillatoryKernelParams::make(alpha, l, h, w, 0.0), per_sign, depth);
    r.add_row({static_cast<long long>(l), s});
    pts.emplace_back(std::exp2(l), s);
  }
  set_fit(r, pts, "2^l", "sup I");
  if (r.fit) {
    r.add_check("slope", r.fit->slope, "<=", -0.5);
    r.add_check("r_squared", r.fit->r_squared, ">=", 0.8);
  }
  return r;
}

SweepResult vdc_experiment(const ExperimentConfig& cfg) {
  double power = cfg.real("power", 2.0);
  auto exps = int_list(cfg, "lambda_exponents", {4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14});
  int depth = to_int(cfg.integer("quad_depth", 4096), "quad_depth");
  cfg.reject_unused();
  SweepResult r;
  r.experiment = "vdc-baseline";
  r.columns = {"lambda", "value"};
  std::vector<std::pair<double, double>> pts;
  for (int e : exps) {
    double lam = std::exp2(e), v = vdc_value(power, lam, depth);
    r.add_row({lam, v});
    pts.emplace_back(lam, v);
  }
  set_fit(r, pts, "lambda", "|integral|");
  if (r.fit) r.add_check("|slope + 1/power|", std::abs(r.fit->slope + 1 / power), "<=", 0.05);
  return r;
}

SweepResult annulus_decay(const ExperimentConfig& cfg) {
  auto n = cfg.integer("n", 64);
  double side = cfg.real("side", 16.0);
  double alpha = cfg.real("alpha", 3.0);
  auto parity = parse_parity(cfg.text("parity", "even"));
  auto levels = int_list(cfg, "l", {1, 2, 3, 4, 5, 6, 7});
  double u_lo = cfg.real("u_min", 1.0), u_hi = cfg.real("u_max", 2.0);
  int depth = to_int(cfg.integer("quad_depth", 256), "quad_depth");
  auto seed = cfg.seed();
  cfg.reject_unused();
  if (!(u_lo > 0) || u_hi < u_lo) throw ConfigError("need 0 < u_min <= u_max");
  auto g = grid_or_config_error(n, side, 1);
  auto f = random_field(g, seed, Band::rectangle(-g.nyquist() / 2, g.nyquist() / 2, 0, 0), 0);
  // Independent uniform value per grid point: rough at every scale.
  CounterRng rng(seed, 1);
  std::vector<double> us(static_cast<std::size_t>(n));
  for (auto& u : us) u = u_lo + (u_hi - u_lo) * rng.uniform();
  auto h = g.spacing(), x0 = g.coord(0);
  auto u_field = [&](double x) {
    long long i = std::llround((x - x0) / h);
    return us[static_cast<std::size_t>(((i % n) + n) % n)];
  };
  SweepResult r;
  r.experiment = "annulus-decay-1d";
  r.columns = {"l", "ratio"};
  std::vector<std::pair<double, double>> pts;
  for (int l : levels) {
    double v = annulus_decay_1d(f, u_field, [](double) { return 0.0; }, alpha, l, parity, depth);
    r.add_row({static_cast<long long>(l), v});
    pts.emplace_back(std::exp2(l), v);
  }
  set_fit(r, pts, "2^l", "ratio");
  if (r.fit) r.add_check("slope", r.fit->slope, "<", 0.0);
  return r;
}

SweepResult multiplier_sum(const ExperimentConfig& cfg) {
  double xi = cfg.real("xi", 1.0), eta = cfg.real("eta", 1.0);
  auto ranges = int_list(cfg, "ranges", {20, 30});
  int depth = to_int(cfg.integer("quad_depth", 256), "quad_depth");
  double bound = cfg.real("bound", 50.0);
  cfg.reject_unused();
  SweepResult r;
  r.experiment = "multiplier-sum";
  r.columns = {"range", "sum"};
  std::vector<double> sums;
  for (int m : ranges) {
    double s = multiplier_diff_sum(xi, eta, m, depth);
    r.add_row({static_cast<long long>(m), s});
    sums.push_back(s);
    r.plot_points.emplace_back(m, s);
  }
  r.x_label = "range", r.y_label = "sum";
  r.add_check("first partial sum", sums.front(), "<=", bound);
  if (sums.size() >= 2) r.add_check("relative change", std::abs(sums.back() - sums.front()) / sums.front(), "<", 0.01);
  return r;
}

SweepResult local_smoothing(const ExperimentConfig& cfg) {
  auto ks = int_list(cfg, "k", {3, 4, 5, 6, 7, 8});
  double p = cfg.real("p", 4.0), alpha = cfg.real("alpha", 2.0);
  auto n = cfg.integer("n", 512);
  double side = cfg.real("side", kPi / 2);
  int trials = to_int(cfg.integer("trials", 4), "trials");
  long long fixed_us = cfg.integer("u_samples", 0);
  auto seed = cfg.seed();
  cfg.reject_unused();
  guard_memory(cfg, grid_bytes(n, 3 * trials + 8));
  auto g = grid_or_config_error(n, side, 2);
  SweepResult r;
  r.experiment = "local-smoothing";
  r.columns = {"k", "u_samples", "trial", "ratio"};
  std::vector<std::pair<double, double>> pts;
  for (int k : ks) {
    int us = fixed_us > 0 ? to_int(fixed_us, "u_samples") : std::max(16, (1 << std::max(k, 0)) / 4 + 1);
    auto ratios = local_smoothing_ratios(k, p, alpha, us, g, trials, seed);
    for (int t = 0; t < trials; ++t) r.add_row({static_cast<long long>(k), static_cast<long long>(us), static_cast<long long>(t), ratios[t]});
    pts.emplace_back(std::exp2(k), max_of(ratios));
  }
  set_fit(r, pts, "2^k", "max ratio");
  if (r.fit) {
    r.add_check("slope", r.fit->slope, "<=", -0.05);
    r.add_check("r_squared", r.fit->r_squared, ">=", 0.6);
  }
  return r;
}

SweepResult decoupling_experiment(const ExperimentConfig& cfg) {
  auto deltas = cfg.reals("delta", {0.5, 0.25, 0.125, 0.0625});
  double p = cfg.real("p", 4.0);
  int trials = to_int(cfg.integer("trials", 32), "trials");
  DecouplingOptions opt;
  opt.lattice_spacing = cfg.real("lattice_spacing", 1.0);
  opt.min_nodes_per_cell = to_int(cfg.integer("min_nodes_per_cell", 32), "min_nodes_per_cell");
  auto seed = cfg.seed();
  cfg.reject_unused();
  for (double d : deltas) {
    try {
      make_caps(d);
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
    guard_memory(cfg, decoupling_memory_bytes(d, trials, opt));
  }
  SweepResult r;
  r.experiment = "decoupling";
  r.columns = {"delta", "trial", "ratio"};
  std::vector<std::pair<double, double>> pts;
  for (double d : deltas) {
    auto caps = make_caps(d);
    Coefficients ones{{0, 1}, std::vector<cplx>(caps.caps.size(), cplx(1, 0))};
    std::vector<std::vector<cplx>> factors(trials);
    for (int t = 0; t < trials; ++t) {
      CounterRng rng(seed, static_cast<std::uint64_t>(t));
      for (std::size_t m = 0; m < caps.caps.size(); ++m) factors[t].push_back(rng.complex_normal());
    }
    auto ratios = decoupling_ratios(ones, caps, p, factors, opt);
    for (int t = 0; t < trials; ++t) r.add_row({d, static_cast<long long>(t), ratios[t]});
    pts.emplace_back(1 / d, max_of(ratios));
  }
  // One nonzero cap: the ratio is exactly one.
  double d0 = *std::max_element(deltas.begin(), deltas.end());
  auto caps = make_caps(d0);
  Coefficients single{{0, 1}, std::vector<cplx>(caps.caps.size(), 0.0)};
  single.values.back() = 1;
  double one = decoupling_ratio(single, d0, p, opt);
  r.add_check("|single-cap ratio - 1|", std::abs(one - 1), "<=", 1e-12);
  set_fit(r, pts, "1/delta", "max ratio");
  if (r.fit) r.add_check("slope", r.fit->slope, "<=", 0.25);
  return r;
}

SweepResult bilinear_experiment(const ExperimentConfig& cfg) {
  double nu = cfg.real("nu", 0.25);
  int trials = to_int(cfg.integer("trials", 32), "trials");
  int cells = to_int(cfg.integer("cells", 8), "cells");
  double radius = cfg.real("radius", 64.0);
  auto spacings = cfg.reals("lattice_spacing", {1.0, 0.5});
  auto seed = cfg.seed();
  cfg.reject_unused();
  if (!(nu > 0) || 3 * nu > 1) throw ConfigError("nu must lie in (0, 1/3]");
  if (cells < 1) throw ConfigError("cells must be positive");
  SweepResult r;
  r.experiment = "bilinear";
  r.columns = {"lattice_spacing", "trial", "ratio"};
  std::vector<double> maxima;
  for (double s : spacings) {
    auto lat = Lattice::covering(radius, s);
    guard_memory(cfg, static_cast<double>(lat.side()) * lat.side() * 16.0 * 4);
    std::vector<double> ratios(trials);
    for (int t = 0; t < trials; ++t) {
      auto g1 = Coefficients::gaussian({0, nu}, cells, seed, 2 * static_cast<std::uint64_t>(t));
      auto g2 = Coefficients::gaussian({2 * nu, 3 * nu}, cells, seed, 2 * static_cast<std::uint64_t>(t) + 1);
      ratios[t] = bilinear_ratio(g1, g2, nu, lat);
      r.add_row({s, static_cast<long long>(t), ratios[t]});
    }
    maxima.push_back(max_of(ratios));
    r.plot_points.emplace_back(1 / s, maxima.back());
  }
  r.x_label = "1/spacing", r.y_label = "max ratio";
  if (maxima.size() >= 2) r.add_check("refinement drift", relative_drift(maxima), "<", 0.2);
  return r;
}

SweepResult carleson_experiment(const ExperimentConfig& cfg) {
  auto n = cfg.integer("n", 256);
  double side = cfg.real("side", 16.0);
  double alpha = cfg.real("alpha", 3.0);
  auto parity = parse_parity(cfg.text("parity", "odd"));
  int trials = to_int(cfg.integer("trials", 4), "trials");
  int ladder = to_int(cfg.integer("ladder_points", 8), "ladder_points");
  double u1_max = cfg.real("u1_max", 8.0), u2_max = cfg.real("u2_max", 8.0);
  double eps0 = cfg.real("eps0", 2.0);
  int nodes = to_int(cfg.integer("nodes_per_side", 128), "nodes_per_side");
  auto levels = int_list(cfg, "refinements", {0, 1});
  auto seed = cfg.seed();
  cfg.reject_unused();
  if (ladder < 1) throw ConfigError("ladder_points must be positive");
  auto g = grid_or_config_error(n, side, 1);
  auto ladder_at = [](double top, int count) {
    std::vector<double> v;
    for (int i = 0; i <= count; ++i) v.push_back(-top + 2 * top * i / count);
    return v;
  };
  SweepResult r;
  r.experiment = "carleson-sup";
  r.columns = {"refinement", "ladder_points", "nodes_per_side", "trial", "ratio"};
  std::vector<double> maxima;
  for (int lev : levels) {
    if (lev < 0 || lev > 8) throw ConfigError("refinements must lie in 0..8");
    int count = ladder << lev, m = nodes << lev;
    TruncationScheme tr{eps0, 1, m};
    config_error_on_invalid(tr, g);
    auto u1 = ladder_at(u1_max, count), u2 = ladder_at(u2_max, count);
    double mx = 0;
    for (int t = 0; t < trials; ++t) {
      auto f = random_field(g, seed, Band::rectangle(-g.nyquist() / 2, g.nyquist() / 2, 0, 0), static_cast<std::uint64_t>(t));
      double ratio = norm_lp(carleson_sup(f, alpha, parity, u1, u2, tr), 2) / norm_lp(f, 2);
      r.add_row({static_cast<long long>(lev), static_cast<long long>(count + 1), static_cast<long long>(m),
                 static_cast<long long>(t), ratio});
      mx = std::max(mx, ratio);
    }
    maxima.push_back(mx);
    r.plot_points.emplace_back(std::exp2(lev), mx);
  }
  r.x_label = "refinement factor", r.y_label = "max ratio";
  if (maxima.size() >= 2) r.add_check("refinement drift", relative_drift(maxima), "<", 0.2);
  return r;
}

SweepResult rectangle_domination(const ExperimentConfig& cfg) {
  auto ns = cfg.integers("n", {32, 64});
  double side = cfg.real("side", 16.0);
  double alpha = cfg.real("alpha", 2.0), u = cfg.real("u", 1.0);
  auto parity = parse_parity(cfg.text("parity", "even"));
  auto js = int_list(cfg, "j", {1, 2, 3});
  int tau = to_int(cfg.integer("tau_window", 3), "tau_window");
  auto seed = cfg.seed();
  cfg.reject_unused();
  auto field = CurveField::constant(alpha, parity, u);
  SweepResult r;
  r.experiment = "rectangle-domination";
  r.columns = {"n", "j", "constant"};
  std::vector<double> per_n;
  for (auto n : ns) {
    guard_memory(cfg, grid_bytes(n, 64));
    auto g = grid_or_config_error(n, side, 2);
    // Frequencies |xi| <~ 1, eta ~ 1: the band the majorant is built for.
    auto f = project_second(random_field(g, seed, Band::rectangle(-0.8, 0.8, 0.5, 2.0), 0), 0);
    double worst = 0;
    for (int j : js) {
      auto t = truncated_piece(f, field, j);
      auto m = rectangle_majorant(f, field, j, tau);
      double c = 0;
      for (std::size_t i = 0; i < t.samples.size(); ++i) {
        double a = std::abs(t.samples[i]), b = m.samples[i].real();
        if (b > 0) c = std::max(c, a / b);
        else if (a > 0) c = kInf;
      }
      r.add_row({n, static_cast<long long>(j), c});
      worst = std::max(worst, c);
    }
    per_n.push_back(worst);
    r.plot_points.emplace_back(static_cast<double>(n), worst);
  }
  r.x_label = "n", r.y_label = "domination constant";
  r.add_check("constant finite", std::isfinite(max_of(per_n)) ? 0.0 : 1.0, "<", 0.5);
  if (per_n.size() >= 2 && std::isfinite(max_of(per_n)))
    r.add_check("refinement drift", relative_drift(per_n), "<", 0.2);
  return r;
}

SweepResult commutation(const ExperimentConfig& cfg) {
  auto n = cfg.integer("n", 256);
  double side = cfg.real("side", 8.0);
  auto spec = read_field(cfg, "one-variable", 2.0, "even");
  auto ks = cfg.reals("k", {2, 3, 4});
  int trials = to_int(cfg.integer("trials", 5), "trials");
  auto tr = read_truncation(cfg, 1.0, 1, 256);
  cfg.reject_unused();
  guard_memory(cfg, grid_bytes(n, 32));
  auto g = grid_or_config_error(n, side, 2);
  config_error_on_invalid(tr, g);
  auto field = make_field(spec, spec.kind, side);
  if (!field.y_independent()) throw ConfigError("commutation needs a field with u(x, y) = u(x, 0)");
  SweepResult r;
  r.experiment = "commutation";
  r.columns = {"k", "trial", "relative_error"};
  double worst = 0;
  double top = g.nyquist() / 2;
  for (int t = 0; t < trials; ++t) {
    auto f = random_field(g, spec.seed, Band::rectangle(-top, top, -top, top), static_cast<std::uint64_t>(t));
    auto hf = hilbert_along_curve(f, field, tr);
    for (double k : ks) {
      auto a = hilbert_along_curve(project_second(f, k), field, tr);
      double e = max_abs_diff(a, project_second(hf, k)) / norm_lp(f, kInf);
      r.add_row({k, static_cast<long long>(t), e});
      worst = std::max(worst, e);
    }
  }
  r.add_check("max relative error", worst, "<", 1e-10);
  return r;
}

SweepResult hilbert_classical(const ExperimentConfig& cfg) {
  auto n = cfg.integer("n", 128);
  double side = cfg.real("side", 8.0);
  int depth = to_int(cfg.integer("nodes_per_side", 1 << 14), "nodes_per_side");
  int trials = to_int(cfg.integer("trials", 2), "trials");
  auto seed = cfg.seed();
  cfg.reject_unused();
  guard_memory(cfg, grid_bytes(n, 32));
  auto g = grid_or_config_error(n, side, 2);
  auto zero = CurveField::constant(2, Parity::even, 0.0);
  TruncationScheme tr{kInf, 1, depth};
  config_error_on_invalid(tr, g);
  SweepResult r;
  r.experiment = "hilbert-classical";
  r.columns = {"trial", "relative_l2_error"};
  double top = g.nyquist() / 2, worst = 0;
  for (int t = 0; t < trials; ++t) {
    auto f = random_field(g, seed, Band::rectangle(-top, top, -top, top), static_cast<std::uint64_t>(t));
    auto h = hilbert_along_curve(f, zero, tr);
    auto ref = apply_multiplier(f, [](double xi, double) { return cplx(0, -kPi * ((xi > 0) - (xi < 0))); });
    GridFunction diff(g);
    for (std::size_t i = 0; i < diff.samples.size(); ++i) diff.samples[i] = h.samples[i] - ref.samples[i];
    double e = norm_lp(diff, 2) / norm_lp(ref, 2);
    r.add_row({static_cast<long long>(t), e});
    worst = std::max(worst, e);
  }
  r.add_check("max relative L2 error", worst, "<", 1e-3);
  return r;
}

SweepResult partition_of_unity(const ExperimentConfig& cfg) {
  auto count = cfg.integer("samples", 100000);
  double lo = cfg.real("t_min_log2", -16), hi = cfg.real("t_max_log2", 16);
  auto range = cfg.integer("l_range", 40);
  cfg.reject_unused();
  if (count < 2 || !(hi > lo)) throw ConfigError("need samples >= 2 and t_max_log2 > t_min_log2");
  std::vector<double> err(static_cast<std::size_t>(count));
  parallel_for(err.size(), [&](std::size_t i) {
    double t = std::exp2(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1)), s = 0;
    for (long long l = -range; l <= range; ++l) s += psi(static_cast<double>(l), t);
    err[i] = std::abs(s - 1);
  });
  double worst = max_of(err);
  SweepResult r;
  r.experiment = "partition-of-unity";
  r.columns = {"samples", "t_min_log2", "t_max_log2", "l_range", "max_error"};
  r.add_row({count, lo, hi, range, worst});
  r.add_check("max error", worst, "<", 1e-12);
  return r;
}

using Runner = SweepResult (*)(const ExperimentConfig&);

const std::vector<std::pair<std::string, Runner>>& registry() {
  static const std::vector<std::pair<std::string, Runner>> r{
      {"max-norm-stability", [](const ExperimentConfig& c) { return library_study(c, "max-norm-stability", LibraryOperator::maximal); }},
      {"ht-one-variable", [](const ExperimentConfig& c) { return library_study(c, "ht-one-variable", LibraryOperator::hilbert); }},
      {"single-annulus-measurable",
       [](const ExperimentConfig& c) { return library_study(c, "single-annulus-measurable", LibraryOperator::hilbert_single_annulus); }},
      {"sharpness-ball", sharpness_ball},
      {"shifted-max-growth", shifted_max_growth},
      {"lemma21-decay", lemma21_decay},
      {"annulus-decay-1d", annulus_decay},
      {"multiplier-sum", multiplier_sum},
      {"local-smoothing", local_smoothing},
      {"decoupling", decoupling_experiment},
      {"bilinear", bilinear_experiment},
      {"carleson-sup", carleson_experiment},
      {"rectangle-domination", rectangle_domination},
      {"dyadic-max-stability", dyadic_max_stability},
      {"vdc-baseline", vdc_experiment},
      {"commutation", commutation},
      {"hilbert-classical", hilbert_classical},
      {"partition-of-unity", partition_of_unity},
  };
  return r;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [n, f] : registry()) v.push_back(n);
    return v;
  }();
  return names;
}

SweepResult run_experiment(const ExperimentConfig& config) {
  auto name = config.text("experiment", "");
  for (const auto& [n, run] : registry())
    if (n == name) {
      // Harness keys every experiment accepts.
      config.text("out", "");
      config.text("tag", "");
      config.seed();
      if (!(config.real("memory_cap_gib", 8.0) > 0)) throw ConfigError("memory_cap_gib must be positive");
      return run(config);
    }
  throw ConfigError("unknown experiment '" + name + "'");
}

}  // namespace curvelab
