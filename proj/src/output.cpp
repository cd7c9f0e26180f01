#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "curvelab/experiments.hpp"

namespace curvelab {

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

double relative_drift(const std::vector<double>& values) {
  require(!values.empty(), "no values");
  auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  require(*lo > 0, "drift needs positive values");
  return (*hi - *lo) / *lo;
}

void SweepResult::add_row(std::vector<Cell> row) {
  require(row.size() == columns.size(), "row width does not match the header");
  rows.push_back(std::move(row));
}

void SweepResult::add_check(const std::string& name, double value, const std::string& relation, double bound) {
  bool ok = false;
  if (relation == "<") ok = value < bound;
  else if (relation == "<=") ok = value <= bound;
  else if (relation == ">") ok = value > bound;
  else if (relation == ">=") ok = value >= bound;
  else throw Error("unknown relation " + relation);
  checks.push_back({name, value, relation, bound, ok});
}

bool SweepResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

std::string cell_text(const Cell& c) {
  if (auto i = std::get_if<long long>(&c)) return std::to_string(*i);
  if (auto d = std::get_if<double>(&c)) return format_real(*d);
  return csv_field(std::get<std::string>(c));
}

void write_file(const std::filesystem::path& path, const std::string& body) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw Error("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << body;
  out.flush();
  if (!out) throw Error("write failed for " + path.string());
}

std::string xml_escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    switch (c) {
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '&': o += "&amp;"; break;
      default: o += c;
    }
  }
  return o;
}

}  // namespace

std::string csv_text(const SweepResult& result) {
  std::string out;
  for (std::size_t i = 0; i < result.columns.size(); ++i) out += (i ? "," : "") + csv_field(result.columns[i]);
  out += "\n";
  for (const auto& row : result.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + cell_text(row[i]);
    out += "\n";
  }
  return out;
}

// Log-log scatter of the plot points with the fitted line when present.
std::string svg_text(const SweepResult& result) {
  const double width = 640, height = 420, left = 70, right = 20, top = 40, bottom = 60;
  std::vector<std::pair<double, double>> pts;
  for (auto [x, y] : result.plot_points)
    if (x > 0 && y > 0 && std::isfinite(x) && std::isfinite(y)) pts.emplace_back(std::log2(x), std::log2(y));
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
    << xml_escape(result.experiment) << "</text>\n";
  if (pts.empty()) {
    s << "<text x=\"" << width / 2 << "\" y=\"" << height / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">no positive data</text>\n</svg>\n";
    return s.str();
  }
  double x0 = pts[0].first, x1 = x0, y0 = pts[0].second, y1 = y0;
  for (auto [x, y] : pts) {
    x0 = std::min(x0, x), x1 = std::max(x1, x), y0 = std::min(y0, y), y1 = std::max(y1, y);
  }
  if (result.fit) {
    for (double x : {x0, x1}) {
      double y = result.fit->intercept + result.fit->slope * x;
      y0 = std::min(y0, y), y1 = std::max(y1, y);
    }
  }
  if (x1 - x0 < 1e-9) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-9) y0 -= 0.5, y1 += 0.5;
  double pad_x = 0.05 * (x1 - x0), pad_y = 0.08 * (y1 - y0);
  x0 -= pad_x, x1 += pad_x, y0 -= pad_y, y1 += pad_y;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * (width - left - right); };
  auto py = [&](double y) { return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom); };
  auto num = [](double v) { return format_real(std::round(v * 100) / 100); };

  s << "<g stroke=\"black\" stroke-width=\"1\">\n";
  s << "<line x1=\"" << left << "\" y1=\"" << height - bottom << "\" x2=\"" << width - right << "\" y2=\""
    << height - bottom << "\"/>\n";
  s << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << height - bottom << "\"/>\n";
  s << "</g>\n<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int i = 0; i <= 4; ++i) {
    double xv = x0 + (x1 - x0) * i / 4, yv = y0 + (y1 - y0) * i / 4;
    s << "<text x=\"" << num(px(xv)) << "\" y=\"" << height - bottom + 16 << "\" text-anchor=\"middle\">"
      << num(xv) << "</text>\n";
    s << "<text x=\"" << left - 6 << "\" y=\"" << num(py(yv) + 4) << "\" text-anchor=\"end\">" << num(yv)
      << "</text>\n";
  }
  s << "<text x=\"" << (left + width - right) / 2 << "\" y=\"" << height - 18
    << "\" text-anchor=\"middle\">log2 " << xml_escape(result.x_label) << "</text>\n";
  s << "<text x=\"16\" y=\"" << (top + height - bottom) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << (top + height - bottom) / 2 << ")\">log2 " << xml_escape(result.y_label) << "</text>\n</g>\n";
  if (result.fit) {
    double a = x0 + pad_x, b = x1 - pad_x;
    s << "<line x1=\"" << num(px(a)) << "\" y1=\"" << num(py(result.fit->intercept + result.fit->slope * a))
      << "\" x2=\"" << num(px(b)) << "\" y2=\"" << num(py(result.fit->intercept + result.fit->slope * b))
      << "\" stroke=\"#c0392b\" stroke-width=\"1.5\"/>\n";
    s << "<text x=\"" << width - right << "\" y=\"" << top << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
      << "font-size=\"12\" fill=\"#c0392b\">slope " << format_real(std::round(result.fit->slope * 1e4) / 1e4)
      << ", R2 " << format_real(std::round(result.fit->r_squared * 1e4) / 1e4) << "</text>\n";
  }
  s << "<g fill=\"#2c3e50\">\n";
  for (auto [x, y] : pts) s << "<circle cx=\"" << num(px(x)) << "\" cy=\"" << num(py(y)) << "\" r=\"3.5\"/>\n";
  s << "</g>\n</svg>\n";
  return s.str();
}

std::string fit_json_text(const SweepResult& result) {
  nlohmann::ordered_json j;
  j["experiment"] = result.experiment;
  if (result.fit) {
    j["slope"] = result.fit->slope;
    j["intercept"] = result.fit->intercept;
    j["r_squared"] = result.fit->r_squared;
    j["x"] = result.x_label;
    j["y"] = result.y_label;
    auto pts = nlohmann::ordered_json::array();
    for (auto [a, v] : result.fit->points) pts.push_back({a, v});
    j["points"] = pts;
  } else {
    j["slope"] = nullptr;
    j["intercept"] = nullptr;
    j["r_squared"] = nullptr;
  }
  auto checks = nlohmann::ordered_json::array();
  for (const auto& c : result.checks) {
    nlohmann::ordered_json e;
    e["name"] = c.name;
    e["value"] = std::isfinite(c.value) ? nlohmann::ordered_json(c.value) : nlohmann::ordered_json(format_real(c.value));
    e["relation"] = c.relation;
    e["bound"] = c.bound;
    e["passed"] = c.passed;
    checks.push_back(e);
  }
  j["checks"] = checks;
  return j.dump(2) + "\n";
}

void emit_csv(const SweepResult& result, const std::filesystem::path& path) { write_file(path, csv_text(result)); }
void emit_plot(const SweepResult& result, const std::filesystem::path& path) { write_file(path, svg_text(result)); }
void emit_fit(const SweepResult& result, const std::filesystem::path& path) { write_file(path, fit_json_text(result)); }

}  // namespace curvelab
