#include "vwave/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace vwave {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string line_prefix(int line) { return "line " + std::to_string(line) + ": "; }

double parse_double(const std::string& v, const std::string& key, int line) {
  double out = 0.0;
  const char* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || v.empty())
    throw ConfigError(line_prefix(line) + "malformed number for '" + key + "': '" + v + "'");
  return out;
}

template <typename Int>
Int parse_int(const std::string& v, const std::string& key, int line) {
  Int out = 0;
  const char* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || v.empty())
    throw ConfigError(line_prefix(line) + "malformed integer for '" + key + "': '" + v + "'");
  return out;
}

struct Section {
  std::string kind;  // "", "vortex" or "patch"
  int line = 0;
  std::map<std::string, std::pair<std::string, int>> values;
};

const std::set<std::string> kGlobalKeys = {"dt",          "horizon",      "blob_sigma", "mollifier_eps",
                                           "kernel_delta", "treecode_theta", "collision_stop_rho",
                                           "mode",        "picard_iters", "picard_tol", "diag_stride",
                                           "seed",        "support_radius", "particle_density"};
const std::set<std::string> kVortexKeys = {"h0x", "h0y", "l0x", "l0y", "mass", "gamma"};
const std::set<std::string> kPatchKeys = {"cx", "cy", "radius", "level"};

const std::vector<std::string> kGlobalRequired = {"dt", "horizon"};
const std::vector<std::string> kVortexRequired = {"h0x", "h0y", "gamma", "mass"};
const std::vector<std::string> kPatchRequired = {"cx", "cy", "radius", "level"};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

void check_written(const std::ofstream& out, const std::filesystem::path& path) {
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

RunSpec parse_config_text(const std::string& text) {
  std::vector<Section> sections(1);
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s == "[vortex]" || s == "[patch]") {
        sections.push_back({s.substr(1, s.size() - 2), line, {}});
        continue;
      }
      throw ConfigError(line_prefix(line) + "unknown section " + s);
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(line_prefix(line) + "expected 'key = value'");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    Section& sec = sections.back();
    const auto& allowed = sec.kind.empty() ? kGlobalKeys : sec.kind == "vortex" ? kVortexKeys : kPatchKeys;
    if (!allowed.count(key)) {
      if (!sec.kind.empty() && kGlobalKeys.count(key))
        throw ConfigError(line_prefix(line) + "global key '" + key + "' must precede the first section");
      throw ConfigError(line_prefix(line) + "unknown key '" + key + "'" +
                        (sec.kind.empty() ? "" : " in [" + sec.kind + "]"));
    }
    if (sec.values.count(key)) throw ConfigError(line_prefix(line) + "duplicate key '" + key + "'");
    sec.values[key] = {value, line};
  }

  std::vector<std::string> missing;
  int nv = 0;
  int np = 0;
  for (const auto& sec : sections) {
    const auto& req = sec.kind.empty() ? kGlobalRequired : sec.kind == "vortex" ? kVortexRequired : kPatchRequired;
    const std::string where = sec.kind.empty() ? "" : sec.kind + " " + std::to_string(sec.kind == "vortex" ? ++nv : ++np) + ": ";
    for (const auto& k : req)
      if (!sec.values.count(k)) missing.push_back(where + k);
  }
  if (!missing.empty()) {
    std::string msg = "missing required keys: ";
    for (std::size_t i = 0; i < missing.size(); ++i) msg += (i ? ", " : "") + missing[i];
    throw ConfigError(msg);
  }

  RunSpec spec;
  SimConfig& c = spec.cfg;
  bool have_support = false;
  for (const auto& [key, vl] : sections.front().values) {
    const auto& [v, ln] = vl;
    if (key == "dt") c.dt = parse_double(v, key, ln);
    else if (key == "horizon") c.horizon = parse_double(v, key, ln);
    else if (key == "blob_sigma") c.blob_sigma = parse_double(v, key, ln);
    else if (key == "mollifier_eps") c.mollifier_eps = parse_double(v, key, ln);
    else if (key == "kernel_delta") c.kernel_delta = parse_double(v, key, ln);
    else if (key == "treecode_theta") c.treecode_theta = parse_double(v, key, ln);
    else if (key == "collision_stop_rho") c.collision_stop_rho = parse_double(v, key, ln);
    else if (key == "picard_tol") c.picard_tol = parse_double(v, key, ln);
    else if (key == "particle_density") c.particle_density = parse_double(v, key, ln);
    else if (key == "picard_iters") c.picard_iters = parse_int<int>(v, key, ln);
    else if (key == "diag_stride") c.diag_stride = parse_int<int>(v, key, ln);
    else if (key == "seed") c.seed = parse_int<std::uint64_t>(v, key, ln);
    else if (key == "support_radius") {
      spec.init.support_radius = parse_double(v, key, ln);
      have_support = true;
    } else if (key == "mode") {
      try {
        c.mode = mode_from_string(v);
      } catch (const ConfigError& e) {
        throw ConfigError(line_prefix(ln) + e.what());
      }
    }
  }
  for (std::size_t s = 1; s < sections.size(); ++s) {
    const auto& sec = sections[s];
    auto num = [&](const char* k, double fallback) {
      const auto it = sec.values.find(k);
      return it == sec.values.end() ? fallback : parse_double(it->second.first, k, it->second.second);
    };
    if (sec.kind == "vortex") {
      VortexInit v;
      v.h0 = Vec2(num("h0x", 0), num("h0y", 0));
      v.l0 = Vec2(num("l0x", 0), num("l0y", 0));
      v.mass = num("mass", 0);
      v.gamma = num("gamma", 0);
      spec.init.vortices.push_back(v);
    } else {
      Patch p;
      p.center = Vec2(num("cx", 0), num("cy", 0));
      p.radius = num("radius", 0);
      p.level = num("level", 0);
      spec.init.patches.push_back(p);
    }
  }
  if (!have_support) {
    // smallest admissible radius, at least 1
    double r = 1.0;
    for (const auto& p : spec.init.patches) r = std::max(r, p.center.norm() + p.radius);
    spec.init.support_radius = r;
  }
  c.validate();
  spec.init.validate();
  return spec;
}

RunSpec parse_config(const std::filesystem::path& path) { return parse_config_text(read_file(path)); }

std::string format_config(const RunSpec& spec) {
  const SimConfig& c = spec.cfg;
  std::ostringstream os;
  os << "dt = " << format_number(c.dt) << "\n"
     << "horizon = " << format_number(c.horizon) << "\n"
     << "blob_sigma = " << format_number(c.blob_sigma) << "\n"
     << "mollifier_eps = " << format_number(c.mollifier_eps) << "\n"
     << "kernel_delta = " << format_number(c.kernel_delta) << "\n"
     << "treecode_theta = " << format_number(c.treecode_theta) << "\n"
     << "collision_stop_rho = " << format_number(c.collision_stop_rho) << "\n"
     << "mode = " << to_string(c.mode) << "\n"
     << "picard_iters = " << c.picard_iters << "\n"
     << "picard_tol = " << format_number(c.picard_tol) << "\n"
     << "diag_stride = " << c.diag_stride << "\n"
     << "seed = " << c.seed << "\n"
     << "support_radius = " << format_number(spec.init.support_radius) << "\n"
     << "particle_density = " << format_number(c.particle_density) << "\n";
  for (const auto& v : spec.init.vortices) {
    os << "\n[vortex]\n"
       << "h0x = " << format_number(v.h0.x()) << "\n"
       << "h0y = " << format_number(v.h0.y()) << "\n"
       << "l0x = " << format_number(v.l0.x()) << "\n"
       << "l0y = " << format_number(v.l0.y()) << "\n"
       << "mass = " << format_number(v.mass) << "\n"
       << "gamma = " << format_number(v.gamma) << "\n";
  }
  for (const auto& p : spec.init.patches) {
    os << "\n[patch]\n"
       << "cx = " << format_number(p.center.x()) << "\n"
       << "cy = " << format_number(p.center.y()) << "\n"
       << "radius = " << format_number(p.radius) << "\n"
       << "level = " << format_number(p.level) << "\n";
  }
  return os.str();
}

std::string trajectory_header(std::size_t n) {
  std::string h = "t";
  for (std::size_t k = 1; k <= n; ++k) {
    const std::string s = std::to_string(k);
    h += ",hx_" + s + ",hy_" + s + ",vx_" + s + ",vy_" + s;
  }
  return h;
}

std::string trajectory_line(const TrajectoryRow& row) {
  std::string l = format_number(row.t);
  for (const auto& v : row.vortices) {
    l += "," + format_number(v.h.x()) + "," + format_number(v.h.y());
    l += "," + format_number(v.hdot.x()) + "," + format_number(v.hdot.y());
  }
  return l;
}

std::string diagnostics_header(std::size_t n) {
  std::string h = "t,H0,I0,Hn,minVortexDist,minParticleVortexDist,supportRadius,L1,L2,Linf,D";
  for (std::size_t k = 1; k <= n; ++k) h += ",Fk_mean_" + std::to_string(k);
  return h;
}

std::string diagnostics_line(const DiagnosticsRecord& r) {
  auto lp = [&](double p) {
    for (const auto& v : r.Lp)
      if (v.p == p) return format_number(v.value);
    return std::string();
  };
  std::string l = format_number(r.t) + "," + format_number(r.H0) + "," + format_number(r.I0) + "," +
                  format_number(r.Hn) + "," + format_number(r.min_vortex_dist) + "," +
                  format_number(r.min_particle_vortex_dist) + "," + format_number(r.support_radius) + "," + lp(1.0) +
                  "," + lp(2.0) + "," + lp(std::numeric_limits<double>::infinity()) + "," +
                  (r.D ? format_number(*r.D) : "");
  for (const double f : r.Fk) l += "," + format_number(f);
  return l;
}

void write_trajectories(const std::filesystem::path& path, std::size_t n, const std::vector<TrajectoryRow>& rows) {
  auto out = open_output(path);
  out << trajectory_header(n) << "\n";
  for (const auto& r : rows) out << trajectory_line(r) << "\n";
  check_written(out, path);
}

void write_diagnostics(const std::filesystem::path& path, std::size_t n, const std::vector<DiagnosticsRecord>& rows) {
  auto out = open_output(path);
  out << diagnostics_header(n) << "\n";
  for (const auto& r : rows) out << diagnostics_line(r) << "\n";
  check_written(out, path);
}

std::vector<TrajectoryRow> read_trajectories(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(path.string() + ": missing header");
  const auto cols = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  if (trim(line).rfind("t", 0) != 0 || (cols - 1) % 4 != 0) throw Error(path.string() + ": unexpected header");
  const std::size_t nv = (cols - 1) / 4;
  std::vector<TrajectoryRow> rows;
  int ln = 1;
  while (std::getline(in, line)) {
    ++ln;
    if (trim(line).empty()) continue;
    std::vector<double> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      const std::string c = trim(cell);
      if (c == "inf") f.push_back(std::numeric_limits<double>::infinity());
      else if (c == "-inf") f.push_back(-std::numeric_limits<double>::infinity());
      else if (c.empty()) f.push_back(std::numeric_limits<double>::quiet_NaN());
      else {
        double v = 0.0;
        const auto [p, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
        if (ec != std::errc() || p != c.data() + c.size())
          throw Error(path.string() + ":" + std::to_string(ln) + ": malformed number '" + c + "'");
        f.push_back(v);
      }
    }
    if (f.size() != cols) throw Error(path.string() + ":" + std::to_string(ln) + ": wrong column count");
    TrajectoryRow r;
    r.t = f[0];
    r.vortices.resize(nv);
    for (std::size_t k = 0; k < nv; ++k) {
      r.vortices[k].h = Vec2(f[1 + 4 * k], f[2 + 4 * k]);
      r.vortices[k].hdot = Vec2(f[3 + 4 * k], f[4 + 4 * k]);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string termination_label(Termination t, double failure_time) {
  if (t == Termination::completed) return "completed";
  return to_string(t) + "(t=" + format_number(failure_time) + ")";
}

void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
  auto out = open_output(path);
  out << "version: " << m.version << "\n"
      << "start: " << m.start_time << "\n"
      << "end: " << m.end_time << "\n"
      << "termination: " << termination_label(m.termination, m.failure_time) << "\n";
  if (!m.message.empty()) out << "message: " << m.message << "\n";
  out << "steps: " << m.steps << "\n";
  out << "outputs:";
  for (const auto& o : m.outputs) out << " " << o;
  out << "\n\n[config]\n" << m.config_echo;
  check_written(out, path);
}

namespace {

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

struct Frame {
  double x0, x1, y0, y1;
  double W = 640, H = 480, pad = 50;
  double px(double x) const { return pad + (x - x0) / (x1 - x0) * (W - 2 * pad); }
  double py(double y) const { return H - pad - (y - y0) / (y1 - y0) * (H - 2 * pad); }
};

void widen(double& lo, double& hi) {
  if (!(hi > lo)) {
    const double c = std::isfinite(lo) ? lo : 0.0;
    lo = c - 1.0;
    hi = c + 1.0;
    return;
  }
  const double m = 0.05 * (hi - lo);
  lo -= m;
  hi += m;
}

void svg_open(std::ofstream& out, const Frame& f, const std::string& title, const std::string& xl, const std::string& yl) {
  char buf[256];
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.W << "\" height=\"" << f.H << "\" viewBox=\"0 0 "
      << f.W << " " << f.H << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << f.W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  std::snprintf(buf, sizeof buf,
                "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" stroke=\"black\"/>\n", f.pad, f.pad,
                f.W - 2 * f.pad, f.H - 2 * f.pad);
  out << buf;
  std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\">%.4g</text>\n<text x=\"%g\" y=\"%g\" text-anchor=\"end\">%.4g</text>\n",
                f.pad, f.H - f.pad + 15, f.x0, f.W - f.pad, f.H - f.pad + 15, f.x1);
  out << buf;
  std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" text-anchor=\"end\">%.4g</text>\n<text x=\"%g\" y=\"%g\" text-anchor=\"end\">%.4g</text>\n",
                f.pad - 4, f.H - f.pad, f.y0, f.pad - 4, f.pad + 10, f.y1);
  out << buf;
  out << "<text x=\"" << f.W / 2 << "\" y=\"" << f.H - 12 << "\" text-anchor=\"middle\">" << xl << "</text>\n"
      << "<text x=\"14\" y=\"" << f.H / 2 << "\" transform=\"rotate(-90 14 " << f.H / 2
      << ")\" text-anchor=\"middle\">" << yl << "</text>\n";
}

void polyline(std::ofstream& out, const Frame& f, const std::vector<std::pair<double, double>>& pts, const char* color) {
  out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
  char buf[64];
  for (const auto& [x, y] : pts) {
    if (!std::isfinite(x) || !std::isfinite(y)) continue;
    std::snprintf(buf, sizeof buf, "%.2f,%.2f ", f.px(x), f.py(y));
    out << buf;
  }
  out << "\"/>\n";
}

}  // namespace

void write_trajectory_svg(const std::filesystem::path& path, const std::vector<TrajectoryRow>& rows) {
  Frame f{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  f.W = 560;
  f.H = 560;
  const std::size_t nv = rows.empty() ? 0 : rows.front().vortices.size();
  for (const auto& r : rows)
    for (const auto& v : r.vortices) {
      f.x0 = std::min(f.x0, v.h.x());
      f.x1 = std::max(f.x1, v.h.x());
      f.y0 = std::min(f.y0, v.h.y());
      f.y1 = std::max(f.y1, v.h.y());
    }
  // equal aspect
  const double span = std::max(f.x1 - f.x0, f.y1 - f.y0);
  if (std::isfinite(span) && span > 0) {
    const double cx = 0.5 * (f.x0 + f.x1), cy = 0.5 * (f.y0 + f.y1);
    f.x0 = cx - span / 2;
    f.x1 = cx + span / 2;
    f.y0 = cy - span / 2;
    f.y1 = cy + span / 2;
  }
  widen(f.x0, f.x1);
  widen(f.y0, f.y1);
  auto out = open_output(path);
  svg_open(out, f, "Vortex trajectories", "x", "y");
  for (std::size_t k = 0; k < nv; ++k) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : rows) pts.emplace_back(r.vortices[k].h.x(), r.vortices[k].h.y());
    const char* col = kColors[k % 8];
    polyline(out, f, pts, col);
    out << "<circle cx=\"" << f.px(pts.front().first) << "\" cy=\"" << f.py(pts.front().second)
        << "\" r=\"3\" fill=\"" << col << "\"/>\n";
  }
  out << "</svg>\n";
  check_written(out, path);
}

void write_drift_svg(const std::filesystem::path& path, const std::vector<DiagnosticsRecord>& rows) {
  auto drift = [&](auto get) {
    std::vector<std::pair<double, double>> pts;
    if (rows.empty()) return pts;
    const double ref = get(rows.front());
    const double scale = std::abs(ref) > 0 ? std::abs(ref) : 1.0;
    for (const auto& r : rows) pts.emplace_back(r.t, (get(r) - ref) / scale);
    return pts;
  };
  const auto h = drift([](const DiagnosticsRecord& r) { return r.H0; });
  const auto i = drift([](const DiagnosticsRecord& r) { return r.I0; });
  Frame f{0, 1, 0, 0};
  f.x0 = rows.empty() ? 0.0 : rows.front().t;
  f.x1 = rows.empty() ? 1.0 : rows.back().t;
  f.y0 = std::numeric_limits<double>::infinity();
  f.y1 = -f.y0;
  for (const auto* s : {&h, &i})
    for (const auto& [t, y] : *s)
      if (std::isfinite(y)) {
        f.y0 = std::min(f.y0, y);
        f.y1 = std::max(f.y1, y);
      }
  if (!(f.x1 > f.x0)) f.x1 = f.x0 + 1.0;
  widen(f.y0, f.y1);
  auto out = open_output(path);
  svg_open(out, f, "Relative drift of H0 and I0", "t", "drift");
  polyline(out, f, h, kColors[0]);
  polyline(out, f, i, kColors[1]);
  out << "<text x=\"" << f.W - f.pad - 60 << "\" y=\"" << f.pad + 15 << "\" fill=\"" << kColors[0] << "\">H0</text>\n"
      << "<text x=\"" << f.W - f.pad - 60 << "\" y=\"" << f.pad + 30 << "\" fill=\"" << kColors[1] << "\">I0</text>\n"
      << "</svg>\n";
  check_written(out, path);
}

const char* version_string() { return "vwave 0.1.0"; }

}  // namespace vwave
