#include "stochhom/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "stochhom/error.hpp"
#include "stochhom/io.hpp"

namespace stochhom {

namespace {

using Tokens = std::vector<std::string>;

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorKind::ConfigError, msg); }

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double to_double(const std::string& key, const std::string& s) {
  double v = 0.0;
  try {
    v = parse_double(s);
  } catch (const Error&) {
    config_error(key + ": expected a number, got '" + s + "'");
  }
  if (!std::isfinite(v)) config_error(key + ": value must be finite");
  return v;
}

long long to_integer(const std::string& key, const std::string& s) {
  try {
    return parse_integer(s);
  } catch (const Error&) {
    config_error(key + ": expected an integer, got '" + s + "'");
  }
}

int to_int(const std::string& key, const std::string& s) {
  long long v = to_integer(key, s);
  if (v < INT32_MIN || v > INT32_MAX) config_error(key + ": integer out of range");
  return static_cast<int>(v);
}

const std::string& scalar(const std::string& key, const Tokens& t) {
  if (t.size() != 1) config_error(key + ": expected a single value");
  return t.front();
}

template <class T>
std::string join(const std::vector<T>& v) {
  auto one = [](const T& x) {
    if constexpr (std::is_floating_point_v<T>)
      return format_double(x);
    else
      return std::to_string(x);
  };
  if (v.size() == 1) return one(v.front());
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + one(v[i]);
  return out + "]";
}

struct Field {
  std::function<void(CampaignConfig&, const std::string&, const Tokens&)> set;
  std::function<std::string(const CampaignConfig&)> get;
};

template <class T>
Field axis_field(std::vector<T> SweepAxes::*member) {
  return {[member](CampaignConfig& c, const std::string& key, const Tokens& t) {
            std::vector<T> v;
            for (const auto& s : t) {
              if constexpr (std::is_floating_point_v<T>)
                v.push_back(to_double(key, s));
              else
                v.push_back(to_int(key, s));
            }
            c.axes.*member = std::move(v);
          },
          [member](const CampaignConfig& c) { return join(c.axes.*member); }};
}

Field double_field(std::function<double&(CampaignConfig&)> ref) {
  return {[ref](CampaignConfig& c, const std::string& key, const Tokens& t) { ref(c) = to_double(key, scalar(key, t)); },
          [ref](const CampaignConfig& c) { return format_double(ref(const_cast<CampaignConfig&>(c))); }};
}

template <class I>
Field int_field(std::function<I&(CampaignConfig&)> ref) {
  return {[ref](CampaignConfig& c, const std::string& key, const Tokens& t) {
            long long v = to_integer(key, scalar(key, t));
            if (v < std::numeric_limits<I>::min() || v > std::numeric_limits<I>::max())
              config_error(key + ": integer out of range");
            ref(c) = static_cast<I>(v);
          },
          [ref](const CampaignConfig& c) { return std::to_string(ref(const_cast<CampaignConfig&>(c))); }};
}

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = [] {
    std::map<std::string, Field> f;
    f["f_sp"] = axis_field(&SweepAxes::f_sp);
    f["f_cyl"] = axis_field(&SweepAxes::f_cyl);
    f["aspect_ratio"] = axis_field(&SweepAxes::aspect_ratio);
    f["n_sp"] = axis_field(&SweepAxes::n_sp);
    f["n_cyl"] = axis_field(&SweepAxes::n_cyl);
    f["contrast"] = axis_field(&SweepAxes::contrast);
    f["wave_amplitude"] = axis_field(&SweepAxes::wave_amplitude);
    f["defect_fraction"] = axis_field(&SweepAxes::defect_fraction);

    f["method"] = {[](CampaignConfig& c, const std::string& key, const Tokens& t) {
                     const auto& v = scalar(key, t);
                     if (v == "rsa")
                       c.method = GenerationMethod::RSA;
                     else if (v == "md")
                       c.method = GenerationMethod::MD;
                     else
                       config_error("method: expected rsa or md, got '" + v + "'");
                   },
                   [](const CampaignConfig& c) { return std::string(c.method == GenerationMethod::RSA ? "rsa" : "md"); }};
    f["moduli"] = {[](CampaignConfig& c, const std::string& key, const Tokens& t) {
                     const auto& v = scalar(key, t);
                     if (v == "full")
                       c.moduli = ModuliMode::Full;
                     else if (v == "bulk")
                       c.moduli = ModuliMode::Bulk;
                     else
                       config_error("moduli: expected full or bulk, got '" + v + "'");
                   },
                   [](const CampaignConfig& c) { return std::string(c.moduli == ModuliMode::Full ? "full" : "bulk"); }};
    f["supersample"] = {[](CampaignConfig& c, const std::string& key, const Tokens& t) {
                          const auto& v = scalar(key, t);
                          if (v != "true" && v != "false") config_error("supersample: expected true or false");
                          c.supersample = v == "true";
                        },
                        [](const CampaignConfig& c) { return std::string(c.supersample ? "true" : "false"); }};
    f["base_seed"] = {[](CampaignConfig& c, const std::string& key, const Tokens& t) {
                        const auto& v = scalar(key, t);
                        std::uint64_t seed = 0;
                        auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), seed);
                        if (ec != std::errc() || p != v.data() + v.size())
                          config_error("base_seed: expected an unsigned 64-bit integer");
                        c.base_seed = seed;
                      },
                      [](const CampaignConfig& c) { return std::to_string(c.base_seed); }};

    f["md_epsilon_stop"] = double_field([](CampaignConfig& c) -> double& { return c.md.epsilon_stop; });
    f["md_dt"] = double_field([](CampaignConfig& c) -> double& { return c.md.dt; });
    f["md_damping"] = double_field([](CampaignConfig& c) -> double& { return c.md.damping; });
    f["md_max_steps"] = int_field<int>([](CampaignConfig& c) -> int& { return c.md.max_steps; });
    f["rsa_max_attempts"] = int_field<long>([](CampaignConfig& c) -> long& { return c.rsa.max_attempts_per_inclusion; });
    f["wave_count"] = int_field<int>([](CampaignConfig& c) -> int& { return c.wave_count; });
    f["defect_zone_count"] = int_field<int>([](CampaignConfig& c) -> int& { return c.defect_zone_count; });
    f["matrix_young"] = double_field([](CampaignConfig& c) -> double& { return c.matrix_young; });
    f["matrix_poisson"] = double_field([](CampaignConfig& c) -> double& { return c.matrix_poisson; });
    f["resolution"] = int_field<int>([](CampaignConfig& c) -> int& { return c.resolution; });
    f["solver_acc"] = double_field([](CampaignConfig& c) -> double& { return c.solver_acc; });
    f["solver_max_iterations"] = int_field<int>([](CampaignConfig& c) -> int& { return c.solver_max_iterations; });
    f["samples_per_point"] = int_field<int>([](CampaignConfig& c) -> int& { return c.samples_per_point; });
    f["max_samples_per_point"] = int_field<int>([](CampaignConfig& c) -> int& { return c.max_samples_per_point; });
    f["escalation_threshold"] = double_field([](CampaignConfig& c) -> double& { return c.escalation_threshold; });
    f["confidence_level"] = double_field([](CampaignConfig& c) -> double& { return c.confidence_level; });
    f["workers"] = int_field<int>([](CampaignConfig& c) -> int& { return c.workers; });
    f["budget"] = int_field<long>([](CampaignConfig& c) -> long& { return c.budget; });
    return f;
  }();
  return table;
}

Tokens split_value(const std::string& key, std::string_view v) {
  Tokens out;
  if (v.empty()) config_error(key + ": missing value");
  if (v.front() == '[') {
    if (v.back() != ']') config_error(key + ": unterminated array");
    v = trim(v.substr(1, v.size() - 2));
    if (v.empty()) config_error(key + ": empty array");
    std::size_t start = 0;
    while (true) {
      std::size_t comma = v.find(',', start);
      auto item = trim(v.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      if (item.empty()) config_error(key + ": empty array element");
      out.emplace_back(item);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
  } else {
    if (v.find_first_of(" \t,[]") != std::string_view::npos) config_error(key + ": malformed value '" + std::string(v) + "'");
    out.emplace_back(v);
  }
  return out;
}

// Keys that only affect scheduling, not results.
const std::set<std::string>& scheduling_keys() {
  static const std::set<std::string> keys{"workers", "budget"};
  return keys;
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

template <class T>
void check_axis(const char* name, const std::vector<T>& v) {
  if (v.empty()) config_error(std::string(name) + ": sweep axis needs at least one value");
}

}  // namespace

bool CampaignConfig::operator==(const CampaignConfig& o) const { return serialize_config(*this) == serialize_config(o); }

void CampaignConfig::validate() const {
  check_axis("f_sp", axes.f_sp);
  check_axis("f_cyl", axes.f_cyl);
  check_axis("aspect_ratio", axes.aspect_ratio);
  check_axis("n_sp", axes.n_sp);
  check_axis("n_cyl", axes.n_cyl);
  check_axis("contrast", axes.contrast);
  check_axis("wave_amplitude", axes.wave_amplitude);
  check_axis("defect_fraction", axes.defect_fraction);
  for (double c : axes.contrast)
    if (!(c > 0.0)) config_error("contrast must be positive");
  if (!(matrix_young > 0.0) || !(matrix_poisson > -1.0 && matrix_poisson < 0.5))
    config_error("matrix_young must be positive and matrix_poisson in (-1, 0.5)");
  if (resolution < 8 || resolution > 1024) config_error("resolution must lie in [8, 1024]");
  if (!(solver_acc > 0.0) || solver_max_iterations < 1) config_error("solver_acc and solver_max_iterations must be positive");
  if (samples_per_point < 1 || samples_per_point > 100) config_error("samples_per_point must lie in [1, 100]");
  if (max_samples_per_point < samples_per_point || max_samples_per_point > 100)
    config_error("max_samples_per_point must lie in [samples_per_point, 100]");
  if (!(escalation_threshold >= 0.0)) config_error("escalation_threshold must be non-negative");
  if (!(confidence_level > 0.0 && confidence_level < 1.0)) config_error("confidence_level must lie in (0, 1)");
  if (workers < 1) config_error("workers must be at least 1");
  if (budget < 0) config_error("budget must be non-negative");
  try {
    md.validate();
    for (const auto& p : expand_grid(*this)) {
      GenerationSpec spec = generation_spec(*this, p, 0);
      spec.validate();
      imperfection_spec(*this, p).validate();
    }
  } catch (const Error& e) {
    config_error(e.what());
  }
  if (rsa.max_attempts_per_inclusion < 1) config_error("rsa_max_attempts must be positive");
}

CampaignConfig parse_config(std::string_view text) {
  CampaignConfig cfg;
  std::set<std::string> seen;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) config_error("line " + std::to_string(line_no) + ": expected key = value");
    std::string key(trim(line.substr(0, eq)));
    auto it = fields().find(key);
    if (it == fields().end()) config_error("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    if (!seen.insert(key).second) config_error("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    it->second.set(cfg, key, split_value(key, trim(line.substr(eq + 1))));
  }
  cfg.validate();
  return cfg;
}

CampaignConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::IoError, "cannot open config " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const CampaignConfig& cfg) {
  std::string out = "# stochhom config v1\n";
  for (const auto& [key, field] : fields()) out += key + " = " + field.get(cfg) + "\n";
  return out;
}

std::uint64_t config_hash(const CampaignConfig& cfg) { return fnv1a(serialize_config(cfg)); }

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<GridPoint> expand_grid(const CampaignConfig& cfg) {
  const auto& a = cfg.axes;
  std::vector<GridPoint> out;
  int index = 0;
  for (double f_sp : a.f_sp)
    for (double f_cyl : a.f_cyl)
      for (double aspect : a.aspect_ratio)
        for (int n_sp : a.n_sp)
          for (int n_cyl : a.n_cyl)
            for (double contrast : a.contrast)
              for (double amp : a.wave_amplitude)
                for (double defect : a.defect_fraction)
                  out.push_back({index++, f_sp, f_cyl, aspect, n_sp, n_cyl, contrast, amp, defect});
  return out;
}

std::vector<std::string> swept_axes(const CampaignConfig& cfg) {
  const auto& a = cfg.axes;
  std::vector<std::string> out;
  auto add = [&](const char* name, std::size_t n) {
    if (n > 1) out.emplace_back(name);
  };
  add("f_sp", a.f_sp.size());
  add("f_cyl", a.f_cyl.size());
  add("aspect_ratio", a.aspect_ratio.size());
  add("n_sp", a.n_sp.size());
  add("n_cyl", a.n_cyl.size());
  add("contrast", a.contrast.size());
  add("wave_amplitude", a.wave_amplitude.size());
  add("defect_fraction", a.defect_fraction.size());
  return out;
}

double axis_value(const GridPoint& p, std::string_view axis) {
  if (axis == "f_sp") return p.f_sp;
  if (axis == "f_cyl") return p.f_cyl;
  if (axis == "aspect_ratio") return p.aspect_ratio;
  if (axis == "n_sp") return p.n_sp;
  if (axis == "n_cyl") return p.n_cyl;
  if (axis == "contrast") return p.contrast;
  if (axis == "wave_amplitude") return p.wave_amplitude;
  if (axis == "defect_fraction") return p.defect_fraction;
  throw Error(ErrorKind::InvalidArgument, "unknown axis " + std::string(axis));
}

GenerationSpec generation_spec(const CampaignConfig& cfg, const GridPoint& p, std::uint64_t seed) {
  GenerationSpec s;
  s.f_sp = p.f_sp;
  s.f_cyl = p.f_cyl;
  s.n_sp = p.n_sp;
  s.n_cyl = p.n_cyl;
  s.aspect_ratio = p.aspect_ratio;
  s.rng_seed = seed;
  s.method = cfg.method;
  return s;
}

ImperfectionSpec imperfection_spec(const CampaignConfig& cfg, const GridPoint& p) {
  ImperfectionSpec s;
  s.wave_amplitude = p.wave_amplitude;
  s.wave_count = cfg.wave_count;
  s.defect_zone_fraction = p.defect_fraction;
  s.defect_zone_count = cfg.defect_zone_count;
  return s;
}

PhaseTable phase_table(const CampaignConfig& cfg, double contrast) {
  auto matrix = IsotropicMaterial::from_young_poisson(cfg.matrix_young, cfg.matrix_poisson);
  return {matrix, matrix.scaled(contrast)};
}

SolverConfig solver_config(const CampaignConfig& cfg) {
  SolverConfig s;
  s.acc = cfg.solver_acc;
  s.max_iterations = cfg.solver_max_iterations;
  return s;
}

std::uint64_t point_hash(const CampaignConfig& cfg, const GridPoint& p) {
  CampaignConfig c = cfg;
  c.axes.f_sp = {p.f_sp};
  c.axes.f_cyl = {p.f_cyl};
  c.axes.aspect_ratio = {p.aspect_ratio};
  c.axes.n_sp = {p.n_sp};
  c.axes.n_cyl = {p.n_cyl};
  c.axes.contrast = {p.contrast};
  c.axes.wave_amplitude = {p.wave_amplitude};
  c.axes.defect_fraction = {p.defect_fraction};
  std::string text = serialize_config(c);
  std::string filtered;
  std::istringstream is(text);
  for (std::string line; std::getline(is, line);) {
    auto key = std::string(trim(line.substr(0, line.find('='))));
    if (scheduling_keys().count(key) || key == "samples_per_point" || key == "max_samples_per_point" ||
        key == "escalation_threshold" || key == "confidence_level")
      continue;
    filtered += line + "\n";
  }
  return fnv1a(filtered + "point=" + std::to_string(p.index));
}

}  // namespace stochhom
