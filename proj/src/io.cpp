#include "stochhom/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include "stochhom/error.hpp"

namespace stochhom {

namespace {

constexpr std::string_view kVectorMagic = "stochhom-vector";
constexpr int kVectorVersion = 1;

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

[[noreturn]] void bad_format(int line_no, const std::string& what) {
  throw Error(ErrorKind::FormatError, "vector file line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw Error(ErrorKind::IoError, "number formatting failed");
  return std::string(buf, end);
}

double parse_double(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw Error(ErrorKind::FormatError, "not a number: '" + std::string(s) + "'");
  return v;
}

long long parse_integer(std::string_view s) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw Error(ErrorKind::FormatError, "not an integer: '" + std::string(s) + "'");
  return v;
}

void write_microstructure(std::ostream& os, const Microstructure& m) {
  auto f = format_double;
  os << kVectorMagic << ' ' << kVectorVersion << ' ' << f(m.cell.edge_length) << ' ' << m.phase_count << '\n';
  for (const auto& inc : m.inclusions) {
    if (inc.is_sphere()) {
      const auto& s = inc.sphere();
      os << "S " << f(s.center.x) << ' ' << f(s.center.y) << ' ' << f(s.center.z) << ' ' << f(s.radius) << '\n';
    } else {
      const auto& c = inc.cylinder();
      os << "C " << f(c.center.x) << ' ' << f(c.center.y) << ' ' << f(c.center.z) << ' ' << f(c.axis.x) << ' '
         << f(c.axis.y) << ' ' << f(c.axis.z) << ' ' << f(c.radius) << ' ' << f(c.half_length) << '\n';
    }
  }
  const auto& imp = m.imperfections;
  if (imp.waves.amplitude > 0.0 || imp.waves.count > 0)
    os << "W " << f(imp.waves.amplitude) << ' ' << imp.waves.count << ' ' << f(imp.waves.volume_drift) << '\n';
  for (const auto& z : imp.zones)
    os << "Z " << f(z.center.x) << ' ' << f(z.center.y) << ' ' << f(z.center.z) << ' ' << f(z.radius) << '\n';
  for (const auto& s : imp.fragments)
    os << "F " << f(s.center.x) << ' ' << f(s.center.y) << ' ' << f(s.center.z) << ' ' << f(s.radius) << '\n';
  if (!imp.zones.empty()) os << "R " << f(imp.removed_volume) << '\n';
}

Microstructure read_microstructure(std::istream& is) {
  Microstructure m;
  std::string line;
  int line_no = 0;
  if (!std::getline(is, line)) throw Error(ErrorKind::FormatError, "empty vector file");
  ++line_no;
  auto head = split_ws(line);
  if (head.size() != 4 || head[0] != kVectorMagic) bad_format(line_no, "missing stochhom-vector header");
  try {
    if (parse_integer(head[1]) != kVectorVersion) bad_format(line_no, "unsupported version");
    m.cell.edge_length = parse_double(head[2]);
    m.phase_count = static_cast<int>(parse_integer(head[3]));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::FormatError && std::string(e.what()).starts_with("vector file")) throw;
    bad_format(line_no, e.what());
  }
  if (!(m.cell.edge_length > 0.0) || m.phase_count < 2) bad_format(line_no, "bad cell size or phase count");

  while (std::getline(is, line)) {
    ++line_no;
    auto tok = split_ws(line);
    if (tok.empty() || tok[0].starts_with('#')) continue;
    auto num = [&](std::size_t i) {
      try {
        return parse_double(tok[i]);
      } catch (const Error& e) {
        bad_format(line_no, e.what());
      }
    };
    auto expect = [&](std::size_t n) {
      if (tok.size() != n) bad_format(line_no, "expected " + std::to_string(n - 1) + " fields");
    };
    const std::string_view kind = tok[0];
    if (kind == "S") {
      expect(5);
      Sphere s{{num(1), num(2), num(3)}, num(4)};
      if (!(s.radius > 0.0)) bad_format(line_no, "radius must be positive");
      m.inclusions.push_back({s, kInclusionPhase});
    } else if (kind == "C") {
      expect(9);
      Cylinder c{{num(1), num(2), num(3)}, {num(4), num(5), num(6)}, num(7), num(8)};
      if (!(c.radius > 0.0 && c.half_length > 0.0)) bad_format(line_no, "cylinder dimensions must be positive");
      if (std::abs(norm(c.axis) - 1.0) > 1e-12) bad_format(line_no, "cylinder axis must be a unit vector");
      m.inclusions.push_back({c, kInclusionPhase});
    } else if (kind == "W") {
      expect(4);
      m.imperfections.waves.amplitude = num(1);
      m.imperfections.waves.count = static_cast<int>(num(2));
      m.imperfections.waves.volume_drift = num(3);
    } else if (kind == "Z") {
      expect(5);
      m.imperfections.zones.push_back({{num(1), num(2), num(3)}, num(4)});
    } else if (kind == "F") {
      expect(5);
      m.imperfections.fragments.push_back({{num(1), num(2), num(3)}, num(4)});
    } else if (kind == "R") {
      expect(2);
      m.imperfections.removed_volume = num(1);
    } else {
      bad_format(line_no, "unknown record '" + std::string(kind) + "'");
    }
  }
  return m;
}

void write_file_atomically(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error(ErrorKind::IoError, "cannot open " + tmp.string() + " for writing");
    os.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!os) throw Error(ErrorKind::IoError, "failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot move " + tmp.string() + " into place: " + ec.message());
}

void save_microstructure(const Microstructure& m, const std::filesystem::path& path) {
  std::ostringstream os;
  write_microstructure(os, m);
  write_file_atomically(path, os.str());
}

Microstructure load_microstructure(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  return read_microstructure(is);
}

}  // namespace stochhom
