#pragma once

// Plain-text vector form of microstructures and locale-independent number
// formatting shared by the CSV writers.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "stochhom/geometry.hpp"

namespace stochhom {

// Shortest text that parses back to the same double (max 17 significant digits).
std::string format_double(double v);
double parse_double(std::string_view s);
long long parse_integer(std::string_view s);

// Header "stochhom-vector 1 <edge> <phases>", then one record per line:
//   S cx cy cz r
//   C cx cy cz ax ay az r h
//   W amplitude count drift
//   Z cx cy cz r           (defect zone)
//   F cx cy cz r           (compensating fragment)
//   R removed_volume
void write_microstructure(std::ostream& os, const Microstructure& m);
Microstructure read_microstructure(std::istream& is);

void save_microstructure(const Microstructure& m, const std::filesystem::path& path);
Microstructure load_microstructure(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it into place.
void write_file_atomically(const std::filesystem::path& path, std::string_view contents);

}  // namespace stochhom
