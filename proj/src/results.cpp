#include "stochhom/results.hpp"

#include <sstream>

#include "stochhom/io.hpp"

namespace stochhom {

std::string homogenization_csv(const Homogenization& h, const PhaseTable& phases) {
  std::ostringstream os;
  os << "# stochhom-homogenization v1\n";
  os << "# c_hom in the Mandel basis (11, 22, 33, sqrt2*23, sqrt2*13, sqrt2*12); symmetric, upper triangle listed\n";
  os << "kind,name,value\n";
  for (int i = 0; i < 6; ++i)
    for (int j = i; j < 6; ++j)
      os << "c_hom,C" << i + 1 << j + 1 << ',' << format_double(h.c_hom(i, j)) << '\n';
  const auto iso = isotropic_projection(h.c_hom);
  os << "moduli,bulk," << format_double(iso.bulk) << '\n';
  os << "moduli,shear," << format_double(iso.shear) << '\n';
  if (!phases.empty()) {
    os << "moduli,bulk_normalized," << format_double(iso.bulk / phases[0].bulk()) << '\n';
    os << "moduli,shear_normalized," << format_double(iso.shear / phases[0].mu) << '\n';
  }
  os << "moduli,anisotropy_index," << format_double(iso.anisotropy_index) << '\n';
  os << "moduli,max_asymmetry," << format_double(h.max_asymmetry) << '\n';
  for (std::size_t k = 0; k < h.reports.size(); ++k) {
    const auto& r = h.reports[k];
    const std::string kind = "load_case_" + std::to_string(k + 1);
    os << kind << ",iterations," << r.iterations << '\n';
    os << kind << ",eps_eq," << format_double(r.eps_eq) << '\n';
    os << kind << ",eps_comp," << format_double(r.eps_comp) << '\n';
  }
  return os.str();
}

std::string trace_csv(const std::vector<TraceRow>& rows) {
  std::ostringstream os;
  os << "# stochhom-trace v1\n";
  os << "load_case,iteration,eps_comp,eps_eq\n";
  for (const auto& r : rows) {
    os << r.load_case << ',' << r.iteration << ',' << format_double(r.eps_comp) << ',';
    if (r.eps_eq >= 0.0) os << format_double(r.eps_eq);
    os << '\n';
  }
  return os.str();
}

}  // namespace stochhom
