#include "cutform/dual.hpp"

namespace cutform {

std::vector<Dual1> seed(std::span<const double> values, std::size_t i) {
  if (i >= values.size()) throw InvalidArgument("seed index out of range");
  std::vector<Dual1> out(values.begin(), values.end());
  out[i].der = 1.0;
  return out;
}

std::vector<Dual2> seed2(std::span<const double> values, std::size_t i, std::size_t j) {
  if (i >= values.size() || j >= values.size()) throw InvalidArgument("seed index out of range");
  std::vector<Dual2> out(values.begin(), values.end());
  out[i].d1 = 1.0;
  out[j].d2 = 1.0;
  return out;
}

std::vector<double> primal(std::span<const Dual1> values) {
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& v : values) out.push_back(v.val);
  return out;
}

}  // namespace cutform
