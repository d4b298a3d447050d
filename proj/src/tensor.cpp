#include "cilfair/tensor.hpp"

#include <cmath>

namespace cilfair {

bool Tensor2::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void require_finite(const Tensor2& t, const char* what) {
  if (!t.all_finite()) {
    throw InputError(std::string(what) + ": non-finite value");
  }
}

void require_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw InputError(std::string(what) + ": non-finite value");
    }
  }
}

}  // namespace cilfair
