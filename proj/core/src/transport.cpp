#include "wgf/transport.hpp"

#include <algorithm>
#include <cmath>

namespace wgf {

double wasserstein2_1d(const EmpiricalMeasure1D& mu, const EmpiricalMeasure1D& nu) {
  if (mu.samples.empty() || nu.samples.empty())
    throw DomainError("wasserstein2_1d: empty measure");
  if (mu.samples.size() != nu.samples.size())
    throw DomainError("wasserstein2_1d: sample counts differ");
  std::vector<double> a = mu.samples;
  std::vector<double> b = nu.samples;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(a.size()));
}

}  // namespace wgf
