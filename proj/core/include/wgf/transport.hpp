#pragma once

#include <vector>

#include "wgf/errors.hpp"

namespace wgf {

/// Equal-weight empirical measure on the real line.
struct EmpiricalMeasure1D {
  std::vector<double> samples;
};

/// W2 between equal-count empirical measures via the sorted-quantile
/// coupling: sqrt of the mean squared difference of sorted samples.
double wasserstein2_1d(const EmpiricalMeasure1D& mu, const EmpiricalMeasure1D& nu);

}  // namespace wgf
