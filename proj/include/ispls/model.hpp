#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ispls/types.hpp"

namespace ispls {

// Z^(l) = X^(l)' Y^(l), one p x q cross-product per study.
std::vector<CrossProduct> build_cross_products(const MultiStudyData& data);

struct ZeroVarianceColumn {
  std::size_t study = 0;   // 0-based
  std::size_t column = 0;  // 0-based, X column
};

struct StandardizeResult {
  MultiStudyData data;
  std::vector<ZeroVarianceColumn> warnings;
};

// Per study, per column: subtract the mean (if center) and divide X columns by
// the sample standard deviation (if scale; divisor n-1). Y columns are only
// centered. Zero-variance X columns are left centered and reported.
StandardizeResult standardize(const MultiStudyData& data, bool center = true,
                              bool scale = true);

}  // namespace ispls
