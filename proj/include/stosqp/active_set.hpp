#pragma once

#include <vector>

#include "stosqp/types.hpp"

namespace stosqp {

/// Inequalities treated as equalities; `mask[i]` mirrors membership in `indices`.
struct ActiveSet {
  std::vector<int> indices;  // sorted
  std::vector<bool> mask;

  [[nodiscard]] bool contains(int i) const { return mask[static_cast<std::size_t>(i)]; }
  [[nodiscard]] int size() const { return static_cast<int>(indices.size()); }

  static ActiveSet from_mask(std::vector<bool> mask);
};

/// {i : g_i >= -eps_q lambda_i}; ties go to the active side.
ActiveSet identify_active_set(const Vec& g, const Vec& lambda, double eps_q);

}  // namespace stosqp
