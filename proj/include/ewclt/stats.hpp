#pragma once

#include <boost/math/special_functions/gamma.hpp>

#include <cstdint>
#include <vector>

#include "ewclt/errors.hpp"

namespace ewclt {

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  int cells = 0; // after pooling
};

// Pearson goodness of fit. Cells with expected count below min_expected are
// pooled (in the given order) until each pooled cell reaches it.
inline ChiSquareResult chi_square_test(const std::vector<std::uint64_t> &observed,
                                       const std::vector<double> &probabilities,
                                       double min_expected = 5.0) {
  if (observed.size() != probabilities.size() || observed.empty()) {
    throw invalid_argument("chi-square needs matching nonempty cells");
  }
  double total = 0.0;
  for (const auto o : observed) {
    total += static_cast<double>(o);
  }
  std::vector<double> obs, expct;
  double o_acc = 0.0, e_acc = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    o_acc += static_cast<double>(observed[i]);
    e_acc += probabilities[i] * total;
    if (e_acc >= min_expected) {
      obs.push_back(o_acc);
      expct.push_back(e_acc);
      o_acc = e_acc = 0.0;
    }
  }
  if (e_acc > 0.0 || o_acc > 0.0) {
    if (expct.empty()) {
      obs.push_back(o_acc);
      expct.push_back(e_acc);
    } else {
      obs.back() += o_acc;
      expct.back() += e_acc;
    }
  }
  ChiSquareResult r;
  r.cells = static_cast<int>(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const double d = obs[i] - expct[i];
    r.statistic += d * d / expct[i];
  }
  r.dof = r.cells - 1;
  r.p_value = r.dof > 0 ? boost::math::gamma_q(0.5 * r.dof, 0.5 * r.statistic) : 1.0;
  return r;
}

} // namespace ewclt
