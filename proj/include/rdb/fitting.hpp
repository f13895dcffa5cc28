#ifndef RDB_FITTING_HPP
#define RDB_FITTING_HPP

#include <string>
#include <vector>

#include "rdb/plaquette_basis.hpp"

namespace rdb {

enum class FitModel { Linear, PowerLog };

struct FitResult {
  FitModel model = FitModel::Linear;
  double a = 0.0, b = 0.0, c = 0.0;
  double da = 0.0, db = 0.0, dc = 0.0;
  double rss = 0.0;
};

/// Fit Y = log(rel_error) against X = log(dim). Linear: Y = a X + c.
/// PowerLog: Y = c - a X^b with b > 0, solved by an outer scan over b
/// (step 0.01 on [0.5, 5]) with an inner linear solve for (a, c), then
/// golden-section refinement of b. Uncertainties from the residual
/// covariance.
FitResult fit_scaling(const std::vector<std::pair<double, double>>& dim_error,
                      FitModel model);

std::string fit_result_to_json(const FitResult& fit);

}  // namespace rdb

#endif
