#pragma once

#include "wornet/rng.hpp"
#include "wornet/tensor.hpp"

#include <cmath>
#include <cstring>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace wornet {

/// One forward/backward evaluation at the given parameter values.
struct LossAndGrads {
  double loss = 0.0;
  std::vector<TensorD> grads;  // one per parameter, same shapes
};

using LossModel = std::function<LossAndGrads(const std::vector<TensorD>&)>;

struct GradCheckOptions {
  double eps = 1e-4;
  double tol = 1e-4;
  /// Coordinates probed per tensor; <=0 probes every coordinate.
  int probes_per_tensor = -1;
  uint64_t seed = 7;
};

struct GradCheckResult {
  bool ok = true;
  double max_rel_err = 0.0;
  int probed = 0;
  std::string worst;
};

inline double rel_err(double a, double b) {
  // Below the resolving power of central differences at eps 1e-4 there is
  // nothing to compare; a dead coordinate reads as truncation noise.
  const double scale = std::abs(a) + std::abs(b);
  if (scale < 1e-6) return 0.0;
  return std::abs(a - b) / scale;
}

/// Central-difference audit of analytic gradients, in 64-bit. The model is
/// evaluated twice at the base point first; any bitwise difference in the loss
/// means hidden state or randomness, which would invalidate the comparison.
inline GradCheckResult finite_diff_check(const LossModel& model, std::vector<TensorD> params,
                                         const GradCheckOptions& opt = {}) {
  LossAndGrads base = model(params);
  {
    LossAndGrads again = model(params);
    check(std::memcmp(&base.loss, &again.loss, sizeof(double)) == 0,
          "finite_diff_check: model is not deterministic at the base point");
  }
  check(std::isfinite(base.loss), "finite_diff_check: non-finite loss");
  check(base.grads.size() == params.size(),
        "finite_diff_check: gradient count does not match parameter count");
  for (size_t i = 0; i < params.size(); ++i)
    check_same_shape(base.grads[i], params[i], "finite_diff_check");

  GradCheckResult result;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    const Eigen::Index n = params[pi].numel();
    std::set<Eigen::Index> coords;
    if (opt.probes_per_tensor <= 0 || n <= opt.probes_per_tensor) {
      for (Eigen::Index i = 0; i < n; ++i) coords.insert(i);
    } else {
      Rng rng = Rng::derive(opt.seed, static_cast<uint64_t>(pi));
      while (static_cast<int>(coords.size()) < opt.probes_per_tensor)
        coords.insert(static_cast<Eigen::Index>(rng.uniform_int(0, static_cast<long>(n - 1))));
    }
    for (Eigen::Index i : coords) {
      const double saved = params[pi].data[i];
      params[pi].data[i] = saved + opt.eps;
      const double up = model(params).loss;
      params[pi].data[i] = saved - opt.eps;
      const double down = model(params).loss;
      params[pi].data[i] = saved;
      check(std::isfinite(up) && std::isfinite(down), "finite_diff_check: non-finite probe loss");
      const double numeric = (up - down) / (2.0 * opt.eps);
      const double analytic = base.grads[pi].data[i];
      const double err = rel_err(analytic, numeric);
      ++result.probed;
      if (err > result.max_rel_err) {
        result.max_rel_err = err;
        std::ostringstream os;
        os << "param " << pi << " coord " << i << ": analytic " << analytic << " vs numeric "
           << numeric;
        result.worst = os.str();
      }
      if (err > opt.tol) result.ok = false;
    }
  }
  return result;
}

}  // namespace wornet
