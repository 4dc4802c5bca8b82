#include "gensep/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "gensep/errors.hpp"

namespace gensep {

Mat finite_diff_grad(const std::function<double(const Mat&)>& f, const Mat& x,
                     double h) {
  if (h <= 0.0) throw ConfigError("finite_diff_grad: h must be positive");
  Mat g(x.rows(), x.cols());
  Mat probe = x;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double orig = probe[k];
    probe[k] = orig + h;
    const double fp = f(probe);
    probe[k] = orig - h;
    const double fm = f(probe);
    probe[k] = orig;
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw NumericalError("finite_diff_grad: non-finite function value");
    }
    g[k] = (fp - fm) / (2.0 * h);
  }
  return g;
}

double grad_rel_error(const Mat& a, const Mat& b) {
  if (!a.same_shape(b)) throw DimensionError("grad_rel_error: shape mismatch");
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    diff += (a[k] - b[k]) * (a[k] - b[k]);
    na += a[k] * a[k];
    nb += b[k] * b[k];
  }
  const double denom = std::max({std::sqrt(na), std::sqrt(nb), 1e-12});
  return std::sqrt(diff) / denom;
}

}  // namespace gensep
