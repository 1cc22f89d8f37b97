#include "heatmoment/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "heatmoment/errors.hpp"

namespace heatmoment {

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& opts) {
  if (!(b >= a)) throw Error(ErrorKind::InvalidArgument, "integration bounds out of order");
  if (a == b) return {};
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  double error = 0.0;
  double l1 = 0.0;
  // Boost stops a panel once its error is below |panel estimate| * tol, so an
  // integral that cancels to zero would refine until the depth cap. Scale tol
  // by a one-panel L1 estimate instead. Its error estimate also carries a
  // roundoff floor that accumulates over leaves, hence the 1e-11 floor.
  GK::integrate(f, a, b, 0, 0.0, &error, &l1);
  const double tol = l1 > 0.0 ? std::max(1e-11, 0.1 * opts.abs_tol / l1) : 1e-11;
  const double value = GK::integrate(f, a, b, opts.max_depth, tol, &error, &l1);
  if (!std::isfinite(value) || error > opts.abs_tol) {
    std::ostringstream msg;
    msg << "quadrature did not reach abs tolerance " << opts.abs_tol << " (achieved " << error
        << ")";
    throw Error(ErrorKind::QuadratureFailure, msg.str()).with_achieved(error);
  }
  return {value, error};
}

}  // namespace heatmoment
