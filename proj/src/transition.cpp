#include "bms/transition.hpp"

#include <boost/math/special_functions/gamma.hpp>

namespace bms {

long poisson_truncation(double mean, double tail) {
  // P(N > n) = P(Gamma(n + 1, 1) < mean) is decreasing in n.
  long n = 0;
  while (boost::math::gamma_p(static_cast<double>(n + 1), mean) >= tail) ++n;
  return n;
}

}  // namespace bms
