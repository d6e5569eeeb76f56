#include "tauspec/order.hpp"

#include "tauspec/error.hpp"

namespace tauspec {

EstimatorOrder EstimatorOrder::finite(int nu) {
  if (nu < 1) throw InputError("estimator order nu must be >= 1");
  return EstimatorOrder(nu, false);
}

}  // namespace tauspec
