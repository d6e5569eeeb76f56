#pragma once

#include <string>

namespace tauspec {

// The estimator order nu in N_+, or nu = infinity (the Kullback-Leibler
// limit). The matching divergence exponent is tau = 1 - 1/nu.
class EstimatorOrder {
 public:
  static EstimatorOrder finite(int nu);
  static EstimatorOrder infinite() { return EstimatorOrder(0, true); }

  bool is_infinite() const { return infinite_; }
  int nu() const { return nu_; }  // 0 when infinite
  double tau() const { return infinite_ ? 1.0 : 1.0 - 1.0 / nu_; }
  std::string label() const { return infinite_ ? "inf" : std::to_string(nu_); }

  bool operator==(const EstimatorOrder&) const = default;

 private:
  EstimatorOrder(int nu, bool infinite) : nu_(nu), infinite_(infinite) {}

  int nu_;
  bool infinite_;
};

}  // namespace tauspec
