#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace stosqp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Primal-dual triple (x, mu, lambda).
struct Iterate {
  Vec x;
  Vec mu;
  Vec lambda;

  [[nodiscard]] Eigen::Index size() const { return x.size() + mu.size() + lambda.size(); }

  /// Stacks (x; mu; lambda) into one vector.
  [[nodiscard]] Vec stacked() const {
    Vec out(size());
    out << x, mu, lambda;
    return out;
  }

  [[nodiscard]] bool all_finite() const {
    return x.allFinite() && mu.allFinite() && lambda.allFinite();
  }
};

/// Raised when the merit function is evaluated outside the perturbed feasible set.
class OutOfPerturbedSet : public std::domain_error {
 public:
  OutOfPerturbedSet(const std::string& what, double a_x) : std::domain_error(what), a_x_(a_x) {}
  [[nodiscard]] double a_x() const noexcept { return a_x_; }

 private:
  double a_x_;
};

}  // namespace stosqp
