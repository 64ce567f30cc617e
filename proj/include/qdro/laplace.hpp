#pragma once

#include "qdro/core.hpp"

namespace qdro {

/// Additive (add-c) smoothing pseudocount, c > 0.
class Pseudocount {
public:
  explicit Pseudocount(double c);
  double value() const noexcept { return c_; }

private:
  double c_;
};

/// (p_hat_j + c) / (1 + n c).
Distribution laplace_smooth(const Distribution& p_hat, Pseudocount c);

}  // namespace qdro
