#include "qdro/laplace.hpp"

namespace qdro {

Pseudocount::Pseudocount(double c) : c_(c) {
  if (!std::isfinite(c) || !(c > 0.0)) throw Error(ErrorCode::InvalidArgument, "pseudocount must be > 0");
}

Distribution laplace_smooth(const Distribution& p_hat, Pseudocount c) {
  const double n = static_cast<double>(p_hat.size());
  const double denom = 1.0 + n * c.value();
  std::vector<double> out(p_hat.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = (p_hat[j] + c.value()) / denom;
  return Distribution::validate(out);
}

}  // namespace qdro
