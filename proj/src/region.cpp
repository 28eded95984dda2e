#include "lgent/region.hpp"

#include <cmath>

namespace lgent {

std::vector<Eigen::VectorXd> Box::grid(double rho) const {
  if (!(rho > 0.0)) throw ConfigError("grid resolution must be positive");
  const int d = dim();
  std::vector<int> counts(d);
  for (int i = 0; i < d; ++i) {
    double len = hi(i) - lo(i);
    counts[i] = (len <= 0.0) ? 1 : static_cast<int>(std::floor(len / rho + 1e-9)) + 1;
  }
  std::vector<Eigen::VectorXd> out;
  std::vector<int> idx(d, 0);
  while (true) {
    Eigen::VectorXd p(d);
    for (int i = 0; i < d; ++i) {
      p(i) = (counts[i] == 1) ? lo(i) : lo(i) + idx[i] * rho;
    }
    out.push_back(std::move(p));
    int axis = d - 1;
    while (axis >= 0) {
      if (++idx[axis] < counts[axis]) break;
      idx[axis] = 0;
      --axis;
    }
    if (axis < 0) break;
  }
  return out;
}

}  // namespace lgent
