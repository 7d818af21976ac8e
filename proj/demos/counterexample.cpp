// Prints the ε-family table: the norm-form ratio grows like 1/ε while
// ratio / c2^{1/2} stays at 1.

#include <cmath>
#include <cstdio>
#include <numbers>

#include "dyadlab/lab/experiments.hpp"

int main() {
  std::printf("%8s %6s %12s %12s %12s %12s %14s\n", "eps", "theta", "f_norm", "bet_norm", "ratio_norm", "c2",
              "ratio/sqrt(c2)");
  for (double theta : {0.0, std::numbers::pi / 4}) {
    for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
      const auto row = dyadlab::lab::sweep_row(eps, theta, 4);
      std::printf("%8.0e %6.3f %12.6g %12.6g %12.6g %12.6g %14.12f\n", eps, theta, row["f_norm"].get<double>(),
                  row["bet_norm_sum"].get<double>(), row["ratio_norm"].get<double>(), row["c2"].get<double>(),
                  row["ratio_over_sqrt_c2"].get<double>());
    }
  }
}
