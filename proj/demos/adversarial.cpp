// Runs the bilinear-form search from the ε-family seed and from random
// restarts, then prints the best ratio against c2^{1/2}.

#include <cmath>
#include <cstdio>

#include "dyadlab/lab/search.hpp"

int main() {
  using namespace dyadlab::lab;
  const SearchResult r = search(4, 2, 1, Objective::bet_norm_ratio, 2000, 1e4, 4);
  std::printf("initial %.6g best %.6g c2 %.6g a2 %.6g best/sqrt(c2) %.6f (restart %zu, iteration %zu)\n",
              r.initial_value, r.best_value, r.c2, r.a2, r.ratio_over_sqrt_c2(), r.best_restart, r.best_iteration);
  for (std::size_t i = 0; i < r.restart_best.size(); ++i) std::printf("restart %zu: %.6g\n", i, r.restart_best[i]);
}
