#include <stdio.h>

void print_in_order(const double *v, int n) {
  #pragma omp parallel for ordered schedule(static, 1)
  for (int i = 0; i < n; i++) {
    double r = v[i] * 2.0;
    #pragma omp ordered
    {
      printf("%d %f\n", i, r);
    }
  }
}
