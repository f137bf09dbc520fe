#include <stdio.h>

void print_squares(int n) {
  #pragma omp parallel for
  for (int i = 0; i < n; i++) {
    #pragma omp ordered
    printf("%d\n", i * i);
  }
}
