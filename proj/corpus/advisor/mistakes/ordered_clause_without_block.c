#include <stdio.h>

void print_cubes(int n) {
  #pragma omp parallel for ordered
  for (int i = 0; i < n; i++) {
    printf("%d\n", i * i * i);
  }
}
