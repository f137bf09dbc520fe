#include <omp.h>

int total = 0;

void sum_all(const int *v, int n) {
  omp_lock_t lock;
  omp_init_lock(&lock);
  #pragma omp parallel for
  for (int i = 0; i < n; i++) {
    omp_set_lock(&lock);
    total += v[i];
    omp_unset_lock(&lock);
  }
  omp_destroy_lock(&lock);
}
