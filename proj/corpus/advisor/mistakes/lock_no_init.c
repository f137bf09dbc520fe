#include <omp.h>

omp_lock_t lock;
int total = 0;

void add(int value) {
  omp_set_lock(&lock);
  total += value;
  omp_unset_lock(&lock);
}
