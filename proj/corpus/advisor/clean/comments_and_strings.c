#include <stdio.h>

/* A common mistake is writing
   #pragma parallel for
   without the omp keyword. */
void explain(void) {
  // omp_set_lock(&lock) needs omp_init_lock first
  puts("#pragma omp flush");
  puts("omp_set_num_threads(8) inside a region is an error");
  char c = '{';
  (void)c;
}
