#include <omp.h>
#include <stdio.h>

void report(void) {
  #pragma omp parallel
  {
    if (omp_get_thread_num() == 0) {
      omp_set_num_threads(2);
    }
    printf("thread %d\n", omp_get_thread_num());
  }
}
