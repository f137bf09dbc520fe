#include <omp.h>
#include <stdio.h>

int main(void) {
  omp_set_num_threads(4);
  #pragma omp parallel
  {
    printf("hello from %d\n", omp_get_thread_num());
  }
  return 0;
}
