int flag = 0;
int data = 0;

void producer(void) {
  data = 42;
  #pragma omp flush
  flag = 1;
}
