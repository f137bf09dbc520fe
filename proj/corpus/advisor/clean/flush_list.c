int flag = 0;
int data = 0;

void producer(void) {
  data = 42;
  #pragma omp flush(data)
  flag = 1;
  #pragma omp flush(flag)
}
