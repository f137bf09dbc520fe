#pragma once

long fib(int n) {
  if (n < 2) return n;
  long a = 0, b = 0;
  #pragma omp task shared(a)
  a = fib(n - 1);
  #pragma omp task shared(b)
  b = fib(n - 2);
  #pragma omp taskwait
  return a + b;
}

long run(int n) {
  long result = 0;
  #pragma omp parallel
  {
    #pragma omp single
    result = fib(n);
  }
  return result;
}
