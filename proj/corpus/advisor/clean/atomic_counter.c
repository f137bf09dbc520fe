long count_even(const int *v, int n) {
  long count = 0;
  #pragma omp parallel for
  for (int i = 0; i < n; i++) {
    if (v[i] % 2 == 0) {
      #pragma omp atomic
      count++;
    }
  }
  return count;
}
