long count_positive(const int *v, int n) {
  long count = 0;
  #pragma omp parallel for
  for (int i = 0; i < n; i++) {
    if (v[i] > 0) {
      #pragma omp critical
      count++;
    }
  }
  return count;
}
