void scale(double *a, int n, double k) {
  #pragma omp for
  for (int i = 0; i < n; i++) {
    a[i] *= k;
  }
}
