void square(double *a, int n) {
  #pragma omp parallel
  {
    for (int i = 0; i < n; i++) {
      a[i] = a[i] * a[i];
    }
  }
}
