void two_phase(double *a, double *b, int n) {
  #pragma omp parallel
  {
    #pragma omp for nowait
    for (int i = 0; i < n; i++) a[i] = i;
    #pragma omp barrier
    #pragma omp for
    for (int i = 0; i < n; i++) b[i] = a[n - 1 - i];
  }
}
