void fill(int *a, int n) {
#pragma parallel for
  for (int i = 0; i < n; i++) a[i] = i;
}
