#include <vector>

void scale(std::vector<double>& v, double k) {
  const long n = static_cast<long>(v.size());
  #pragma omp parallel for num_threads(4) \
      schedule(dynamic, 16)
  for (long i = 0; i < n; ++i) {
    v[i] *= k;
  }
}
