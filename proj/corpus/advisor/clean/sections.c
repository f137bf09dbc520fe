void init_a(void);
void init_b(void);

void init_both(void) {
  #pragma omp parallel sections
  {
    #pragma omp section
    init_a();
    #pragma omp section
    init_b();
  }
}
