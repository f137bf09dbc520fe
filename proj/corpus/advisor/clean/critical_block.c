#include <stdlib.h>

struct node { int value; struct node *next; };

void collect(struct node **head, const int *v, int n) {
  #pragma omp parallel for
  for (int i = 0; i < n; i++) {
    struct node *item = malloc(sizeof *item);
    item->value = v[i];
    #pragma omp critical
    {
      item->next = *head;
      *head = item;
    }
  }
}
