#include <math.h>
#include <stdio.h>
#include "simrsf.h"

#define CHECK(call)                                                        \
  do {                                                                     \
    SimrsfStatus s_ = (call);                                              \
    if (s_ != SIMRSF_STATUS_OK) {                                          \
      fprintf(stderr, "%s -> %d: %s\n", #call, (int)s_, simrsf_last_error()); \
      return 1;                                                            \
    }                                                                      \
  } while (0)

int main(void) {
  SimrsfDataset *data = NULL, *train = NULL, *test = NULL;
  SimrsfPrediction *pred = NULL;
  SimrsfAucCurve *auc = NULL;
  CHECK(simrsf_simulate("n = 200\n", 3, &data));
  CHECK(simrsf_dataset_split(data, 0.7, 3, &train, &test));
  SimrsfForestParams fp = {10, 3, 0};
  SimrsfParams params = {fp, fp, 3, false, 0.0};
  CHECK(simrsf_sbrsf_fit_predict(train, test, &params, &pred));
  double grid[3] = {2.0, 5.0, 10.0};
  CHECK(simrsf_time_varying_auc(test, pred, grid, 3, &auc));
  double v = 0.0;
  CHECK(simrsf_auc_value(auc, 1, &v));
  if (simrsf_prediction_len(pred) != simrsf_dataset_len(test) || !(v >= 0.0 && v <= 1.0)) {
    return 2;
  }
  if (simrsf_auc_value(auc, 7, &v) != SIMRSF_STATUS_OUT_OF_RANGE || simrsf_last_error() == NULL) {
    return 3;
  }
  printf("auc %.4f\n", v);
  simrsf_auc_free(auc);
  simrsf_prediction_free(pred);
  simrsf_dataset_free(test);
  simrsf_dataset_free(train);
  simrsf_dataset_free(data);
  return 0;
}
