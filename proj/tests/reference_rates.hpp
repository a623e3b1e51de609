#pragma once

// Published optimal information rates (percent), one-sided alpha 0.025.
// Row K lists t_1..t_{K-1}; K = 1 has no interim.

#include <vector>

namespace gsdopt::reference {

struct RateRow {
  double beta;
  int stages;
  std::vector<double> percent;
};

inline const std::vector<RateRow> haybittle_peto_rates = {
    {0.1, 2, {59.4}},
    {0.1, 3, {44.4, 70.4}},
    {0.1, 4, {36.2, 56.1, 76.2}},
    {0.1, 5, {30.8, 47.2, 63.0, 79.8}},
    {0.1, 6, {27.1, 41.1, 54.3, 67.8, 82.3}},
    {0.1, 7, {24.3, 36.6, 48.0, 59.4, 71.3, 84.2}},
    {0.1, 8, {22.2, 33.1, 43.2, 53.2, 63.3, 74.0, 85.7}},
    {0.1, 9, {20.7, 30.7, 39.7, 48.6, 57.7, 66.6, 76.4, 86.9}},
    {0.2, 2, {61.2}},
    {0.2, 3, {46.6, 72.1}},
    {0.2, 4, {38.6, 58.4, 77.7}},
    {0.2, 5, {33.5, 50.0, 65.4, 81.2}},
    {0.2, 6, {30.1, 44.2, 57.2, 70.1, 83.7}},
    {0.2, 7, {27.6, 40.1, 51.4, 62.4, 73.6, 85.5}},
    {0.2, 8, {25.7, 36.9, 46.9, 56.6, 66.3, 76.3, 87.0}},
    {0.2, 9, {24.4, 34.6, 43.7, 52.3, 60.9, 69.5, 78.5, 88.1}},
};

inline const std::vector<RateRow> pocock_rates = {
    {0.1, 2, {48.4}},
    {0.1, 3, {35.3, 64.1}},
    {0.1, 4, {29.3, 50.2, 71.9}},
    {0.1, 5, {25.9, 42.6, 58.7, 76.5}},
    {0.1, 6, {23.6, 37.8, 50.8, 64.3, 79.7}},
    {0.1, 7, {22.1, 34.5, 45.6, 56.6, 68.4, 81.9}},
    {0.1, 8, {20.9, 32.1, 41.7, 51.1, 60.9, 71.4, 83.6}},
    {0.1, 9, {19.9, 29.9, 38.2, 46.2, 54.6, 63.5, 73.2, 84.6}},
    {0.2, 2, {51.0}},
    {0.2, 3, {38.2, 66.8}},
    {0.2, 4, {32.3, 53.4, 74.2}},
    {0.2, 5, {28.9, 46.1, 61.8, 78.5}},
    {0.2, 6, {26.8, 41.5, 54.3, 67.2, 81.3}},
    {0.2, 7, {25.3, 38.3, 49.3, 59.9, 71.0, 83.3}},
    {0.2, 8, {24.2, 35.9, 45.6, 54.8, 64.0, 73.7, 84.7}},
    {0.2, 9, {23.4, 34.1, 42.8, 50.9, 58.9, 67.1, 75.9, 85.8}},
};

inline const std::vector<RateRow> obrien_fleming_rates = {
    {0.1, 2, {65.7}},
    {0.1, 3, {54.9, 74.2}},
    {0.1, 4, {49.3, 63.4, 78.6}},
    {0.1, 5, {45.6, 57.2, 68.5, 81.4}},
    {0.1, 6, {43.1, 53.0, 62.2, 72.0, 83.3}},
    {0.1, 7, {41.1, 49.9, 57.9, 65.9, 74.5, 84.7}},
    {0.1, 8, {39.5, 47.5, 54.6, 61.5, 68.6, 76.4, 85.7}},
    {0.1, 9, {38.3, 45.7, 52.1, 58.2, 64.4, 70.9, 78.1, 86.6}},
    {0.2, 2, {68.1}},
    {0.2, 3, {57.3, 76.3}},
    {0.2, 4, {51.6, 65.8, 80.5}},
    {0.2, 5, {47.8, 59.6, 70.8, 83.1}},
    {0.2, 6, {45.2, 55.4, 64.7, 74.2, 84.8}},
    {0.2, 7, {43.1, 52.3, 60.3, 68.3, 76.6, 86.0}},
    {0.2, 8, {41.5, 49.8, 57.0, 63.9, 70.9, 78.4, 86.9}},
    {0.2, 9, {40.2, 47.9, 54.4, 60.6, 66.7, 73.0, 79.8, 87.7}},
};

}  // namespace gsdopt::reference
