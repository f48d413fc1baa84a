#pragma once

#include <string>
#include <vector>

#include "rkhsbound/kernels.hpp"

namespace rkhsbound {

// Shortest round-trip decimal representation, so re-parsing an emitted file
// reproduces the exact double. Non-finite values print as inf/-inf/nan.
std::string format_double(double value);

struct Dataset {
  Matrix inputs;   // N x d
  Vector outputs;  // length N
};

// CSV with header x_1,...,x_d,y; '.' decimal, UTF-8, no thousands separators.
// Parse errors name the offending line.
Dataset read_dataset_csv(const std::string& path);
void write_dataset_csv(const std::string& path, const Dataset& dataset);

// Query points: header x_1,...,x_d.
Matrix read_query_csv(const std::string& path);

// "lo:hi:count" per dimension; multiple specs form the cartesian product.
Matrix parse_grid_specs(const std::vector<std::string>& specs);

}  // namespace rkhsbound
