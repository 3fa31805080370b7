#pragma once

#include <string>
#include <vector>

#include "mtfda/analysis.hpp"

namespace mtfda {

// Write via a temp file in the same directory, then rename into place, so a
// failed run never leaves a partial output behind.
void atomic_write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

std::string distance_matrix_to_csv(const DistanceMatrix& d);
DistanceMatrix distance_matrix_from_csv(const std::string& text);

std::string embedding_to_csv(const std::vector<std::string>& ids,
                             const std::vector<std::vector<double>>& points);

std::string format_double(double v);

}  // namespace mtfda
