#pragma once

#include <array>
#include <string>
#include <vector>

namespace sentvec::project {

// 2-D PCA of embedding vectors for plot files. Axes come from power
// iteration with deflation on the sample covariance; each axis is signed so
// its largest-magnitude coordinate is positive.
struct Projection2D {
  struct Point {
    double x = 0;
    double y = 0;
    std::string group_id;
    std::string label;
  };
  std::vector<Point> points;
  std::vector<std::vector<double>> components;  // 2 axes, each width d
  std::array<double, 2> explained_variance{};
};

// labels[i] = (group_id, label) for vectors[i]; pass empty strings if you
// have none. Needs >= 3 vectors of width >= 2 with nonzero variance.
Projection2D pca_project(const std::vector<std::vector<double>>& vectors,
                         const std::vector<std::pair<std::string, std::string>>& labels);

// Writes "x<TAB>y<TAB>group_id<TAB>label" lines plus a sidecar
// "<path>.variance" with the two explained variances.
void save_projection(const Projection2D& proj, const std::string& path);

}  // namespace sentvec::project
