#include "sentvec/project.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "sentvec/kernels.hpp"
#include "sentvec/rng.hpp"

namespace sentvec::project {

namespace {

constexpr double kTol = 1e-10;
constexpr std::size_t kMaxIters = 1000;

void normalize(std::vector<double>& v) {
  const double n = std::sqrt(kern::sq_norm(v.size(), v.data()));
  if (n == 0) throw std::runtime_error("pca: zero vector during iteration");
  kern::scale(v.size(), 1.0 / n, v.data());
}

void orthogonalize(std::vector<double>& v, const std::vector<double>& axis) {
  const double proj = kern::dot(v.size(), v.data(), axis.data());
  kern::axpy(v.size(), -proj, axis.data(), v.data());
}

void fix_sign(std::vector<double>& v) {
  std::size_t imax = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (std::fabs(v[i]) > std::fabs(v[imax])) imax = i;
  if (v[imax] < 0) kern::scale(v.size(), -1.0, v.data());
}

// Dominant eigenvector of cov, kept orthogonal to prev (if any).
std::pair<std::vector<double>, double> power_iterate(const std::vector<double>& cov,
                                                     std::size_t d,
                                                     const std::vector<double>* prev,
                                                     SplitMix64& rng) {
  std::vector<double> v(d);
  for (auto& x : v) x = rng.next_double() - 0.5;
  if (prev) orthogonalize(v, *prev);
  normalize(v);

  std::vector<double> next(d);
  for (std::size_t iter = 0; iter < kMaxIters; ++iter) {
    next.assign(d, 0.0);
    kern::gemv_acc(d, d, cov.data(), v.data(), next.data());
    if (prev) orthogonalize(next, *prev);
    const double norm = std::sqrt(kern::sq_norm(d, next.data()));
    if (norm < 1e-300) {
      // Deflated matrix vanished: remaining variance is zero. Any unit
      // vector orthogonal to prev completes the basis.
      return {v, 0.0};
    }
    kern::scale(d, 1.0 / norm, next.data());
    const double align = std::fabs(kern::dot(d, next.data(), v.data()));
    v = next;
    if (1.0 - align < kTol) break;
  }
  // Rayleigh quotient on the (possibly deflated) covariance.
  next.assign(d, 0.0);
  kern::gemv_acc(d, d, cov.data(), v.data(), next.data());
  const double lambda = kern::dot(d, v.data(), next.data());
  return {v, lambda};
}

}  // namespace

Projection2D pca_project(const std::vector<std::vector<double>>& vectors,
                         const std::vector<std::pair<std::string, std::string>>& labels) {
  if (vectors.size() < 3) throw std::invalid_argument("pca_project: need at least 3 vectors");
  const std::size_t d = vectors[0].size();
  if (d < 2) throw std::invalid_argument("pca_project: vector width must be >= 2");
  if (!labels.empty() && labels.size() != vectors.size())
    throw std::invalid_argument("pca_project: labels/vectors count mismatch");
  for (const auto& v : vectors)
    if (v.size() != d) throw std::invalid_argument("pca_project: ragged input");

  const std::size_t n = vectors.size();
  std::vector<double> mean(d, 0.0);
  for (const auto& v : vectors) kern::axpy(d, 1.0, v.data(), mean.data());
  kern::scale(d, 1.0 / double(n), mean.data());

  std::vector<std::vector<double>> centered(n, std::vector<double>(d));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) centered[i][j] = vectors[i][j] - mean[j];

  // Sample covariance, d x d.
  std::vector<double> cov(d * d, 0.0);
  for (const auto& row : centered) kern::ger_acc(d, d, cov.data(), row.data(), row.data());
  kern::scale(cov.size(), 1.0 / double(n - 1), cov.data());

  double trace = 0;
  for (std::size_t j = 0; j < d; ++j) trace += cov[j * d + j];
  if (trace <= 0) throw std::invalid_argument("pca_project: data has zero variance");

  SplitMix64 rng(0x9ca1);
  auto [axis1, var1] = power_iterate(cov, d, nullptr, rng);
  fix_sign(axis1);

  // Deflate and pull the second axis.
  std::vector<double> deflated = cov;
  for (std::size_t i = 0; i < d; ++i)
    kern::axpy(d, -var1 * axis1[i], axis1.data(), deflated.data() + i * d);
  auto [axis2, var2] = power_iterate(deflated, d, &axis1, rng);
  orthogonalize(axis2, axis1);
  normalize(axis2);
  fix_sign(axis2);
  if (var2 < 0) var2 = 0;
  if (var2 > var1) std::swap(var1, var2);  // numerical ties only

  Projection2D out;
  out.components = {axis1, axis2};
  out.explained_variance = {var1, var2};
  out.points.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.points[i].x = kern::dot(d, centered[i].data(), axis1.data());
    out.points[i].y = kern::dot(d, centered[i].data(), axis2.data());
    if (!labels.empty()) {
      out.points[i].group_id = labels[i].first;
      out.points[i].label = labels[i].second;
    }
  }
  return out;
}

void save_projection(const Projection2D& proj, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_projection: cannot open " + path);
  for (const auto& p : proj.points)
    out << p.x << "\t" << p.y << "\t" << p.group_id << "\t" << p.label << "\n";
  if (!out) throw std::runtime_error("save_projection: write failed");
  std::ofstream var(path + ".variance", std::ios::binary);
  if (!var) throw std::runtime_error("save_projection: cannot open sidecar");
  var << "explained_variance_1=" << proj.explained_variance[0] << "\n"
      << "explained_variance_2=" << proj.explained_variance[1] << "\n";
}

}  // namespace sentvec::project
