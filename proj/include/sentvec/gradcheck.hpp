#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sentvec/optim.hpp"
#include "sentvec/rng.hpp"

namespace sentvec {

// Central-difference gradient verification. The loss callback must be
// deterministic (fix any sampler seeds before calling) and is re-evaluated
// with single coordinates perturbed in place, so it has to read parameter
// values fresh on every call. Models are run in double for this; float
// gives finite differences no headroom.

struct GradCheckGroup {
  std::string name;
  double* values = nullptr;
  const double* grads = nullptr;  // analytic gradient, computed before the check
  std::size_t size = 0;
};

struct GradCheckReport {
  double max_rel_err = 0;
  std::string worst_group;
  std::size_t worst_index = 0;
  std::size_t coords_checked = 0;
};

inline GradCheckReport grad_check(const std::function<double()>& loss_fn,
                                  std::vector<GradCheckGroup> groups, double epsilon,
                                  std::size_t max_coords_per_group = 0,
                                  std::uint64_t seed = 0x9d5c) {
  if (epsilon < 1e-7 || epsilon > 1e-3)
    throw std::invalid_argument("grad_check: epsilon outside [1e-7, 1e-3]");
  SplitMix64 rng(seed);
  GradCheckReport report;
  for (auto& g : groups) {
    std::vector<std::size_t> coords;
    if (max_coords_per_group == 0 || g.size <= max_coords_per_group) {
      coords.resize(g.size);
      for (std::size_t i = 0; i < g.size; ++i) coords[i] = i;
    } else {
      for (std::size_t i = 0; i < max_coords_per_group; ++i)
        coords.push_back(std::size_t(rng.next_below(g.size)));
    }
    for (std::size_t idx : coords) {
      const double saved = g.values[idx];
      g.values[idx] = saved + epsilon;
      const double up = loss_fn();
      g.values[idx] = saved - epsilon;
      const double down = loss_fn();
      g.values[idx] = saved;
      if (!std::isfinite(up) || !std::isfinite(down))
        throw std::runtime_error("grad_check: non-finite loss at " + g.name);
      const double numeric = (up - down) / (2.0 * epsilon);
      const double analytic = g.grads[idx];
      const double denom = std::max({1.0, std::fabs(analytic), std::fabs(numeric)});
      const double rel = std::fabs(analytic - numeric) / denom;
      ++report.coords_checked;
      if (rel > report.max_rel_err) {
        report.max_rel_err = rel;
        report.worst_group = g.name;
        report.worst_index = idx;
      }
    }
  }
  return report;
}

// Adapter from a model's parameter list (double precision instantiation).
template <class Model>
GradCheckReport grad_check_params(Model& model, const std::function<double()>& loss_fn,
                                  double epsilon, std::size_t max_coords_per_group = 0,
                                  std::uint64_t seed = 0x9d5c) {
  auto params = model.params();
  std::vector<GradCheckGroup> groups;
  groups.reserve(params.size());
  for (auto& p : params)
    groups.push_back({p.name, p.value->data.data(), p.grad->data.data(), p.value->size()});
  return grad_check(loss_fn, std::move(groups), epsilon, max_coords_per_group, seed);
}

}  // namespace sentvec
