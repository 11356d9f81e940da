#include "censtl/pso.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "censtl/format.hpp"
#include "censtl/parallel.hpp"

namespace censtl::pso {

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Counter-based uniform in [0, 1): one independent stream per (particle, iteration, dim, slot).
double uniform(std::uint64_t seed, std::uint64_t particle, std::uint64_t iteration, std::uint64_t dim,
               std::uint64_t slot) {
  std::uint64_t h = mix(seed);
  h = mix(h ^ particle);
  h = mix(h ^ iteration);
  h = mix(h ^ (dim << 2 | slot));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double grid_top(const Dimension& d) {
  return d.lower + std::floor((d.upper - d.lower) / d.step + 1e-9) * d.step;
}

std::string describe(std::span<const double> x) {
  std::string s = "[";
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i > 0) s += ", ";
    s += format_double(x[i]);
  }
  return s + "]";
}

}  // namespace

std::size_t SearchSpace::add_continuous(double lower, double upper) {
  if (!(lower <= upper) || !std::isfinite(lower) || !std::isfinite(upper)) {
    throw PsoError("search dimension needs finite bounds with lower <= upper");
  }
  dims_.push_back({lower, upper, DimensionKind::Continuous, 0.0});
  return dims_.size() - 1;
}

std::size_t SearchSpace::add_grid(double lower, double upper, double step) {
  if (!(step > 0.0)) throw PsoError("grid step must be positive");
  const std::size_t i = add_continuous(lower, upper);
  dims_[i].kind = DimensionKind::Grid;
  dims_[i].step = step;
  return i;
}

void SearchSpace::snap(std::span<double> x) const {
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    const auto& d = dims_[i];
    double v = std::clamp(x[i], d.lower, d.upper);
    if (d.kind == DimensionKind::Grid) {
      const double k = std::round((v - d.lower) / d.step);
      v = std::min(d.lower + k * d.step, grid_top(d));
    }
    x[i] = v;
  }
}

bool SearchSpace::contains(std::span<const double> x) const {
  if (x.size() != dims_.size()) return false;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    const auto& d = dims_[i];
    if (x[i] < d.lower || x[i] > d.upper) return false;
    if (d.kind == DimensionKind::Grid) {
      const double k = (x[i] - d.lower) / d.step;
      if (std::abs(k - std::round(k)) > 1e-9) return false;
    }
  }
  return true;
}

Result optimize(const CostFunction& cost, const SearchSpace& space, const PSOConfig& config,
                const ProgressCallback& progress, const std::vector<std::vector<double>>& initial) {
  if (space.empty()) throw PsoError("search space is empty");
  if (config.num_particles == 0) throw PsoError("PSO needs at least one particle");
  if (config.inertia < 0.0 || config.cognitive < 0.0 || config.social < 0.0) {
    throw PsoError("PSO coefficients must be non-negative");
  }

  const std::size_t n = config.num_particles;
  const std::size_t w = space.size();
  const auto& dims = space.dimensions();

  std::vector<double> pos(n * w);
  std::vector<double> vel(n * w);
  std::vector<double> snapped(n * w);
  std::vector<double> pbest(n * w);
  std::vector<double> pbest_cost(n);
  std::vector<double> current_cost(n);

  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t j = 0; j < w; ++j) {
      const double range = dims[j].upper - dims[j].lower;
      pos[p * w + j] = dims[j].lower + uniform(config.seed, p, 0, j, 0) * range;
      vel[p * w + j] = (uniform(config.seed, p, 0, j, 1) - 0.5) * range;
    }
  }
  for (std::size_t p = 0; p < std::min(n, initial.size()); ++p) {
    if (initial[p].empty()) continue;
    if (initial[p].size() != w) throw PsoError("initial position has the wrong dimension");
    for (std::size_t j = 0; j < w; ++j) {
      if (std::isnan(initial[p][j])) continue;
      pos[p * w + j] = std::clamp(initial[p][j], dims[j].lower, dims[j].upper);
      vel[p * w + j] = 0.0;
    }
  }

  auto evaluate = [&] {
    parallel_for(n, [&](std::size_t p) {
      std::span<double> x(snapped.data() + p * w, w);
      std::copy_n(pos.begin() + static_cast<std::ptrdiff_t>(p * w), w, x.begin());
      space.snap(x);
      const double c = cost(x);
      if (!std::isfinite(c)) {
        throw PsoError("cost function returned " + format_double(c) + " at params " + describe(x));
      }
      current_cost[p] = c;
    });
  };

  evaluate();
  pbest = snapped;
  pbest_cost = current_cost;

  std::size_t g = 0;
  for (std::size_t p = 1; p < n; ++p) {
    if (pbest_cost[p] < pbest_cost[g]) g = p;
  }
  Result result;
  result.best_params.assign(pbest.begin() + static_cast<std::ptrdiff_t>(g * w),
                            pbest.begin() + static_cast<std::ptrdiff_t>((g + 1) * w));
  result.best_cost = pbest_cost[g];
  result.trace.push_back(result.best_cost);
  if (progress) progress(0, result.best_cost);

  for (std::size_t it = 1; it <= config.num_iterations; ++it) {
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t j = 0; j < w; ++j) {
        const std::size_t i = p * w + j;
        const double range = dims[j].upper - dims[j].lower;
        const double r1 = uniform(config.seed, p, it, j, 0);
        const double r2 = uniform(config.seed, p, it, j, 1);
        double v = config.inertia * vel[i] + config.cognitive * r1 * (pbest[i] - pos[i]) +
                   config.social * r2 * (result.best_params[j] - pos[i]);
        v = std::clamp(v, -range, range);
        double x = pos[i] + v;
        if (x < dims[j].lower) {
          x = dims[j].lower;
          v = 0.0;
        } else if (x > dims[j].upper) {
          x = dims[j].upper;
          v = 0.0;
        }
        pos[i] = x;
        vel[i] = v;
      }
    }
    evaluate();
    for (std::size_t p = 0; p < n; ++p) {
      if (current_cost[p] < pbest_cost[p]) {
        pbest_cost[p] = current_cost[p];
        std::copy_n(snapped.begin() + static_cast<std::ptrdiff_t>(p * w), w,
                    pbest.begin() + static_cast<std::ptrdiff_t>(p * w));
      }
    }
    std::size_t best = 0;
    for (std::size_t p = 1; p < n; ++p) {
      if (pbest_cost[p] < pbest_cost[best]) best = p;
    }
    if (pbest_cost[best] < result.best_cost) {
      result.best_cost = pbest_cost[best];
      result.best_params.assign(pbest.begin() + static_cast<std::ptrdiff_t>(best * w),
                                pbest.begin() + static_cast<std::ptrdiff_t>((best + 1) * w));
    }
    result.trace.push_back(result.best_cost);
    if (progress) progress(it, result.best_cost);
  }
  return result;
}

void write_trace_csv(const Result& result, std::ostream& out) {
  out << "iteration,best_cost\n";
  for (std::size_t i = 0; i < result.trace.size(); ++i) {
    out << i << ',' << format_double(result.trace[i]) << '\n';
  }
}

}  // namespace censtl::pso
