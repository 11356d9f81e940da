#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

namespace censtl::pso {

class PsoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class DimensionKind { Continuous, Grid };

struct Dimension {
  double lower = 0.0;
  double upper = 0.0;
  DimensionKind kind = DimensionKind::Continuous;
  /// Grid spacing, measured from `lower`; used only for grid dimensions.
  double step = 0.0;
};

class SearchSpace {
 public:
  std::size_t add_continuous(double lower, double upper);
  std::size_t add_grid(double lower, double upper, double step);

  std::size_t size() const { return dims_.size(); }
  bool empty() const { return dims_.empty(); }
  const Dimension& operator[](std::size_t i) const { return dims_[i]; }
  const std::vector<Dimension>& dimensions() const { return dims_; }

  /// Clamps into bounds and rounds grid dimensions to the nearest grid point.
  void snap(std::span<double> x) const;
  bool contains(std::span<const double> x) const;

 private:
  std::vector<Dimension> dims_;
};

struct PSOConfig {
  std::size_t num_particles = 200;
  std::size_t num_iterations = 100;
  double inertia = 0.729;
  double cognitive = 1.49445;
  double social = 1.49445;
  std::uint64_t seed = 0;
};

struct Result {
  std::vector<double> best_params;
  double best_cost = 0.0;
  /// Best cost after initialisation, then after each iteration.
  std::vector<double> trace;
};

using CostFunction = std::function<double(std::span<const double>)>;
using ProgressCallback = std::function<void(std::size_t iteration, double best_cost)>;

/// Global-best PSO. Cost calls within an iteration run concurrently, so the
/// cost function must be safe to call from several threads.
///
/// `initial[p]`, when given, fixes the starting position of particle p; NaN
/// entries keep their uniform draw. Such particles start at rest.
Result optimize(const CostFunction& cost, const SearchSpace& space, const PSOConfig& config,
                const ProgressCallback& progress = {}, const std::vector<std::vector<double>>& initial = {});

void write_trace_csv(const Result& result, std::ostream& out);

}  // namespace censtl::pso
