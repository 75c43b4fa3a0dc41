#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "suffstat/expr.hpp"
#include "suffstat/measure.hpp"

namespace suffstat {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

// Identifies the binomial product family so sweeps can take grouped paths.
struct CoinBlockTag {
  int m = 1;
  int n = 1;
};

enum class DensityForm { closed_form, expression };

// Family of positive densities p(w; xi) on a finite sample space, indexed by
// a parameter box in R^d (optionally cut by the open simplex constraint
// sum(xi) < 1). Immutable; evaluation is pure.
class ParametrizedModel {
 public:
  ParametrizedModel() = default;

  const SampleSpace& space() const;
  SpacePtr space_ptr() const;
  const FiniteMeasure& base() const;
  std::size_t dim() const;
  std::span<const Interval> box() const;
  bool has_simplex_constraint() const;
  const std::string& name() const;
  std::optional<CoinBlockTag> coin_block_tag() const;

  // True when xi lies strictly inside the box (and simplex cut), with an
  // optional extra margin on every side.
  bool is_interior(std::span<const double> xi, double margin = 0.0) const;
  void require_interior(std::span<const double> xi) const;  // throws DomainError

  // p(w; xi) with exact gradient. Throws DomainError for exterior xi and
  // ModelValidityError if the density fails to be positive.
  DualVector density_grad(std::size_t outcome, std::span<const double> xi) const;
  DualVector density_grad(std::string_view outcome_label,
                          std::span<const double> xi) const;

  struct Impl;

 private:
  friend ParametrizedModel make_model(SpacePtr, FiniteMeasure, std::size_t,
                                      std::vector<Interval>, bool,
                                      std::function<DualVector(std::size_t, std::span<const double>)>,
                                      std::string, std::optional<CoinBlockTag>);
  std::shared_ptr<const Impl> impl_;
};

// General-purpose constructor taking a density callback.
ParametrizedModel make_model(
    SpacePtr space, FiniteMeasure base, std::size_t dim, std::vector<Interval> box,
    bool simplex_constraint,
    std::function<DualVector(std::size_t, std::span<const double>)> density,
    std::string name, std::optional<CoinBlockTag> tag = std::nullopt);

// Model whose densities are expression strings (one per outcome).
ParametrizedModel make_expr_model(SpacePtr space, FiniteMeasure base, std::size_t dim,
                                  std::vector<Interval> box, bool simplex_constraint,
                                  std::vector<Expr> densities, std::string name);

// mn i.i.d. coin tosses: p(w;xi) = xi^a(w) (1-xi)^(mn-a(w)) on {0,1}^mn,
// counting base measure, box (0,1).
ParametrizedModel make_coin_block(int m, int n,
                                  DensityForm form = DensityForm::closed_form);

// Two dependent coin tosses on {00,01,10,11}:
// p = (1/2-xi, xi, xi^2, 1/2-xi^2), box (0, 1/2).
ParametrizedModel make_two_coin_dependent(DensityForm form = DensityForm::closed_form);

// Categorical distribution on k outcomes with the first k-1 probabilities as
// free parameters; p(k-1;xi) = 1 - sum(xi).
ParametrizedModel make_categorical_simplex(int k,
                                           DensityForm form = DensityForm::closed_form);

// Pushforward family on kappa's target: base kappa_*mu0 and
// p'(w') = (sum over the fiber of p * mu0) / mu0'(w').
ParametrizedModel induced_model(const ParametrizedModel& model, const Statistic& kappa);

// Per-block "all ones" indicator map {0,1}^(mn) -> {0,1}^m.
Statistic block_statistic(int m, int n);

// Heads-count map {0,1}^nbits -> {0..nbits}.
Statistic heads_statistic(int nbits);

// Evaluation grid: a lattice over the eps-shrunk box, simplex-filtered when
// the model has the constraint. Points are stored in row-major lattice order.
struct Grid {
  std::size_t dim = 1;
  double eps = 1e-4;
  std::vector<std::size_t> axis_counts;
  std::vector<std::vector<double>> axis_values;
  std::vector<std::vector<double>> points;
  std::vector<std::vector<std::size_t>> coords;  // lattice coordinates per point

  std::size_t size() const { return points.size(); }

  // Pairs of point indices adjacent along one axis.
  std::vector<std::pair<std::size_t, std::size_t>> adjacent_pairs() const;

  double axis_step(std::size_t axis) const;
};

Grid make_grid(const ParametrizedModel& model, std::size_t per_axis, double eps = 1e-4,
               std::size_t total_cap = 1'000'000);

// Checks p > 0 at every grid point; throws ModelValidityError naming the
// offending outcome and point.
void validate_positive_on_grid(const ParametrizedModel& model, const Grid& grid);

std::string point_to_string(std::span<const double> xi);

}  // namespace suffstat
