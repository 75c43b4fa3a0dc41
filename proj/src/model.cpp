#include "suffstat/model.hpp"

#include <cmath>
#include <utility>

namespace suffstat {

struct ParametrizedModel::Impl {
  SpacePtr space;
  FiniteMeasure base;
  std::size_t dim;
  std::vector<Interval> box;
  bool simplex_constraint;
  std::function<DualVector(std::size_t, std::span<const double>)> density;
  std::string name;
  std::optional<CoinBlockTag> tag;

  Impl(SpacePtr s, FiniteMeasure b) : space(std::move(s)), base(std::move(b)), dim(1),
                                      simplex_constraint(false) {}
};

const SampleSpace& ParametrizedModel::space() const { return *impl_->space; }
SpacePtr ParametrizedModel::space_ptr() const { return impl_->space; }
const FiniteMeasure& ParametrizedModel::base() const { return impl_->base; }
std::size_t ParametrizedModel::dim() const { return impl_->dim; }
std::span<const Interval> ParametrizedModel::box() const { return impl_->box; }
bool ParametrizedModel::has_simplex_constraint() const { return impl_->simplex_constraint; }
const std::string& ParametrizedModel::name() const { return impl_->name; }
std::optional<CoinBlockTag> ParametrizedModel::coin_block_tag() const { return impl_->tag; }

bool ParametrizedModel::is_interior(std::span<const double> xi, double margin) const {
  if (xi.size() != impl_->dim) return false;
  double sum = 0.0;
  for (std::size_t i = 0; i < xi.size(); ++i) {
    if (!(xi[i] > impl_->box[i].lo + margin) || !(xi[i] < impl_->box[i].hi - margin))
      return false;
    sum += xi[i];
  }
  if (impl_->simplex_constraint && !(sum < 1.0 - margin)) return false;
  return true;
}

void ParametrizedModel::require_interior(std::span<const double> xi) const {
  if (xi.size() != impl_->dim)
    throw DomainError("parameter point " + point_to_string(xi) + " has dimension " +
                      std::to_string(xi.size()) + ", model '" + impl_->name +
                      "' expects " + std::to_string(impl_->dim));
  if (!is_interior(xi))
    throw DomainError("parameter point " + point_to_string(xi) +
                      " is outside the open parameter domain of model '" +
                      impl_->name + "'");
}

DualVector ParametrizedModel::density_grad(std::size_t outcome,
                                           std::span<const double> xi) const {
  require_interior(xi);
  if (outcome >= impl_->space->size())
    throw ConfigError("outcome index out of range");
  DualVector d;
  try {
    d = impl_->density(outcome, xi);
  } catch (const DomainError& e) {
    throw DomainError(std::string(e.what()) + " (outcome '" +
                      impl_->space->label(outcome) + "' at xi = " + point_to_string(xi) +
                      ")");
  }
  if (!(d.value > 0.0) || !std::isfinite(d.value))
    throw ModelValidityError("density of outcome '" + impl_->space->label(outcome) +
                             "' is not positive at xi = " + point_to_string(xi) +
                             " (value " + std::to_string(d.value) + ")");
  return d;
}

DualVector ParametrizedModel::density_grad(std::string_view outcome_label,
                                           std::span<const double> xi) const {
  return density_grad(impl_->space->index_of(outcome_label), xi);
}

ParametrizedModel make_model(
    SpacePtr space, FiniteMeasure base, std::size_t dim, std::vector<Interval> box,
    bool simplex_constraint,
    std::function<DualVector(std::size_t, std::span<const double>)> density,
    std::string name, std::optional<CoinBlockTag> tag) {
  if (!space) throw ConfigError("model needs a sample space");
  if (!space->same_as(base.space()))
    throw ConfigError("base measure space does not match model space");
  if (dim < 1) throw ConfigError("parameter dimension must be >= 1");
  if (box.size() != dim)
    throw ConfigError("box has " + std::to_string(box.size()) + " intervals for dimension " +
                      std::to_string(dim));
  for (const Interval& iv : box)
    if (!(iv.lo < iv.hi))
      throw ConfigError("parameter interval [" + std::to_string(iv.lo) + ", " +
                        std::to_string(iv.hi) + ") is empty");
  auto impl = std::make_shared<ParametrizedModel::Impl>(space, std::move(base));
  impl->dim = dim;
  impl->box = std::move(box);
  impl->simplex_constraint = simplex_constraint;
  impl->density = std::move(density);
  impl->name = std::move(name);
  impl->tag = tag;
  ParametrizedModel m;
  m.impl_ = std::move(impl);
  return m;
}

ParametrizedModel make_expr_model(SpacePtr space, FiniteMeasure base, std::size_t dim,
                                  std::vector<Interval> box, bool simplex_constraint,
                                  std::vector<Expr> densities, std::string name) {
  if (densities.size() != space->size())
    throw ConfigError("model has " + std::to_string(densities.size()) +
                      " densities for " + std::to_string(space->size()) + " outcomes");
  auto table = std::make_shared<std::vector<Expr>>(std::move(densities));
  auto density = [table](std::size_t w, std::span<const double> xi) {
    return (*table)[w].eval_grad(xi);
  };
  return make_model(std::move(space), std::move(base), dim, std::move(box),
                    simplex_constraint, std::move(density), std::move(name));
}

namespace {

int bit_count(const std::string& label) {
  int a = 0;
  for (char c : label) a += (c == '1');
  return a;
}

// xi^a (1-xi)^(n-a) as a dual in one variable.
DualVector bernoulli_product(double xi, int a, int total) {
  DualVector x = dual_variable(1, 0, xi);
  DualVector one_minus = dual_sub(dual_constant(1, 1.0), x);
  return dual_mul(dual_pow_int(x, a), dual_pow_int(one_minus, total - a));
}

}  // namespace

ParametrizedModel make_coin_block(int m, int n, DensityForm form) {
  if (m < 1 || n < 1) throw ConfigError("coin_block needs m >= 1 and n >= 1");
  const long long mn = static_cast<long long>(m) * n;
  if (mn > 24)
    throw ResourceError("coin_block(" + std::to_string(m) + "," + std::to_string(n) +
                        ") has mn = " + std::to_string(mn) + " > 24");
  auto space = product_space_bits(static_cast<std::size_t>(mn));
  FiniteMeasure base = counting_measure(space);
  std::string name = "coin_block(" + std::to_string(m) + "," + std::to_string(n) + ")";
  CoinBlockTag tag{m, n};

  if (form == DensityForm::expression) {
    std::vector<Expr> densities;
    densities.reserve(space->size());
    for (std::size_t w = 0; w < space->size(); ++w) {
      const int a = bit_count(space->label(w));
      std::string text = "x1^" + std::to_string(a) + "*(1-x1)^" + std::to_string(mn - a);
      densities.push_back(Expr::parse(text, 1));
    }
    // Keep the family tag so sweeps can still recognize the model.
    auto table = std::make_shared<std::vector<Expr>>(std::move(densities));
    auto density = [table](std::size_t w, std::span<const double> xi) {
      return (*table)[w].eval_grad(xi);
    };
    return make_model(std::move(space), std::move(base), 1, {{0.0, 1.0}}, false,
                      std::move(density), std::move(name), tag);
  }

  const int total = static_cast<int>(mn);
  auto counts = std::make_shared<std::vector<int>>();
  counts->reserve(space->size());
  for (std::size_t w = 0; w < space->size(); ++w)
    counts->push_back(bit_count(space->label(w)));
  auto density = [counts, total](std::size_t w, std::span<const double> xi) {
    return bernoulli_product(xi[0], (*counts)[w], total);
  };
  return make_model(std::move(space), std::move(base), 1, {{0.0, 1.0}}, false,
                    std::move(density), std::move(name), tag);
}

ParametrizedModel make_two_coin_dependent(DensityForm form) {
  auto space = make_space({"00", "01", "10", "11"});
  FiniteMeasure base = counting_measure(space);
  std::vector<Interval> box{{0.0, 0.5}};
  std::string name = "two_coin_dependent";

  if (form == DensityForm::expression) {
    std::vector<Expr> densities{
        Expr::parse("0.5-x1", 1),
        Expr::parse("x1", 1),
        Expr::parse("x1^2", 1),
        Expr::parse("0.5-x1^2", 1),
    };
    return make_expr_model(std::move(space), std::move(base), 1, std::move(box), false,
                           std::move(densities), std::move(name));
  }

  auto density = [](std::size_t w, std::span<const double> xi) {
    DualVector x = dual_variable(1, 0, xi[0]);
    switch (w) {
      case 0: return dual_sub(dual_constant(1, 0.5), x);
      case 1: return x;
      case 2: return dual_mul(x, x);
      default: return dual_sub(dual_constant(1, 0.5), dual_mul(x, x));
    }
  };
  return make_model(std::move(space), std::move(base), 1, std::move(box), false,
                    std::move(density), std::move(name));
}

ParametrizedModel make_categorical_simplex(int k, DensityForm form) {
  if (k < 2) throw ConfigError("categorical_simplex needs k >= 2");
  if (k > 16) throw ResourceError("categorical_simplex capped at k = 16");
  std::vector<std::string> labels;
  labels.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) labels.push_back(std::to_string(i));
  auto space = make_space(std::move(labels));
  FiniteMeasure base = counting_measure(space);
  const std::size_t d = static_cast<std::size_t>(k - 1);
  std::vector<Interval> box(d, Interval{0.0, 1.0});
  std::string name = "categorical_simplex(" + std::to_string(k) + ")";

  if (form == DensityForm::expression) {
    std::vector<Expr> densities;
    for (std::size_t i = 0; i + 1 < static_cast<std::size_t>(k); ++i)
      densities.push_back(Expr::parse("x" + std::to_string(i + 1), d));
    std::string last = "1";
    for (std::size_t i = 0; i < d; ++i) last += "-x" + std::to_string(i + 1);
    densities.push_back(Expr::parse(last, d));
    return make_expr_model(std::move(space), std::move(base), d, std::move(box), true,
                           std::move(densities), std::move(name));
  }

  auto density = [d](std::size_t w, std::span<const double> xi) {
    if (w < d) return dual_variable(d, w, xi[w]);
    DualVector r = dual_constant(d, 1.0);
    for (std::size_t i = 0; i < d; ++i)
      r = dual_sub(r, dual_variable(d, i, xi[i]));
    return r;
  };
  return make_model(std::move(space), std::move(base), d, std::move(box), true,
                    std::move(density), std::move(name));
}

ParametrizedModel induced_model(const ParametrizedModel& model, const Statistic& kappa) {
  if (!model.space().same_as(kappa.source()))
    throw ConfigError("induced model: statistic source does not match model space");
  FiniteMeasure pushed = pushforward_measure(model.base(), kappa);

  struct FiberData {
    ParametrizedModel parent;
    std::vector<std::vector<std::size_t>> fibers;
    std::vector<double> mu0;
    std::vector<double> mu0_pushed;
  };
  auto data = std::make_shared<FiberData>();
  data->parent = model;
  data->fibers.resize(kappa.target().size());
  for (std::size_t j = 0; j < kappa.target().size(); ++j)
    data->fibers[j] = kappa.fiber_indices(j);
  data->mu0 = model.base().weights();
  data->mu0_pushed = pushed.weights();

  auto density = [data](std::size_t w_target, std::span<const double> xi) {
    const std::size_t dim = data->parent.dim();
    DualVector sum = dual_constant(dim, 0.0);
    for (std::size_t i : data->fibers[w_target]) {
      DualVector p = data->parent.density_grad(i, xi);
      const double w = data->mu0[i];
      sum.value += p.value * w;
      for (std::size_t c = 0; c < dim; ++c) sum.grad[c] += p.grad[c] * w;
    }
    const double inv = 1.0 / data->mu0_pushed[w_target];
    sum.value *= inv;
    for (double& g : sum.grad) g *= inv;
    return sum;
  };

  std::vector<Interval> box(model.box().begin(), model.box().end());
  return make_model(kappa.target_ptr(), std::move(pushed), model.dim(), std::move(box),
                    model.has_simplex_constraint(), std::move(density),
                    model.name() + "/induced");
}

Statistic block_statistic(int m, int n) {
  if (m < 1 || n < 1) throw ConfigError("block statistic needs m >= 1 and n >= 1");
  const long long mn = static_cast<long long>(m) * n;
  if (mn > 24)
    throw ResourceError("block statistic with mn = " + std::to_string(mn) + " > 24");
  auto source = product_space_bits(static_cast<std::size_t>(mn));
  auto target = product_space_bits(static_cast<std::size_t>(m));
  std::vector<std::uint32_t> map(source->size());
  for (std::size_t w = 0; w < source->size(); ++w) {
    const std::string& bits = source->label(w);
    std::uint32_t image = 0;
    for (int b = 0; b < m; ++b) {
      bool all_ones = true;
      for (int i = 0; i < n; ++i)
        if (bits[static_cast<std::size_t>(b * n + i)] != '1') all_ones = false;
      image = (image << 1) | (all_ones ? 1u : 0u);
    }
    map[w] = image;
  }
  return Statistic(std::move(source), std::move(target), std::move(map));
}

Statistic heads_statistic(int nbits) {
  if (nbits < 1) throw ConfigError("heads statistic needs at least one bit");
  return bit_sum_statistic(product_space_bits(static_cast<std::size_t>(nbits)));
}

std::vector<std::pair<std::size_t, std::size_t>> Grid::adjacent_pairs() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (dim == 1) {
    for (std::size_t i = 0; i + 1 < points.size(); ++i) out.emplace_back(i, i + 1);
    return out;
  }
  // Lattice lookup by coordinates; simplex filtering leaves holes.
  std::size_t total = 1;
  for (std::size_t c : axis_counts) total *= c;
  std::vector<std::size_t> lookup(total, static_cast<std::size_t>(-1));
  auto linear = [&](const std::vector<std::size_t>& c) {
    std::size_t idx = 0;
    for (std::size_t a = 0; a < dim; ++a) idx = idx * axis_counts[a] + c[a];
    return idx;
  };
  for (std::size_t p = 0; p < points.size(); ++p) lookup[linear(coords[p])] = p;
  for (std::size_t p = 0; p < points.size(); ++p) {
    for (std::size_t a = 0; a < dim; ++a) {
      if (coords[p][a] + 1 >= axis_counts[a]) continue;
      auto c = coords[p];
      ++c[a];
      std::size_t q = lookup[linear(c)];
      if (q != static_cast<std::size_t>(-1)) out.emplace_back(p, q);
    }
  }
  return out;
}

double Grid::axis_step(std::size_t axis) const {
  const auto& v = axis_values[axis];
  return v.size() >= 2 ? v[1] - v[0] : 0.0;
}

Grid make_grid(const ParametrizedModel& model, std::size_t per_axis, double eps,
               std::size_t total_cap) {
  if (per_axis < 1) throw ConfigError("grid needs at least one point per axis");
  const std::size_t d = model.dim();
  // Shrink the per-axis count until the full lattice fits the cap.
  std::size_t count = per_axis;
  auto lattice_size = [&](std::size_t c) {
    std::size_t total = 1;
    for (std::size_t a = 0; a < d; ++a) {
      if (total > total_cap / std::max<std::size_t>(c, 1)) return total_cap + 1;
      total *= c;
    }
    return total;
  };
  while (count > 1 && lattice_size(count) > total_cap) --count;

  Grid g;
  g.dim = d;
  g.eps = eps;
  g.axis_counts.assign(d, count);
  g.axis_values.resize(d);
  for (std::size_t a = 0; a < d; ++a) {
    const Interval iv = model.box()[a];
    const double lo = iv.lo + eps;
    const double hi = iv.hi - eps;
    if (!(lo < hi))
      throw ConfigError("eps = " + std::to_string(eps) + " empties the parameter box");
    g.axis_values[a].resize(count);
    if (count == 1) {
      g.axis_values[a][0] = 0.5 * (lo + hi);
    } else {
      const double step = (hi - lo) / static_cast<double>(count - 1);
      for (std::size_t i = 0; i < count; ++i)
        g.axis_values[a][i] = lo + step * static_cast<double>(i);
    }
  }

  std::vector<std::size_t> c(d, 0);
  for (;;) {
    std::vector<double> pt(d);
    double sum = 0.0;
    for (std::size_t a = 0; a < d; ++a) {
      pt[a] = g.axis_values[a][c[a]];
      sum += pt[a];
    }
    if (!model.has_simplex_constraint() || sum <= 1.0 - eps) {
      g.points.push_back(std::move(pt));
      g.coords.push_back(c);
    }
    std::size_t a = d;
    while (a > 0) {
      --a;
      if (++c[a] < g.axis_counts[a]) break;
      c[a] = 0;
      if (a == 0) {
        if (g.points.empty())
          throw ConfigError("grid is empty (simplex constraint removed every point)");
        return g;
      }
    }
  }
}

void validate_positive_on_grid(const ParametrizedModel& model, const Grid& grid) {
  for (const auto& pt : grid.points)
    for (std::size_t w = 0; w < model.space().size(); ++w)
      (void)model.density_grad(w, pt);  // throws on violation
}

std::string point_to_string(std::span<const double> xi) {
  std::string s = "(";
  for (std::size_t i = 0; i < xi.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(xi[i]);
  }
  s += ")";
  return s;
}

}  // namespace suffstat
