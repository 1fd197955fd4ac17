#include "biaslens/synthetic.hpp"

#include <cmath>
#include <cstdio>

#include "biaslens/error.hpp"
#include "biaslens/rng.hpp"

namespace biaslens {

double proxy_noise_std(double target_corr, double advantaged_share) {
  // corr(s, s + v) = sigma_s / sqrt(sigma_s^2 + std^2)  =>
  // std = sigma_s * sqrt(1/corr^2 - 1)
  const double variance = advantaged_share * (1.0 - advantaged_share);
  if (variance <= 0.0) fail(Errc::degenerate_sensitive, "sensitive column has a single group");
  if (target_corr <= 0.0 || target_corr > 1.0) {
    fail(Errc::invalid_argument, "target correlation must be in (0, 1]");
  }
  return std::sqrt(variance) * std::sqrt(1.0 / (target_corr * target_corr) - 1.0);
}

TabularDataset make_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (spec.n < 10) fail(Errc::invalid_argument, "synthetic dataset needs n >= 10");
  if (!in_unit(spec.prevalence_a) || !in_unit(spec.base_rate_a) || !in_unit(spec.base_rate_d) ||
      !in_unit(spec.proxy_corr)) {
    fail(Errc::invalid_argument, "synthetic probabilities must lie in [0, 1]");
  }

  std::vector<ColumnSpec> schema;
  {
    ColumnSpec group{.name = "group", .role = ColumnRole::sensitive, .kind = ColumnKind::categorical};
    group.advantaged_value = "a";
    group.disadvantaged_value = "d";
    schema.push_back(group);
    ColumnSpec outcome{.name = "outcome", .role = ColumnRole::target, .kind = ColumnKind::categorical};
    outcome.positive_value = "pos";
    outcome.negative_value = "neg";
    schema.push_back(outcome);
    schema.push_back({.name = "signal", .role = ColumnRole::feature, .kind = ColumnKind::numeric});
    schema.push_back({.name = "proxy", .role = ColumnRole::feature, .kind = ColumnKind::numeric});
    for (std::size_t j = 0; j < spec.noise_dim; ++j) {
      schema.push_back(
          {.name = "noise_" + std::to_string(j), .role = ColumnRole::feature, .kind = ColumnKind::numeric});
    }
  }

  const double noise_std = spec.proxy_corr > 0.0 && spec.prevalence_a > 0.0 && spec.prevalence_a < 1.0
                               ? proxy_noise_std(spec.proxy_corr, spec.prevalence_a)
                               : 0.0;

  rng::Engine eng(rng::derive_seed(seed, "synthetic"));
  char buf[64];
  auto fmt = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return std::string(buf);
  };

  std::vector<csv::Row> rows;
  rows.reserve(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const bool advantaged = eng.uniform01() < spec.prevalence_a;
    const double base_rate = advantaged ? spec.base_rate_a : spec.base_rate_d;
    const bool positive = eng.uniform01() < base_rate;
    const double signal = (positive ? 1.0 : -1.0) + eng.normal();
    double proxy;
    if (spec.proxy_corr == 0.0) {
      proxy = eng.normal();  // no group information at all
    } else {
      proxy = (advantaged ? 1.0 : 0.0) + noise_std * eng.normal();
    }
    csv::Row row;
    row.reserve(schema.size());
    row.push_back(advantaged ? "a" : "d");
    row.push_back(positive ? "pos" : "neg");
    row.push_back(fmt(signal));
    row.push_back(fmt(proxy));
    for (std::size_t j = 0; j < spec.noise_dim; ++j) row.push_back(fmt(eng.normal()));
    rows.push_back(std::move(row));
  }
  return TabularDataset::create(std::move(schema), std::move(rows));
}

}  // namespace biaslens
