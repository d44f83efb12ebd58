#include "heavybo/tailindex.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "heavybo/error.hpp"
#include "heavybo/parallel.hpp"

namespace heavybo {

TailPoints tail_points(std::span<const double> samples, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw ConfigError("tail fraction must lie in (0, 1]");
  const std::size_t n = samples.size();
  const auto head = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
  if (head == 0) {
    throw DataError("need at least " + std::to_string(static_cast<long>(std::ceil(1.0 / fraction))) +
                    " samples for a nonempty tail");
  }
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(n);
  std::vector<double> magnitudes(n);
  std::transform(samples.begin(), samples.end(), magnitudes.begin(),
                 [mean](double v) { return std::abs(v - mean); });
  if (!std::all_of(magnitudes.begin(), magnitudes.end(), [](double v) { return std::isfinite(v); })) {
    throw DataError("non-finite sample value");
  }
  std::stable_sort(magnitudes.begin(), magnitudes.end(), std::greater<>());
  if (!(magnitudes.front() > 0.0)) throw DataError("degenerate data: all samples equal");

  TailPoints points;
  points.n_total = n;
  points.pairs.reserve(head);
  for (std::size_t i = 1; i <= head; ++i) {
    points.pairs.push_back({magnitudes[i - 1], -std::log(static_cast<double>(i) / static_cast<double>(n))});
  }
  return points;
}

std::optional<TailFit> fit_at_xi(const TailPoints& points, double xi) {
  const auto m = points.pairs.size();
  std::vector<double> t(m);
  double t_mean = 0.0;
  double z_mean = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    t[i] = std::pow(points.pairs[i].x, xi);
    t_mean += t[i];
    z_mean += points.pairs[i].z;
  }
  t_mean /= static_cast<double>(m);
  z_mean /= static_cast<double>(m);
  double stt = 0.0;
  double stz = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double dt = t[i] - t_mean;
    stt += dt * dt;
    stz += dt * (points.pairs[i].z - z_mean);
  }
  if (!(stt > 0.0) || !std::isfinite(stt)) return std::nullopt;
  TailFit fit;
  fit.xi = xi;
  fit.a = stz / stt;
  fit.b = z_mean - fit.a * t_mean;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = fit.a * t[i] + fit.b - points.pairs[i].z;
    fit.rss += r * r;
  }
  return fit;
}

TailFit fit_tail_index(const TailPoints& points, const TailFitOptions& options) {
  if (points.pairs.size() < 3) throw DataError("tail fit needs at least 3 points");
  const bool spread = std::any_of(points.pairs.begin(), points.pairs.end(),
                                  [&](const TailPoint& tp) { return tp.x != points.pairs.front().x; });
  if (!spread) throw DataError("tail fit: all x values are equal");
  if (!(options.xi_min > 0.0 && options.xi_max > options.xi_min && options.grid_step > 0.0)) {
    throw ConfigError("invalid xi search domain");
  }

  const auto nodes = static_cast<long>(std::floor((options.xi_max - options.xi_min) / options.grid_step + 1e-9));
  std::optional<TailFit> best;
  long best_node = -1;
  for (long i = 0; i <= nodes; ++i) {
    const double xi = options.xi_min + static_cast<double>(i) * options.grid_step;
    auto fit = fit_at_xi(points, xi);
    if (fit && (!best || fit->rss < best->rss)) {
      best = fit;
      best_node = i;
    }
  }
  if (!best) throw DataError("tail fit: degenerate design for every xi");

  auto rss_at = [&](double xi) {
    const auto fit = fit_at_xi(points, xi);
    return fit ? fit->rss : std::numeric_limits<double>::infinity();
  };
  double lo = std::max(options.xi_min, best->xi - options.grid_step);
  double hi = std::min(options.xi_max, best->xi + options.grid_step);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = rss_at(c);
  double fd = rss_at(d);
  while (hi - lo > options.refine_tol) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = rss_at(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = rss_at(d);
    }
  }
  if (auto refined = fit_at_xi(points, 0.5 * (lo + hi)); refined && refined->rss < best->rss) {
    best = refined;
  }
  best->at_boundary = best_node == 0 || best_node == nodes ||
                      best->xi - options.xi_min < options.grid_step ||
                      options.xi_max - best->xi < options.grid_step;
  return *best;
}

DatasetTailReport estimate_dataset_tails(const Matrix& features, double fraction, unsigned workers) {
  if (features.cols() < 1) throw DataError("feature matrix has no columns");
  DatasetTailReport report;
  report.columns.resize(static_cast<std::size_t>(features.cols()));
  parallel_for(report.columns.size(), workers, [&](std::size_t j) {
    auto& result = report.columns[j];
    result.column = j;
    const Vector column = features.col(static_cast<Eigen::Index>(j));
    try {
      const auto points = tail_points(std::span<const double>(column.data(), static_cast<std::size_t>(column.size())), fraction);
      result.fit = fit_tail_index(points);
      result.status = result.fit->at_boundary ? "boundary" : "ok";
    } catch (const DataError& e) {
      result.status = e.what();
    }
  });

  TailSummary summary;
  double sum = 0.0;
  for (const auto& c : report.columns) {
    if (c.fit) {
      ++summary.fitted;
      sum += c.fit->xi;
    }
  }
  if (summary.fitted > 0) {
    summary.mean_xi = sum / static_cast<double>(summary.fitted);
    double ss = 0.0;
    for (const auto& c : report.columns) {
      if (c.fit) ss += (c.fit->xi - summary.mean_xi) * (c.fit->xi - summary.mean_xi);
    }
    summary.variance_xi = summary.fitted > 1 ? ss / static_cast<double>(summary.fitted - 1) : 0.0;
    report.summary = summary;
  }
  return report;
}

}  // namespace heavybo
