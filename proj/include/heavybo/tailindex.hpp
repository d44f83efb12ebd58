#pragma once

// Tail-heaviness estimation from order statistics: the upper tail of the
// centred absolute values is regressed as z = a x^xi + b with
// z_i = -log(i / n), i.e. P(|X| > t) ~ exp(-(a t^xi + b)).

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "heavybo/linalg.hpp"

namespace heavybo {

inline constexpr double kDefaultTailFraction = 0.05;

struct TailPoint {
  double x = 0.0;
  double z = 0.0;
};

struct TailPoints {
  std::vector<TailPoint> pairs;  // descending x
  std::size_t n_total = 0;
};

/// Throws DataError when the sample is too small for a nonempty head or has no spread.
TailPoints tail_points(std::span<const double> samples, double fraction = kDefaultTailFraction);

struct TailFitOptions {
  double xi_min = 0.05;
  double xi_max = 4.0;
  double grid_step = 0.01;
  double refine_tol = 1e-4;
};

struct TailFit {
  double xi = 0.0;
  double a = 0.0;
  double b = 0.0;
  double rss = 0.0;
  /// xi landed on the edge of the search domain.
  bool at_boundary = false;
};

/// Least squares (a, b) and residual sum of squares for a fixed xi.
/// Returns nullopt when x^xi has no spread.
std::optional<TailFit> fit_at_xi(const TailPoints& points, double xi);

/// Grid search over xi with closed-form (a, b), then golden-section
/// refinement around the best grid node. Throws DataError for fewer than 3
/// points or a design with no spread in x.
TailFit fit_tail_index(const TailPoints& points, const TailFitOptions& options = {});

struct ColumnTailResult {
  std::size_t column = 0;
  std::optional<TailFit> fit;
  std::string status;  // "ok", "boundary" or the failure reason
};

struct TailSummary {
  std::size_t fitted = 0;
  double mean_xi = 0.0;
  double variance_xi = 0.0;  // unbiased; 0 for a single column
};

struct DatasetTailReport {
  std::vector<ColumnTailResult> columns;
  /// Over successful fits; empty when every column failed.
  std::optional<TailSummary> summary;
};

/// Runs the pipeline on every column (rows are samples). Failed columns are
/// reported and excluded from the summary. Output does not depend on workers.
DatasetTailReport estimate_dataset_tails(const Matrix& features, double fraction = kDefaultTailFraction,
                                         unsigned workers = 1);

}  // namespace heavybo
