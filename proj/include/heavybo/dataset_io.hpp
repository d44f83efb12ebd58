#pragma once

// Dataset persistence. The binary format is a plain-text header terminated
// by a "data" line, followed by little-endian payload:
//   points (p*n float64, column-major), mu (p float64),
//   labels (n int8), clean labels (n int8), noise mask (n uint8).
// CSV export has columns x_1..x_p,y,y_clean,noisy and one row per sample.

#include <filesystem>

#include "heavybo/datagen.hpp"

namespace heavybo {

void save_dataset_binary(const Dataset& ds, const std::filesystem::path& path);
Dataset load_dataset_binary(const std::filesystem::path& path);

void save_dataset_csv(const Dataset& ds, const std::filesystem::path& path);
/// The mean vector is not part of the CSV schema; it loads as zeros.
Dataset load_dataset_csv(const std::filesystem::path& path);

/// Dispatches on the extension: ".csv" is CSV, anything else binary.
Dataset load_dataset(const std::filesystem::path& path);
void save_dataset(const Dataset& ds, const std::filesystem::path& path);

}  // namespace heavybo
