#pragma once

#include <string>
#include <vector>

#include "wpb/gaussian.hpp"

namespace wpb {

/// Plain numeric table with a named header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Writes a table with 17 significant digits so round trips are lossless.
void write_csv(const std::string& path, const CsvTable& table);

/// Reads a table written by write_csv (or any comma-separated numeric file
/// with one header line). Lines starting with '#' are skipped.
CsvTable read_csv(const std::string& path);

/// Cloud files carry a "# d=<d> n=<n>" comment, then a x0,...,x{d-1} header,
/// then one point per row.
void write_cloud_csv(const std::string& path, const SampleCloud& cloud);

/// Accepts files with or without the comment/header lines; when the comment
/// is present its d and n are checked against the parsed payload.
SampleCloud read_cloud_csv(const std::string& path);

}  // namespace wpb
