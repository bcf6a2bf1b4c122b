#include "wpb/io.hpp"

#include <cctype>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "wpb/common.hpp"

namespace wpb {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

bool looks_numeric(const std::string& s) {
  for (char c : s) {
    if (std::isdigit(static_cast<unsigned char>(c))) return true;
    if (c == '-' || c == '+' || c == '.') continue;
    // "nan"/"inf" count as numeric fields
    if (c == 'n' || c == 'a' || c == 'i' || c == 'f') continue;
    return false;
  }
  return !s.empty();
}

double parse_double(const std::string& s, const std::string& path) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("failed to parse numeric field '" + s + "' in " + path);
  }
}

}  // namespace

void write_csv(const std::string& path, const CsvTable& table) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out << std::setprecision(17);
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) out << ',';
    out << table.header[i];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) {
      throw ConfigError("csv row width does not match header: " + path);
    }
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << row[i];
    }
    out << '\n';
  }
  if (!out) throw ConfigError("write failed: " + path);
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open for reading: " + path);
  CsvTable table;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_fields(line);
    if (!header_seen) {
      table.header = fields;
      header_seen = true;
      continue;
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_double(f, path));
    if (row.size() != table.header.size()) {
      throw ConfigError("inconsistent row width in " + path);
    }
    table.rows.push_back(std::move(row));
  }
  if (!header_seen) throw ConfigError("empty csv file: " + path);
  return table;
}

void write_cloud_csv(const std::string& path, const SampleCloud& cloud) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out << "# d=" << cloud.dim() << " n=" << cloud.size() << '\n';
  out << std::setprecision(17);
  for (Eigen::Index j = 0; j < cloud.dim(); ++j) {
    if (j) out << ',';
    out << 'x' << j;
  }
  out << '\n';
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    for (Eigen::Index j = 0; j < cloud.dim(); ++j) {
      if (j) out << ',';
      out << cloud.points(i, j);
    }
    out << '\n';
  }
  if (!out) throw ConfigError("write failed: " + path);
}

SampleCloud read_cloud_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open for reading: " + path);
  std::string line;
  long declared_d = -1, declared_n = -1;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ss(line.substr(1));
      std::string token;
      while (ss >> token) {
        if (token.rfind("d=", 0) == 0) declared_d = std::stol(token.substr(2));
        if (token.rfind("n=", 0) == 0) declared_n = std::stol(token.substr(2));
      }
      continue;
    }
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    if (!looks_numeric(fields[0])) continue;  // header line
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_double(f, path));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ConfigError("inconsistent point dimension in " + path);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError("no points in cloud file: " + path);
  if (declared_d >= 0 && declared_d != static_cast<long>(rows.front().size())) {
    throw ConfigError("cloud header d= disagrees with rows in " + path);
  }
  if (declared_n >= 0 && declared_n != static_cast<long>(rows.size())) {
    throw ConfigError("cloud header n= disagrees with rows in " + path);
  }
  SampleCloud cloud;
  cloud.points.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      cloud.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return cloud;
}

}  // namespace wpb
