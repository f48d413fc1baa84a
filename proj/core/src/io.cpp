#include "rkhsbound/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace rkhsbound {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& text, const std::string& path, int line_number) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  if (begin < end) {
    if (std::string_view(begin, end - begin) == "inf") return INFINITY;
    if (std::string_view(begin, end - begin) == "-inf") return -INFINITY;
    if (std::string_view(begin, end - begin) == "nan") return NAN;
  }
  const auto result = std::from_chars(begin, end, value);
  if (result.ec != std::errc() || result.ptr != end) {
    throw BoundError(ErrorKind::InvalidInput, path + ":" + std::to_string(line_number) +
                                                  ": cannot parse number \"" + text + "\"");
  }
  return value;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw BoundError(ErrorKind::InvalidInput, "cannot open " + path);
  }
  CsvTable table;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (table.header.empty()) {
      table.header = split_csv_line(line);
      continue;
    }
    const auto fields = split_csv_line(line);
    if (fields.size() != table.header.size()) {
      throw BoundError(ErrorKind::InvalidInput,
                       path + ":" + std::to_string(line_number) + ": expected " +
                           std::to_string(table.header.size()) + " fields, found " +
                           std::to_string(fields.size()));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& field : fields) {
      row.push_back(parse_double(field, path, line_number));
    }
    table.rows.push_back(std::move(row));
  }
  if (table.header.empty()) {
    throw BoundError(ErrorKind::InvalidInput, path + ": missing header row");
  }
  return table;
}

void check_input_header(const std::vector<std::string>& header, size_t dims,
                        const std::string& path) {
  for (size_t i = 0; i < dims; ++i) {
    const std::string expected = "x_" + std::to_string(i + 1);
    if (header[i] != expected) {
      throw BoundError(ErrorKind::InvalidInput,
                       path + ": header column " + std::to_string(i + 1) + " must be \"" +
                           expected + "\", found \"" + header[i] + "\"");
    }
  }
}

}  // namespace

Dataset read_dataset_csv(const std::string& path) {
  const CsvTable table = read_csv(path);
  if (table.header.size() < 2 || table.header.back() != "y") {
    throw BoundError(ErrorKind::InvalidInput,
                     path + ": dataset header must be x_1,...,x_d,y");
  }
  const size_t dims = table.header.size() - 1;
  check_input_header(table.header, dims, path);

  Dataset dataset;
  dataset.inputs.resize(static_cast<Eigen::Index>(table.rows.size()),
                        static_cast<Eigen::Index>(dims));
  dataset.outputs.resize(static_cast<Eigen::Index>(table.rows.size()));
  for (size_t r = 0; r < table.rows.size(); ++r) {
    for (size_t c = 0; c < dims; ++c) {
      dataset.inputs(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          table.rows[r][c];
    }
    dataset.outputs[static_cast<Eigen::Index>(r)] = table.rows[r][dims];
  }
  return dataset;
}

void write_dataset_csv(const std::string& path, const Dataset& dataset) {
  std::ofstream out(path);
  if (!out) {
    throw BoundError(ErrorKind::InvalidInput, "cannot write " + path);
  }
  for (Eigen::Index c = 0; c < dataset.inputs.cols(); ++c) {
    out << "x_" << (c + 1) << ",";
  }
  out << "y\n";
  for (Eigen::Index r = 0; r < dataset.inputs.rows(); ++r) {
    for (Eigen::Index c = 0; c < dataset.inputs.cols(); ++c) {
      out << format_double(dataset.inputs(r, c)) << ",";
    }
    out << format_double(dataset.outputs[r]) << "\n";
  }
}

Matrix read_query_csv(const std::string& path) {
  const CsvTable table = read_csv(path);
  check_input_header(table.header, table.header.size(), path);
  Matrix queries(static_cast<Eigen::Index>(table.rows.size()),
                 static_cast<Eigen::Index>(table.header.size()));
  for (size_t r = 0; r < table.rows.size(); ++r) {
    for (size_t c = 0; c < table.header.size(); ++c) {
      queries(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = table.rows[r][c];
    }
  }
  return queries;
}

Matrix parse_grid_specs(const std::vector<std::string>& specs) {
  if (specs.empty()) {
    throw BoundError(ErrorKind::InvalidInput, "no query grid specified");
  }
  std::vector<std::vector<double>> axes;
  for (const auto& spec : specs) {
    std::vector<std::string> parts;
    std::string part;
    std::istringstream stream(spec);
    while (std::getline(stream, part, ':')) parts.push_back(part);
    if (parts.size() != 3) {
      throw BoundError(ErrorKind::InvalidInput, "grid spec must be lo:hi:count, got " + spec);
    }
    const double lo = parse_double(parts[0], "--grid", 0);
    const double hi = parse_double(parts[1], "--grid", 0);
    const int count = static_cast<int>(parse_double(parts[2], "--grid", 0));
    if (count < 1 || (count > 1 && !(lo < hi))) {
      throw BoundError(ErrorKind::InvalidInput, "bad grid spec " + spec);
    }
    std::vector<double> axis(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) {
      axis[static_cast<size_t>(i)] =
          count == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (count - 1);
    }
    axes.push_back(std::move(axis));
  }

  Eigen::Index total = 1;
  for (const auto& axis : axes) total *= static_cast<Eigen::Index>(axis.size());
  Matrix grid(total, static_cast<Eigen::Index>(axes.size()));
  for (Eigen::Index row = 0; row < total; ++row) {
    Eigen::Index remainder = row;
    for (Eigen::Index dim = static_cast<Eigen::Index>(axes.size()) - 1; dim >= 0; --dim) {
      const auto& axis = axes[static_cast<size_t>(dim)];
      grid(row, dim) = axis[static_cast<size_t>(remainder % axis.size())];
      remainder /= static_cast<Eigen::Index>(axis.size());
    }
  }
  return grid;
}

}  // namespace rkhsbound
