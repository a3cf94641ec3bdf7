#include <istream>
#include <ostream>
#include <sstream>

#include "mulenet/sensing.hpp"

namespace mulenet::sensing {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string strip(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  while (!s.empty() && s.front() == ' ') s.erase(0, 1);
  return s;
}

[[noreturn]] void bad_line(std::size_t line_no, const std::string& why) {
  throw std::runtime_error("line " + std::to_string(line_no) + ": " + why);
}

void expect_header(std::istream& in, std::string_view header) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV input");
  if (strip(line) != header)
    throw std::runtime_error("expected header '" + std::string(header) + "', got '" + strip(line) + "'");
}

}  // namespace

void write_readings_csv(std::ostream& out, std::span<const ReadingRow> rows) {
  out << kReadingCsvHeader << '\n';
  for (const ReadingRow& r : rows) {
    out << format_decimal(r.timestamp_s) << ',' << r.node_id << ',' << format_decimal(r.voltage_v)
        << ',' << format_decimal(r.temp_c) << ',' << r.sun_state << '\n';
  }
}

std::vector<ReadingRow> read_readings_csv(std::istream& in) {
  expect_header(in, kReadingCsvHeader);
  std::vector<ReadingRow> rows;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip(line);
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 5) bad_line(line_no, "expected 5 fields");
    try {
      ReadingRow r;
      r.timestamp_s = parse_decimal(f[0]);
      const double id = parse_decimal(f[1]);
      if (id < 0 || id != static_cast<double>(static_cast<std::uint32_t>(id)))
        bad_line(line_no, "node_id must be a non-negative integer");
      r.node_id = static_cast<std::uint32_t>(id);
      r.voltage_v = parse_decimal(f[2]);
      r.temp_c = parse_decimal(f[3]);
      r.sun_state = strip(f[4]);
      rows.push_back(std::move(r));
    } catch (const std::invalid_argument& e) {
      bad_line(line_no, e.what());
    }
  }
  return rows;
}

std::vector<CalibrationPair> read_pairs_csv(std::istream& in) {
  expect_header(in, kPairsCsvHeader);
  std::vector<CalibrationPair> pairs;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip(line);
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 2) bad_line(line_no, "expected 2 fields");
    try {
      pairs.push_back({parse_decimal(f[0]), parse_decimal(f[1])});
    } catch (const std::invalid_argument& e) {
      bad_line(line_no, e.what());
    }
  }
  return pairs;
}

void write_pairs_csv(std::ostream& out, std::span<const CalibrationPair> pairs) {
  out << kPairsCsvHeader << '\n';
  for (const auto& p : pairs) out << format_decimal(p.voltage_v) << ',' << format_decimal(p.raw) << '\n';
}

std::string serialize_calibration(const CalibrationModel& m) {
  std::string out;
  auto put = [&out](std::string_view key, double v) {
    out.append(key).append("=").append(format_decimal(v)).append("\n");
  };
  put("a3", m.a3);
  put("a2", m.a2);
  put("a1", m.a1);
  put("a0", m.a0);
  put("teros_slope", m.teros_slope);
  put("teros_intercept", m.teros_intercept);
  return out;
}

CalibrationModel parse_calibration(std::string_view text) {
  CalibrationModel m;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) bad_line(line_no, "expected key=value");
    const std::string key = strip(line.substr(0, eq));
    double value = 0.0;
    try {
      value = parse_decimal(line.substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      bad_line(line_no, e.what());
    }
    if (key == "a3") m.a3 = value;
    else if (key == "a2") m.a2 = value;
    else if (key == "a1") m.a1 = value;
    else if (key == "a0") m.a0 = value;
    else if (key == "teros_slope") m.teros_slope = value;
    else if (key == "teros_intercept") m.teros_intercept = value;
    else bad_line(line_no, "unknown key '" + key + "'");
  }
  return m;
}

}  // namespace mulenet::sensing
