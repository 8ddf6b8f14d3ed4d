#include "volt/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "volt/errors.hpp"

namespace volt {

namespace {

bool parse_row(const std::string& line, double& a, double& b) {
  std::string cleaned = line;
  for (char& c : cleaned) {
    if (c == ',' || c == ';' || c == '\t' || c == '\r') c = ' ';
  }
  std::istringstream ss(cleaned);
  if (!(ss >> a >> b)) return false;
  std::string rest;
  if (ss >> rest) return false;  // more than two columns
  return true;
}

bool blank(const std::string& line) {
  for (char c : line) {
    if (c != ' ' && c != '\t' && c != '\r') return false;
  }
  return true;
}

}  // namespace

SignalRecord parse_signal_csv(std::istream& in, const std::string& origin) {
  std::vector<double> us, ys;
  std::string line;
  long line_no = 0;
  bool first_data_line = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    double u, y;
    if (!parse_row(line, u, y)) {
      if (first_data_line) {  // header row
        first_data_line = false;
        continue;
      }
      throw DataFormatError(origin + ":" + std::to_string(line_no) +
                            ": expected two numeric columns, got '" + line + "'");
    }
    first_data_line = false;
    us.push_back(u);
    ys.push_back(y);
  }
  if (us.empty()) throw DataFormatError(origin + ": no data rows");
  SignalRecord record;
  record.u = Eigen::Map<const Eigen::VectorXd>(us.data(), static_cast<Eigen::Index>(us.size()));
  record.y = Eigen::Map<const Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size()));
  return record;
}

SignalRecord read_signal_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataFormatError("cannot open data file: " + path);
  return parse_signal_csv(in, path);
}

void write_signal_csv(const SignalRecord& record, std::ostream& out) {
  out << "u,y\n";
  for (Eigen::Index i = 0; i < record.u.size(); ++i) {
    out << format_double(record.u[i]) << "," << format_double(record.y[i]) << "\n";
  }
}

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataFormatError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw DataFormatError("cannot write file: " + path);
  out << content;
}

}  // namespace volt
