#ifndef VOLT_IO_HPP
#define VOLT_IO_HPP

#include <Eigen/Core>
#include <string>

namespace volt {

// Two-column signal record: column 1 = u, column 2 = y. A non-numeric first
// line is treated as a header. Separators: comma, semicolon, or whitespace.
struct SignalRecord {
  Eigen::VectorXd u;
  Eigen::VectorXd y;
};

SignalRecord read_signal_csv(const std::string& path);
SignalRecord parse_signal_csv(std::istream& in, const std::string& origin);
void write_signal_csv(const SignalRecord& record, std::ostream& out);

// Canonical float formatting used by every CSV writer ("%.17g"): identical
// values always serialize to identical bytes.
std::string format_double(double value);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace volt

#endif  // VOLT_IO_HPP
