#include "drmsurv/sample_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace drmsurv {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(
        start, pos == std::string::npos ? std::string::npos : pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

bool parse_double(const std::string& field, double& value) {
  const char* first = field.data();
  const char* last = first + field.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  return ec == std::errc() && ptr == last;
}

[[noreturn]] void row_error(const std::string& source, std::size_t line,
                            const std::string& msg) {
  std::ostringstream os;
  os << source << ":" << line << ": " << msg;
  throw Error(ErrorKind::InvalidInput, os.str());
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

ObservedSample parse_sample_csv(std::istream& in, Scheme scheme,
                                const std::string& source) {
  std::vector<double> entries, times;
  std::vector<int> status;
  const bool truncated = scheme == Scheme::LTRC || scheme == Scheme::LBRC;

  int col_entry = 0, col_time = 1, col_status = 2;
  std::size_t ncols = 3;
  bool first_row = true;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split(line);

    if (first_row) {
      first_row = false;
      double dummy;
      const bool numeric = fields.size() >= 2 &&
                           parse_double(fields[fields.size() - 2], dummy);
      if (!numeric) {
        col_entry = col_time = col_status = -1;
        for (std::size_t c = 0; c < fields.size(); ++c) {
          if (fields[c] == "entry") col_entry = static_cast<int>(c);
          else if (fields[c] == "time") col_time = static_cast<int>(c);
          else if (fields[c] == "status") col_status = static_cast<int>(c);
          else row_error(source, lineno, "unknown column '" + fields[c] + "'");
        }
        if (col_time < 0 || col_status < 0)
          row_error(source, lineno, "header must name time and status");
        ncols = fields.size();
        continue;
      }
      if (fields.size() == 2) {
        col_entry = -1;
        col_time = 0;
        col_status = 1;
        ncols = 2;
      }
    }

    if (fields.size() != ncols) {
      std::ostringstream os;
      os << "expected " << ncols << " fields, found " << fields.size();
      row_error(source, lineno, os.str());
    }
    double t = 0.0, s = 0.0, a = 0.0;
    if (!parse_double(fields[static_cast<std::size_t>(col_time)], t))
      row_error(source, lineno, "malformed time '" +
                                    fields[static_cast<std::size_t>(col_time)] +
                                    "'");
    if (!parse_double(fields[static_cast<std::size_t>(col_status)], s) ||
        (s != 0.0 && s != 1.0))
      row_error(source, lineno, "status must be 0 or 1");
    if (!(t > 0.0)) row_error(source, lineno, "time must be positive");
    bool has_entry = false;
    if (col_entry >= 0) {
      const auto& f = fields[static_cast<std::size_t>(col_entry)];
      if (!f.empty()) {
        if (!parse_double(f, a)) row_error(source, lineno, "malformed entry '" + f + "'");
        if (a < 0.0 || a >= t)
          row_error(source, lineno, "entry must satisfy 0 <= entry < time");
        has_entry = true;
      }
    }
    if (truncated && !has_entry)
      row_error(source, lineno, "missing entry time for a " +
                                    std::string(to_string(scheme)) + " sample");
    if (!truncated && has_entry)
      row_error(source, lineno, "entry time given for a " +
                                    std::string(to_string(scheme)) + " sample");
    times.push_back(t);
    status.push_back(static_cast<int>(s));
    entries.push_back(a);
  }
  if (times.empty()) row_error(source, lineno, "no data rows");

  if (truncated)
    return ObservedSample(std::move(times), std::move(status), scheme,
                          std::move(entries));
  return ObservedSample(std::move(times), std::move(status), scheme);
}

ObservedSample read_sample_csv(const std::string& path, Scheme scheme) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorKind::InvalidInput, "cannot open sample file " + path);
  return parse_sample_csv(in, scheme, path);
}

void write_sample_csv(std::ostream& out, const ObservedSample& sample) {
  out << "entry,time,status\n";
  for (std::size_t i = 0; i < sample.size(); ++i) {
    if (sample.entries()) out << format_double((*sample.entries())[i]);
    out << ',' << format_double(sample.times()[i]) << ','
        << sample.status()[i] << '\n';
  }
}

void write_sample_csv(const std::string& path, const ObservedSample& sample) {
  std::ofstream out(path);
  if (!out)
    throw Error(ErrorKind::InvalidInput, "cannot write sample file " + path);
  write_sample_csv(out, sample);
}

}  // namespace drmsurv
