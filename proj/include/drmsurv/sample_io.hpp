#ifndef DRMSURV_SAMPLE_IO_HPP_
#define DRMSURV_SAMPLE_IO_HPP_

#include <iosfwd>
#include <string>

#include "drmsurv/core.hpp"

namespace drmsurv {

// CSV layout: optional header `entry,time,status`, one subject per row.
// The entry field is blank for RC rows and required for LTRC/LBRC rows.
// A two-column `time,status` layout is also accepted. Numbers are parsed
// with '.' as the decimal separator regardless of locale.

ObservedSample parse_sample_csv(std::istream& in, Scheme scheme,
                                const std::string& source = "<stream>");
ObservedSample read_sample_csv(const std::string& path, Scheme scheme);

/// Shortest decimal text that reads back to exactly `x`.
std::string format_double(double x);

void write_sample_csv(std::ostream& out, const ObservedSample& sample);
void write_sample_csv(const std::string& path, const ObservedSample& sample);

}  // namespace drmsurv

#endif  // DRMSURV_SAMPLE_IO_HPP_
