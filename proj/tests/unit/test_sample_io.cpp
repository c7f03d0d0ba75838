#include <doctest.h>

#include <sstream>

#include "drmsurv/sample_io.hpp"

using namespace drmsurv;

namespace {

std::string error_text(const std::string& csv, Scheme scheme) {
  std::istringstream in(csv);
  try {
    parse_sample_csv(in, scheme, "data.csv");
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("RC csv with header and blank entry") {
  std::istringstream in("entry,time,status\n,1,1\n,2,0\n,3,1\n");
  const auto s = parse_sample_csv(in, Scheme::RC);
  CHECK(s.times() == std::vector<double>{1, 2, 3});
  CHECK(s.status() == std::vector<int>{1, 0, 1});
  CHECK_FALSE(s.entries().has_value());
}

TEST_CASE("two-column and headerless layouts") {
  std::istringstream a("time,status\n1.5,1\n2,0\n");
  CHECK(parse_sample_csv(a, Scheme::RC).times() == std::vector<double>{1.5, 2});
  std::istringstream b("1.5,1\n2,0\n");
  CHECK(parse_sample_csv(b, Scheme::RC).size() == 2);
}

TEST_CASE("LBRC csv needs entries") {
  std::istringstream in("entry,time,status\n0.5,2,1\n1,3,0\n");
  const auto s = parse_sample_csv(in, Scheme::LBRC);
  REQUIRE(s.entries().has_value());
  CHECK(*s.entries() == std::vector<double>{0.5, 1});
  CHECK(error_text("entry,time,status\n,2,1\n", Scheme::LBRC).find("data.csv:2") !=
        std::string::npos);
}

TEST_CASE("malformed rows name the line") {
  const std::string msg = error_text("time,status\n1,1\nabc,1\n", Scheme::RC);
  CHECK(msg.find("data.csv:3") != std::string::npos);
  CHECK(error_text("time,status\n1,7\n", Scheme::RC).find("data.csv:2") !=
        std::string::npos);
  CHECK_FALSE(error_text("time,status\n", Scheme::RC).empty());
}

TEST_CASE("write then read round-trips exactly") {
  const auto s = ObservedSample::length_biased({0.1, 1.0 / 3.0}, {0.7, 2.0 / 3.0},
                                               {1, 0});
  std::ostringstream out;
  write_sample_csv(out, s);
  std::istringstream in(out.str());
  const auto back = parse_sample_csv(in, Scheme::LBRC);
  CHECK(back.times() == s.times());
  CHECK(back.status() == s.status());
  CHECK(*back.entries() == *s.entries());
}

TEST_CASE("format_double is shortest round-trip") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(2.0) == "2");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}
