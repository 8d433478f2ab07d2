#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace pikan::csv {

using Row = std::vector<std::string>;

// RFC-4180 reader: quoted fields, doubled quotes, CRLF or LF line endings.
// Each returned row carries the 1-based physical line it started on.
struct Record {
  std::size_t line = 0;
  Row fields;
};

std::vector<Record> parse(std::istream& in);
std::vector<Record> read_file(const std::filesystem::path& path);

// Quotes a field only when it contains a comma, quote, CR or LF.
std::string quote(std::string_view field);

// Shortest decimal that round-trips to the same double.
std::string format_double(double value);

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}
  void write_row(const Row& fields);

 private:
  std::ostream& out_;
};

}  // namespace pikan::csv
