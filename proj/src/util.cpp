#include "bemseval/util.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include <fmt/format.h>

#include "bemseval/error.hpp"

namespace bemseval {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig: return "configuration error";
    case ErrorKind::kIo: return "i/o error";
    case ErrorKind::kParse: return "parse error";
    case ErrorKind::kOrdering: return "ordering error";
    case ErrorKind::kCadence: return "cadence error";
    case ErrorKind::kSchema: return "schema error";
    case ErrorKind::kConflict: return "conflict error";
    case ErrorKind::kPrecondition: return "precondition error";
    case ErrorKind::kDomain: return "domain error";
    case ErrorKind::kCoverage: return "coverage error";
    case ErrorKind::kInsufficientData: return "insufficient-data error";
    case ErrorKind::kInsufficientCandidates: return "insufficient-candidates error";
    case ErrorKind::kUndefinedRatio: return "undefined-ratio error";
    case ErrorKind::kFormat: return "format error";
    case ErrorKind::kRubricViolation: return "rubric-violation error";
    case ErrorKind::kTransport: return "transport error";
    case ErrorKind::kProtocol: return "protocol error";
    case ErrorKind::kReplayMiss: return "replay-miss error";
    case ErrorKind::kReviewLock: return "review-lock error";
  }
  return "error";
}

bool is_validation_error(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig:
    case ErrorKind::kParse:
    case ErrorKind::kOrdering:
    case ErrorKind::kCadence:
    case ErrorKind::kSchema:
    case ErrorKind::kConflict:
    case ErrorKind::kPrecondition:
    case ErrorKind::kReviewLock:
      return true;
    default:
      return false;
  }
}

std::vector<std::string> split_csv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.emplace_back(line.substr(start));
      break;
    }
    fields.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

std::string format_double(double value) {
  if (!std::isfinite(value)) return "NA";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw Error(ErrorKind::kFormat, "cannot format number");
  return std::string(buf, end);
}

std::string format_fixed(double value, int digits) {
  if (!std::isfinite(value)) return "NA";
  return fmt::format("{:.{}f}", value, digits);
}

std::optional<double> parse_double(std::string_view text) {
  auto t = trim(text);
  if (t.empty()) return std::nullopt;
  const char* first = t.data();
  if (*first == '+') ++first;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), value);
  if (ec != std::errc{} || ptr != t.data() + t.size()) return std::nullopt;
  return value;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  namespace fs = std::filesystem;
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kIo, "cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw Error(ErrorKind::kIo, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorKind::kIo, "cannot rename into " + path.string());
  }
}

namespace {
bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}
}  // namespace

std::size_t count_words(std::string_view text) {
  std::size_t words = 0;
  bool in_word = false;
  for (char c : text) {
    if (is_space(c)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++words;
    }
  }
  return words;
}

std::string trim(std::string_view text) {
  std::size_t b = 0, e = text.size();
  while (b < e && is_space(text[b])) ++b;
  while (e > b && is_space(text[e - 1])) --e;
  return std::string(text.substr(b, e - b));
}

std::optional<std::string_view> first_json_object(std::string_view text) {
  const auto start = text.find('{');
  if (start == std::string_view::npos) return std::nullopt;
  int depth = 0;
  bool in_string = false, escaped = false;
  for (std::size_t i = start; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}' && --depth == 0) {
      return text.substr(start, i - start + 1);
    }
  }
  return std::nullopt;
}

}  // namespace bemseval
