#include <atomic>
#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <thread>

#include "semidecay/parallel.hpp"
#include "semidecay/types.hpp"
#include "text_util.hpp"

namespace semidecay {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::DimensionMismatch: return "dimension-mismatch";
    case ErrorCode::Domain: return "domain";
    case ErrorCode::Hypothesis: return "hypothesis";
    case ErrorCode::Unsupported: return "unsupported";
    case ErrorCode::UnboundedTruncation: return "unbounded-truncation";
    case ErrorCode::Divergence: return "divergence";
    case ErrorCode::Parse: return "parse";
    case ErrorCode::Io: return "io";
    case ErrorCode::Internal: return "internal";
  }
  return "unknown";
}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

namespace {
std::atomic<unsigned> g_workers{0};
}

void set_worker_count(unsigned workers) noexcept { g_workers.store(workers); }

unsigned worker_count() noexcept {
  const unsigned w = g_workers.load();
  if (w != 0) return w;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

namespace text {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(std::string_view s, const std::string& what) {
  const std::string t = trim(s);
  if (t.empty()) fail(ErrorCode::Parse, what + ": expected a number");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || errno == ERANGE) {
    fail(ErrorCode::Parse, what + ": cannot parse '" + t + "' as a number");
  }
  return v;
}

long long parse_int(std::string_view s, const std::string& what) {
  const std::string t = trim(s);
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(t.c_str(), &end, 10);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE) {
    fail(ErrorCode::Parse, what + ": cannot parse '" + t + "' as an integer");
  }
  return v;
}

std::vector<double> split_numbers(std::string_view s, const std::string& what) {
  std::vector<double> out;
  if (trim(s).empty()) return out;
  for (const auto& part : split(s, ',')) out.push_back(parse_double(part, what));
  return out;
}

}  // namespace text
}  // namespace semidecay
