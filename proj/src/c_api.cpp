#include "semidecay.h"

#include <cstring>
#include <new>
#include <string>

#include "semidecay/commands.hpp"
#include "semidecay/norms.hpp"
#include "semidecay/parallel.hpp"
#include "semidecay/resolvent.hpp"
#include "semidecay/spec_io.hpp"

struct sd_operator {
  semidecay::LinearOperator op;
  std::string description;
};

struct sd_params {
  semidecay::RunConfig config;
};

struct sd_report {
  semidecay::AnalysisReport report;
};

namespace {

thread_local std::string last_error;

sd_status status_of(semidecay::ErrorCode code) {
  using semidecay::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument: return SD_ERR_INVALID_ARGUMENT;
    case ErrorCode::DimensionMismatch: return SD_ERR_DIMENSION_MISMATCH;
    case ErrorCode::Domain: return SD_ERR_DOMAIN;
    case ErrorCode::Hypothesis: return SD_ERR_HYPOTHESIS;
    case ErrorCode::Unsupported: return SD_ERR_UNSUPPORTED;
    case ErrorCode::UnboundedTruncation: return SD_ERR_UNBOUNDED_TRUNCATION;
    case ErrorCode::Divergence: return SD_ERR_DIVERGENCE;
    case ErrorCode::Parse: return SD_ERR_PARSE;
    case ErrorCode::Io: return SD_ERR_IO;
    case ErrorCode::Internal: return SD_ERR_INTERNAL;
  }
  return SD_ERR_INTERNAL;
}

template <class Body>
sd_status guarded(Body&& body) {
  try {
    body();
    last_error.clear();
    return SD_OK;
  } catch (const semidecay::Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return SD_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return SD_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown failure";
    return SD_ERR_INTERNAL;
  }
}

void need(const void* p, const char* name) {
  if (!p) semidecay::fail(semidecay::ErrorCode::InvalidArgument, std::string(name) + " must not be NULL");
}

sd_operator* wrap(semidecay::LinearOperator op) {
  auto* out = new sd_operator{op, op.describe()};
  return out;
}

sd_operator* from_bundle(const semidecay::OperatorBundle& b, const char* role) {
  const char* r = role ? role : "T";
  const auto* op = b.get(r);
  if (!op) semidecay::fail(semidecay::ErrorCode::InvalidArgument, b.source + ": no operator with role " + r);
  return wrap(*op);
}

const semidecay::LinearOperator* opt(const sd_operator* op) { return op ? &op->op : nullptr; }

semidecay::ComplexVector read_vector(const double* re, const double* im, size_t n) {
  semidecay::ComplexVector x(static_cast<Eigen::Index>(n));
  for (size_t i = 0; i < n; ++i) x(static_cast<Eigen::Index>(i)) = {re[i], im ? im[i] : 0.0};
  return x;
}

}  // namespace

extern "C" {

const char* sd_version(void) { return semidecay::library_version(); }

const char* sd_last_error(void) { return last_error.c_str(); }

const char* sd_status_name(sd_status status) {
  switch (status) {
    case SD_OK: return "ok";
    case SD_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case SD_ERR_DIMENSION_MISMATCH: return "dimension_mismatch";
    case SD_ERR_DOMAIN: return "domain";
    case SD_ERR_HYPOTHESIS: return "hypothesis";
    case SD_ERR_UNSUPPORTED: return "unsupported";
    case SD_ERR_UNBOUNDED_TRUNCATION: return "unbounded_truncation";
    case SD_ERR_DIVERGENCE: return "divergence";
    case SD_ERR_PARSE: return "parse";
    case SD_ERR_IO: return "io";
    case SD_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

sd_status sd_set_workers(unsigned workers) {
  return guarded([&] { semidecay::set_worker_count(workers); });
}

sd_status sd_operator_from_json(const char* json_text, const char* role, sd_operator** out) {
  return guarded([&] {
    need(json_text, "json_text");
    need(out, "out");
    *out = from_bundle(semidecay::parse_bundle(json_text), role);
  });
}

sd_status sd_operator_load(const char* path, const char* role, sd_operator** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = from_bundle(semidecay::load_bundle(path), role);
  });
}

sd_status sd_operator_dense(const double* real, const double* imag, size_t rows, size_t cols, sd_operator** out) {
  return guarded([&] {
    need(real, "real");
    need(out, "out");
    if (rows == 0 || cols == 0) semidecay::fail(semidecay::ErrorCode::InvalidArgument, "matrix must be non-empty");
    semidecay::DenseMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (size_t i = 0; i < rows; ++i) {
      for (size_t j = 0; j < cols; ++j) {
        const size_t at = i * cols + j;
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = {real[at], imag ? imag[at] : 0.0};
      }
    }
    *out = wrap(semidecay::LinearOperator::dense(std::move(m)));
  });
}

sd_status sd_operator_diagonal(const char* symbol, double space_exponent, sd_operator** out) {
  return guarded([&] {
    need(symbol, "symbol");
    need(out, "out");
    const double p = space_exponent == 0.0 ? semidecay::kSupNorm : space_exponent;
    *out = wrap(semidecay::LinearOperator::diagonal(semidecay::DiagonalSymbol::parse(symbol), p));
  });
}

void sd_operator_free(sd_operator* op) { delete op; }

sd_status sd_operator_describe(const sd_operator* op, char* buffer, size_t capacity, size_t* needed) {
  return guarded([&] {
    need(op, "op");
    const std::string& text = op->description;
    if (needed) *needed = text.size() + 1;
    if (buffer && capacity > 0) {
      const size_t n = std::min(capacity - 1, text.size());
      std::memcpy(buffer, text.data(), n);
      buffer[n] = '\0';
    }
  });
}

sd_status sd_operator_norm(const sd_operator* op, double* value, double* error) {
  return guarded([&] {
    need(op, "op");
    need(value, "value");
    const auto r = semidecay::operator_norm(op->op);
    *value = r.value;
    if (error) *error = r.error;
  });
}

sd_status sd_power_norm(const sd_operator* T, const sd_operator* left, const sd_operator* right, long long n,
                        double* value) {
  return guarded([&] {
    need(T, "T");
    need(value, "value");
    if (n < 0) semidecay::fail(semidecay::ErrorCode::InvalidArgument, "n must be non-negative");
    *value = semidecay::composed_norm(opt(left), T->op, semidecay::ScalarMap::pow(n), opt(right)).value;
  });
}

sd_status sd_resolvent_norm(const sd_operator* T, const sd_operator* left, const sd_operator* right, double lambda_re,
                            double lambda_im, int k, double* value) {
  return guarded([&] {
    need(T, "T");
    need(value, "value");
    if (k < 1) semidecay::fail(semidecay::ErrorCode::InvalidArgument, "k must be at least 1");
    const semidecay::Complex lambda{lambda_re, lambda_im};
    if (!(std::abs(lambda) > 1.0)) semidecay::fail(semidecay::ErrorCode::Domain, "need |lambda| > 1");
    *value = semidecay::composed_norm(opt(left), T->op, semidecay::ScalarMap::resolvent(lambda, k), opt(right)).value;
  });
}

sd_status sd_operator_apply(const sd_operator* op, const double* x_re, const double* x_im, size_t n, double* y_re,
                            double* y_im) {
  return guarded([&] {
    need(op, "op");
    need(x_re, "x_re");
    need(y_re, "y_re");
    need(y_im, "y_im");
    const semidecay::ComplexVector y = op->op.apply(read_vector(x_re, x_im, n));
    if (static_cast<size_t>(y.size()) != n) {
      semidecay::fail(semidecay::ErrorCode::DimensionMismatch,
                      "output has " + std::to_string(y.size()) + " entries, buffers hold " + std::to_string(n));
    }
    for (size_t i = 0; i < n; ++i) {
      y_re[i] = y(static_cast<Eigen::Index>(i)).real();
      y_im[i] = y(static_cast<Eigen::Index>(i)).imag();
    }
  });
}

sd_status sd_params_create(sd_params** out) {
  return guarded([&] {
    need(out, "out");
    *out = new sd_params{};
  });
}

sd_status sd_params_set(sd_params* params, const char* key, const char* value) {
  return guarded([&] {
    need(params, "params");
    need(key, "key");
    need(value, "value");
    params->config.params[key] = value;
  });
}

void sd_params_free(sd_params* params) { delete params; }

size_t sd_command_count(void) { return semidecay::command_names().size(); }

const char* sd_command_name(size_t index) {
  const auto& names = semidecay::command_names();
  return index < names.size() ? names[index].c_str() : nullptr;
}

sd_status sd_run(const char* command, const sd_params* params, sd_report** out) {
  return guarded([&] {
    need(command, "command");
    need(out, "out");
    semidecay::RunConfig config = params ? params->config : semidecay::RunConfig{};
    config.command = command;
    *out = new sd_report{semidecay::run_analysis(config)};
  });
}

sd_verdict sd_report_verdict(const sd_report* report) {
  if (!report) return SD_VERDICT_HYPOTHESIS_FAILED;
  switch (report->report.verdict) {
    case semidecay::Verdict::Pass: return SD_VERDICT_PASS;
    case semidecay::Verdict::Estimate: return SD_VERDICT_ESTIMATE;
    case semidecay::Verdict::HypothesisFailed: return SD_VERDICT_HYPOTHESIS_FAILED;
  }
  return SD_VERDICT_HYPOTHESIS_FAILED;
}

const char* sd_report_label(const sd_report* report) { return report ? report->report.label.c_str() : ""; }
const char* sd_report_json(const sd_report* report) { return report ? report->report.body.c_str() : ""; }
const char* sd_report_profile_csv(const sd_report* report) { return report ? report->report.profile_csv.c_str() : ""; }
const char* sd_report_plotdata_csv(const sd_report* report) {
  return report ? report->report.plotdata_csv.c_str() : "";
}

sd_status sd_report_write(const sd_report* report, const char* directory, const char* timestamp) {
  return guarded([&] {
    need(report, "report");
    need(directory, "directory");
    semidecay::write_report(report->report, directory, timestamp ? timestamp : semidecay::utc_timestamp());
  });
}

void sd_report_free(sd_report* report) { delete report; }

}  // extern "C"
