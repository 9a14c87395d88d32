#include "streamemu/streamemu.h"

#include <exception>
#include <memory>
#include <new>
#include <string>

#include "streamemu/errors.hpp"
#include "streamemu/experiments.hpp"
#include "streamemu/secretary.hpp"

struct se_config {
  streamemu::experiments::Config config;
  std::string scratch;
};

struct se_report {
  streamemu::experiments::Report report;
};

namespace {

thread_local std::string lastError;

template <class F>
se_status guarded(F&& body) noexcept {
  try {
    body();
    lastError.clear();
    return SE_OK;
  } catch (const streamemu::Error& e) {
    lastError = e.what();
    return static_cast<se_status>(e.code());
  } catch (const std::bad_alloc&) {
    lastError = "out of memory";
    return SE_INTERNAL_ERROR;
  } catch (const std::exception& e) {
    lastError = e.what();
    return SE_INTERNAL_ERROR;
  } catch (...) {
    lastError = "unknown error";
    return SE_INTERNAL_ERROR;
  }
}

void requireArg(const void* p, const char* what) {
  streamemu::require(p != nullptr, streamemu::ErrorCode::InvalidArgument,
                     std::string(what) + " must not be null");
}

}  // namespace

extern "C" {

const char* se_version(void) { return "1.0.0"; }

const char* se_status_name(se_status status) {
  switch (status) {
    case SE_OK: return "Ok";
    case SE_INTERNAL_ERROR: return "InternalError";
    default: break;
  }
  const auto name = streamemu::errorCodeName(static_cast<streamemu::ErrorCode>(status));
  return name.data();
}

const char* se_last_error(void) { return lastError.c_str(); }

se_config* se_config_create(void) {
  se_config* out = nullptr;
  guarded([&] { out = new se_config(); });
  return out;
}

void se_config_free(se_config* config) { delete config; }

se_status se_config_set(se_config* config, const char* key, const char* value) {
  return guarded([&] {
    requireArg(config, "config");
    requireArg(key, "key");
    requireArg(value, "value");
    config->config.set(key, value);
  });
}

se_status se_config_load_text(se_config* config, const char* text) {
  return guarded([&] {
    requireArg(config, "config");
    requireArg(text, "text");
    config->config.loadText(text);
  });
}

se_status se_config_load_file(se_config* config, const char* path) {
  return guarded([&] {
    requireArg(config, "config");
    requireArg(path, "path");
    config->config.loadFile(path);
  });
}

se_status se_config_get(se_config* config, const char* key, const char** value) {
  return guarded([&] {
    requireArg(config, "config");
    requireArg(key, "key");
    requireArg(value, "value");
    auto v = config->config.get(key);
    streamemu::require(v.has_value(), streamemu::ErrorCode::ConfigError,
                       std::string("unknown config key '") + key + "'");
    config->scratch = *v;
    *value = config->scratch.c_str();
  });
}

se_status se_run(const char* command, const se_config* config, se_report** report) {
  return guarded([&] {
    requireArg(command, "command");
    requireArg(config, "config");
    requireArg(report, "report");
    *report = nullptr;
    auto out = std::make_unique<se_report>();
    out->report = streamemu::experiments::runCommand(command, config->config);
    *report = out.release();
  });
}

const char* se_report_text(const se_report* report) {
  return report ? report->report.csv.c_str() : "";
}

size_t se_report_length(const se_report* report) {
  return report ? report->report.csv.size() : 0;
}

int se_report_failed(const se_report* report) {
  return report && report->report.failed ? 1 : 0;
}

void se_report_free(se_report* report) { delete report; }

se_status se_secretary_threshold(uint64_t n, uint64_t* threshold) {
  return guarded([&] {
    requireArg(threshold, "threshold");
    *threshold = streamemu::secretary::optimalPolicy(n).threshold;
  });
}

se_status se_secretary_success_probability(uint64_t n, double* probability) {
  return guarded([&] {
    requireArg(probability, "probability");
    *probability =
        streamemu::secretary::successProbability(streamemu::secretary::optimalPolicy(n));
  });
}

}  // extern "C"
