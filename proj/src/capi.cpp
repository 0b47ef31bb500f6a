#include "critbubble.h"

#include <cstring>
#include <string>

#include "config.hpp"
#include "errors.hpp"
#include "experiments.hpp"

using critbubble::Error;
using critbubble::ExperimentConfig;
using critbubble::RunRecord;

struct cb_config {
    ExperimentConfig cfg;
    mutable std::string last_get;
};

struct cb_result {
    RunRecord record;
};

namespace {

thread_local std::string g_last_error;

cb_status status_of(const Error& e) {
    switch (e.kind()) {
        case Error::Kind::invalid_argument: return CB_ERROR_INVALID_ARGUMENT;
        case Error::Kind::parse: return CB_ERROR_PARSE;
        case Error::Kind::regime: return CB_ERROR_REGIME;
        case Error::Kind::numeric: return CB_ERROR_NUMERIC;
        case Error::Kind::io: return CB_ERROR_IO;
        case Error::Kind::internal: return CB_ERROR_INTERNAL;
    }
    return CB_ERROR_INTERNAL;
}

template <typename Fn>
cb_status guarded(Fn&& fn) {
    try {
        fn();
        return CB_OK;
    } catch (const Error& e) {
        g_last_error = e.what();
        return status_of(e);
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return CB_ERROR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return CB_ERROR_INTERNAL;
    }
}

} // namespace

extern "C" {

const char* cb_version(void) { return critbubble::version(); }

const char* cb_status_name(cb_status status) {
    switch (status) {
        case CB_OK: return "ok";
        case CB_ERROR_INVALID_ARGUMENT: return "invalid argument";
        case CB_ERROR_PARSE: return "parse error";
        case CB_ERROR_REGIME: return "regime error";
        case CB_ERROR_NUMERIC: return "numeric error";
        case CB_ERROR_IO: return "io error";
        case CB_ERROR_INTERNAL: return "internal error";
    }
    return "unknown";
}

const char* cb_last_error(void) { return g_last_error.c_str(); }

cb_status cb_config_create(cb_config** out) {
    if (!out) return CB_ERROR_INVALID_ARGUMENT;
    return guarded([&] { *out = new cb_config{ExperimentConfig(), {}}; });
}

cb_status cb_config_parse_text(const char* text, cb_config** out) {
    if (!text || !out) return CB_ERROR_INVALID_ARGUMENT;
    return guarded([&] {
        *out = new cb_config{ExperimentConfig::parse_text(text), {}};
    });
}

cb_status cb_config_parse_file(const char* path, cb_config** out) {
    if (!path || !out) return CB_ERROR_INVALID_ARGUMENT;
    return guarded([&] {
        *out = new cb_config{ExperimentConfig::parse_file(path), {}};
    });
}

cb_status cb_config_set(cb_config* cfg, const char* key, const char* value) {
    if (!cfg || !key || !value) return CB_ERROR_INVALID_ARGUMENT;
    return guarded([&] { cfg->cfg.set(key, value); });
}

const char* cb_config_get(const cb_config* cfg, const char* key) {
    if (!cfg || !key) return nullptr;
    auto v = cfg->cfg.get(key);
    if (!v) return nullptr;
    cfg->last_get = *v;
    return cfg->last_get.c_str();
}

void cb_config_free(cb_config* cfg) { delete cfg; }

cb_status cb_run(const cb_config* cfg, cb_result** out) {
    if (!cfg || !out) return CB_ERROR_INVALID_ARGUMENT;
    return guarded([&] { *out = new cb_result{critbubble::run(cfg->cfg)}; });
}

const char* cb_result_json(const cb_result* result) {
    return result ? result->record.payload_json.c_str() : nullptr;
}

const char* cb_result_csv(const cb_result* result) {
    if (!result || !result->record.csv) return nullptr;
    return result->record.csv->c_str();
}

const char* cb_result_record_json(const cb_result* result) {
    return result ? result->record.record_json.c_str() : nullptr;
}

int cb_result_from_cache(const cb_result* result) {
    return result && result->record.from_cache ? 1 : 0;
}

void cb_result_free(cb_result* result) { delete result; }

cb_status cb_bisect_threshold(const cb_config* cfg, double lambda_lo,
                              double lambda_hi, const char* predicate,
                              double* out_lambda) {
    if (!cfg || !predicate || !out_lambda) return CB_ERROR_INVALID_ARGUMENT;
    return guarded([&] {
        *out_lambda =
            critbubble::bisect_threshold(cfg->cfg, lambda_lo, lambda_hi, predicate);
    });
}

} // extern "C"
