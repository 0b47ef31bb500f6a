// Exercises the public C surface the way an external caller would: only
// critbubble.h, no internal headers.
#include <cassert>
#include <cstdio>
#include <cstring>
#include <string>

#include "critbubble.h"

#define REQUIRE(cond)                                                     \
    do {                                                                  \
        if (!(cond)) {                                                    \
            std::fprintf(stderr, "FAILED %s:%d: %s\n", __FILE__, __LINE__, \
                         #cond);                                          \
            return 1;                                                     \
        }                                                                 \
    } while (0)

int main() {
    REQUIRE(std::strcmp(cb_version(), "0.1.0") == 0);
    REQUIRE(std::strcmp(cb_status_name(CB_OK), "ok") == 0);

    // config lifecycle
    cb_config* cfg = nullptr;
    REQUIRE(cb_config_create(&cfg) == CB_OK);
    REQUIRE(cb_config_set(cfg, "n", "5") == CB_OK);
    REQUIRE(cb_config_set(cfg, "experiment", "constants") == CB_OK);
    REQUIRE(cb_config_set(cfg, "cache_dir", "/tmp/critbubble_capi_cache") == CB_OK);
    REQUIRE(std::strcmp(cb_config_get(cfg, "n"), "5") == 0);
    REQUIRE(cb_config_get(cfg, "lambda") == nullptr);

    // unknown keys are parse errors with a useful message
    REQUIRE(cb_config_set(cfg, "warp_factor", "9") == CB_ERROR_PARSE);
    REQUIRE(std::string(cb_last_error()).find("warp_factor") != std::string::npos);

    // run + payload
    std::remove("/tmp/critbubble_capi_cache");
    cb_result* res = nullptr;
    REQUIRE(cb_run(cfg, &res) == CB_OK);
    const char* json = cb_result_json(res);
    REQUIRE(json != nullptr);
    REQUIRE(std::string(json).find("\"K1\"") != std::string::npos);
    REQUIRE(std::string(json).find("\"K3\"") != std::string::npos);
    REQUIRE(cb_result_csv(res) == nullptr);  // constants has no tabular output
    REQUIRE(cb_result_record_json(res) != nullptr);
    const std::string first_payload = json;
    cb_result_free(res);

    // cached replay is byte-identical
    res = nullptr;
    REQUIRE(cb_run(cfg, &res) == CB_OK);
    REQUIRE(cb_result_from_cache(res) == 1);
    REQUIRE(first_payload == cb_result_json(res));
    cb_result_free(res);
    cb_config_free(cfg);

    // parse text + regime error propagation (K3 at n=4 is reported null, so
    // drive a genuine error instead: gamma_k precondition)
    cb_config* bad = nullptr;
    REQUIRE(cb_config_parse_text("experiment=minimize\nn=5\n", &bad) == CB_OK);
    cb_result* r2 = nullptr;
    REQUIRE(cb_run(bad, &r2) == CB_ERROR_PARSE);  // missing lambda
    REQUIRE(std::string(cb_last_error()).find("lambda") != std::string::npos);
    cb_config_free(bad);

    // malformed config text
    cb_config* nope = nullptr;
    REQUIRE(cb_config_parse_text("gibberish\n", &nope) == CB_ERROR_PARSE);

    // expansion run exposes the CSV
    cb_config* exp = nullptr;
    REQUIRE(cb_config_parse_text(
                "experiment=expansion\nn=4\nk=2\nbeta=1\nlambda=8\npoints=6\n"
                "cache_dir=/tmp/critbubble_capi_cache\n",
                &exp) == CB_OK);
    cb_result* r3 = nullptr;
    REQUIRE(cb_run(exp, &r3) == CB_OK);
    REQUIRE(cb_result_csv(r3) != nullptr);
    REQUIRE(std::string(cb_result_csv(r3)).rfind("eps,", 0) == 0);
    cb_result_free(r3);

    // bisection through the C surface
    double thr = 0.0;
    REQUIRE(cb_bisect_threshold(exp, 2.0, 6.0, "slope-sign", &thr) == CB_OK);
    REQUIRE(thr > 3.0 && thr < 5.0);
    REQUIRE(cb_bisect_threshold(exp, 2.0, 6.0, "vibes", &thr) ==
            CB_ERROR_INVALID_ARGUMENT);
    cb_config_free(exp);

    // null-argument hygiene
    REQUIRE(cb_config_create(nullptr) == CB_ERROR_INVALID_ARGUMENT);
    REQUIRE(cb_run(nullptr, &res) == CB_ERROR_INVALID_ARGUMENT);
    REQUIRE(cb_result_json(nullptr) == nullptr);

    std::printf("capi_tests: all checks passed\n");
    return 0;
}
