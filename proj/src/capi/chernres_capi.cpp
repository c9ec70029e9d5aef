#include "chernres.h"

#include <filesystem>
#include <fstream>
#include <string>

#include "chernres/scenario.hpp"

struct chernres_scenario {
  chernres::Scenario s;
  std::string canonical;
};

struct chernres_report {
  std::string json;
  std::string csv;
  bool passed = false;
};

namespace {

thread_local std::string last_error;

chernres_status fail(chernres_status code, const std::string& msg) {
  last_error = msg;
  return code;
}

// Runs f, mapping exceptions to status codes.
template <class F>
chernres_status guarded(F&& f) {
  try {
    last_error.clear();
    return f();
  } catch (const chernres::ScenarioError& e) {
    return fail(CHERNRES_INVALID_SCENARIO, e.what());
  } catch (const chernres::ValidationError& e) {
    return fail(CHERNRES_INVALID_ARGUMENT, e.what());
  } catch (const chernres::Error& e) {
    return fail(CHERNRES_NUMERICAL, e.what());
  } catch (const std::bad_alloc&) {
    return fail(CHERNRES_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(CHERNRES_INTERNAL, e.what());
  }
}

chernres::RunOptions convert(const chernres_run_options* opt) {
  chernres::RunOptions o;
  o.threads = chernres::default_threads();
  if (!opt) return o;
  o.seed = opt->seed;
  if (opt->threads > 0) o.threads = opt->threads;
  o.tolerance_scale = opt->tolerance_scale;
  if (opt->ladder && opt->ladder_len) o.ladder.assign(opt->ladder, opt->ladder + opt->ladder_len);
  if (opt->cutoff) o.cutoff = chernres::parse_cutoff(opt->cutoff);
  return o;
}

chernres_report* make_report(const nlohmann::ordered_json& j) {
  auto* r = new chernres_report;
  r->json = j.dump(2) + "\n";
  r->csv = chernres::ladder_csv(j);
  r->passed = chernres::report_passed(j);
  return r;
}

chernres_status adopt(chernres::Scenario s, chernres_scenario** out) {
  auto* h = new chernres_scenario{std::move(s), {}};
  h->canonical = h->s.canonical.dump(2) + "\n";
  *out = h;
  return CHERNRES_OK;
}

}  // namespace

extern "C" {

const char* chernres_version(void) { return "1.0.0"; }

const char* chernres_last_error(void) { return last_error.c_str(); }

void chernres_run_options_init(chernres_run_options* opt) {
  if (!opt) return;
  opt->seed = 1;
  opt->threads = 0;
  opt->tolerance_scale = 1.0;
  opt->ladder = nullptr;
  opt->ladder_len = 0;
  opt->cutoff = nullptr;
}

chernres_status chernres_scenario_load(const char* path, chernres_scenario** out) {
  if (!path || !out) return fail(CHERNRES_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  if (!std::filesystem::is_regular_file(path)) return fail(CHERNRES_IO, std::string("cannot open scenario file '") + path + "'");
  return guarded([&] { return adopt(chernres::load_scenario(path), out); });
}

chernres_status chernres_scenario_parse(const char* text, chernres_scenario** out) {
  if (!text || !out) return fail(CHERNRES_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] { return adopt(chernres::parse_scenario(text), out); });
}

void chernres_scenario_free(chernres_scenario* s) { delete s; }

const char* chernres_scenario_name(const chernres_scenario* s) { return s ? s->s.name.c_str() : nullptr; }

int chernres_scenario_dim(const chernres_scenario* s) { return s ? s->s.n : 0; }

const char* chernres_scenario_canonical(const chernres_scenario* s) { return s ? s->canonical.c_str() : nullptr; }

chernres_status chernres_run(const chernres_scenario* s, const chernres_run_options* opt, chernres_report** out) {
  if (!s || !out) return fail(CHERNRES_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = make_report(chernres::run_scenario(s->s, convert(opt)));
    return CHERNRES_OK;
  });
}

chernres_status chernres_verify(const chernres_scenario* s, const char* suite, const chernres_run_options* opt, chernres_report** out) {
  if (!s || !suite || !out) return fail(CHERNRES_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = make_report(chernres::verify_scenario(s->s, suite, convert(opt)));
    return CHERNRES_OK;
  });
}

chernres_status chernres_oracle(const chernres_scenario* s, const chernres_run_options* opt, chernres_report** out) {
  if (!s || !out) return fail(CHERNRES_INVALID_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    *out = make_report(chernres::oracle_report(s->s, convert(opt)));
    return CHERNRES_OK;
  });
}

void chernres_report_free(chernres_report* r) { delete r; }

const char* chernres_report_json(const chernres_report* r) { return r ? r->json.c_str() : nullptr; }

const char* chernres_report_csv(const chernres_report* r) { return r ? r->csv.c_str() : nullptr; }

int chernres_report_passed(const chernres_report* r) { return r && r->passed ? 1 : 0; }

chernres_status chernres_report_write(const chernres_report* r, const char* dir) {
  if (!r || !dir) return fail(CHERNRES_INVALID_ARGUMENT, "null argument");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) return fail(CHERNRES_IO, std::string("cannot create '") + dir + "': " + ec.message());
  const std::filesystem::path base(dir);
  for (const auto& [name, body] : {std::pair{"report.json", &r->json}, std::pair{"ladders.csv", &r->csv}}) {
    std::ofstream f(base / name, std::ios::binary);
    f << *body;
    if (!f) return fail(CHERNRES_IO, "cannot write " + (base / name).string());
  }
  return CHERNRES_OK;
}

}  // extern "C"
