// One line per acceptance criterion. Usage:
//   acceptance --cli <momlab binary> --schemas <dir> --validator <script> --out <dir>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "momlab/checks.hpp"

using namespace momlab;
namespace fs = std::filesystem;

namespace {

struct Line {
  int id;
  CheckResult r;
  double limit;  // seconds, 0 = none
};

bool report(const Line& l) {
  bool in_time = l.limit <= 0 || l.r.seconds < l.limit;
  bool ok = l.r.pass && in_time;
  std::printf("[%s] %2d %-44s %8.1fs%s  %s\n", ok ? "PASS" : "FAIL", l.id, l.r.name.c_str(),
              l.r.seconds, l.limit > 0 ? (" (limit " + std::to_string(int(l.limit)) + "s)").c_str() : "",
              l.r.detail.c_str());
  std::fflush(stdout);
  return ok;
}

// Every zero list the run left in the cache, paired with its conjugate.
ZeroStore load_cache(const std::string& root) {
  ZeroStore store;
  fs::path dir = fs::path(root) / "zeros";
  if (!fs::exists(dir)) return store;
  for (const auto& qdir : fs::directory_iterator(dir)) {
    std::string qn = qdir.path().filename().string();
    if (qn.rfind("q=", 0) != 0) continue;
    int q = std::stoi(qn.substr(2));
    for (const auto& f : fs::directory_iterator(qdir.path())) {
      std::string name = f.path().filename().string();
      if (name.rfind("chi=", 0) != 0 || f.path().extension() != ".tsv") continue;
      int c = std::stoi(name.substr(4));
      ZeroList l;
      if (!cache_load(root, q, c, l)) throw IoError("unreadable cache entry " + f.path().string());
      store.insert(l);
    }
  }
  return store;
}

CheckResult run_cli(const std::string& cli, const std::string& schemas,
                    const std::string& validator, const std::string& out,
                    const std::string& cache) {
  CheckResult r{"cli", "omega-search and histogram at q=101", false, "", 0};
  auto t0 = std::chrono::steady_clock::now();
  fs::remove_all(out);
  std::string common = " --out '" + out + "' --cache-dir '" + cache + "' > /dev/null";
  std::vector<std::string> cmds = {
      "'" + cli + "' omega-search --q 101 --mode m2m --grid 1000:1e7:40" + common,
      "'" + cli + "' omega-search --q 101 --mode raw --grid 1000:1e7:40" + common,
      "'" + cli + "' histogram --q 101 --x 1e7" + common,
      "python3 '" + validator + "' '" + schemas + "' '" + out + "' omega-search histogram"};
  int failed = 0;
  std::string detail;
  for (const auto& c : cmds) {
    int rc = std::system(c.c_str());
    if (rc != 0) {
      ++failed;
      detail += "exit " + std::to_string(rc) + " from: " + c + "; ";
    }
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.pass = failed == 0;
  r.detail = failed ? detail : "3 runs, outputs schema-valid (report-only)";
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::string cli, schemas, validator, out = "acceptance-out";
  app.add_option("--cli", cli, "momlab binary")->required();
  app.add_option("--schemas", schemas, "schema directory")->required();
  app.add_option("--validator", validator, "validate_outputs.py")->required();
  app.add_option("--out", out, "scratch output directory");
  CLI11_PARSE(app, argc, argv);

  CheckEnv env;
  env.cache_root = default_cache_root();
  std::printf("zero cache: %s\n", env.cache_root.c_str());

  bool all = true;
  all &= report({1, check_characters(50, 200, env), 60});
  all &= report({2, check_conductor_moment(3, 200, 1e-12, env), 5});
  all &= report({3,
                 check_combinatorics({{1, 2}, {1, 3}, {1, 4}, {2, 2}, {2, 3}}, {{1, 2}, {1, 4}},
                                     {{2, 4}}, env),
                 300});
  all &= report({4, check_explicit_formula({3, 4, 5, 7}, {1, 2, 3, 4, 5, 6}, 200, 400, env), 600});
  all &= report({6, check_moment_identities(12, 4, {50, 500, 5000}, 1e-9, env), 0});
  all &= report({7, check_delta(5, {1, 10, 100}, env), 0});
  all &= report(
      {8, check_spectral_vs_empirical({3, 5}, {{1, 2}, {2, 2}}, 50, "selfconv:sech", env), 900});
  all &= report({9, check_li_monte_carlo({3, 5, 7}, 100000, 1, env), 300});
  all &= report({10, run_cli(cli, schemas, validator, out, env.cache_root), 600});
  // Last, so that it sees every list the runs above computed.
  {
    auto t0 = std::chrono::steady_clock::now();
    ZeroStore store = load_cache(env.cache_root);
    CheckResult r = check_zero_counts(store, env);
    r.seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    all &= report({5, r, 0});
  }
  std::printf("%s\n", all ? "all criteria pass" : "some criteria fail");
  return all ? 0 : 1;
}
