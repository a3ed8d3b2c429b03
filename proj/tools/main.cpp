// momlab command-line driver.
#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <set>

#include "momlab/checks.hpp"
#include "momlab/combinatorics.hpp"
#include "momlab/explicit_formula.hpp"
#include "momlab/io.hpp"
#include "momlab/model_mc.hpp"
#include "momlab/moments.hpp"

using namespace momlab;
using nlohmann::json;

namespace {

struct Flags {
  int q = 3, n = 2, s = 2;
  double x = 1e4, T = 0, tol = 0, budget = 1e8;
  std::string eta, phi = "triangle", mode, grid, out = "out", cache, cls = "F", level = "quick";
  std::string config;
  uint64_t samples = 10000, seed = 1;
  bool dump = false, serial = false;
};

Exec exec_of(const Flags& f) { return f.serial ? Exec::serial : Exec::parallel; }

std::vector<double> parse_grid(const std::string& spec) {
  // lo:hi:count, geometric
  auto a = spec.find(':'), b = spec.rfind(':');
  if (a == std::string::npos || a == b) throw ValidationError("grid must be lo:hi:count");
  double lo = std::stod(spec.substr(0, a)), hi = std::stod(spec.substr(a + 1, b - a - 1));
  long cnt = std::stol(spec.substr(b + 1));
  if (!(lo >= 1) || !(hi >= lo) || cnt < 1) throw ValidationError("grid needs 1 <= lo <= hi, count >= 1");
  std::vector<double> g;
  for (long k = 0; k < cnt; ++k)
    g.push_back(cnt == 1 ? lo : std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * k / (cnt - 1)));
  return g;
}

ZeroStore zeros_for(const CharacterGroup& g, double T, const Flags& f, RunRecord& run) {
  ZeroStore store;
  ensure_all_zeros(store, g, T, f.cache);
  run.add_zero_provenance(store);
  return store;
}

json character_json(const Character& c) {
  return {{"conrey", c.conrey},       {"index", c.index},   {"conductor", c.conductor},
          {"primitive_conrey", c.primitive_conrey}, {"parity", c.parity}, {"order", c.order},
          {"real", c.order <= 2}};
}

int cmd_chars(const Flags& f, RunRecord& run) {
  CharacterGroup g(f.q);
  json chars = json::array();
  CsvWriter csv({"conrey", "index", "conductor", "primitive_conrey", "parity", "order"});
  std::set<int> conductors;
  for (const auto& c : g.characters()) {
    chars.push_back(character_json(c));
    conductors.insert(c.conductor);
    csv.row({std::to_string(c.conrey), std::to_string(c.index), std::to_string(c.conductor),
             std::to_string(c.primitive_conrey), std::to_string(c.parity), std::to_string(c.order)});
  }
  json out = {{"command", "chars"}, {"q", f.q},      {"phi", g.phi()},
              {"count", g.phi()},   {"conductors", conductors}, {"characters", chars},
              {"orthogonality", verify_orthogonality(g)}};
  run.write("csv", csv.str());
  run.write_json(out);
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_zeros(const Flags& f, RunRecord& run) {
  double T = f.T > 0 ? f.T : 100;
  CharacterGroup g(f.q);
  ZeroStore store = zeros_for(g, T, f, run);
  json lists = json::array();
  for (const ZeroList* l : store.lists()) {
    const ZeroList* c = store.find(l->q, conj_conrey(l->q, l->conrey));
    json e = {{"q", l->q},
              {"conrey", l->conrey},
              {"count", l->count_upto(T)},
              {"T_cert", num(l->T_cert)},
              {"provenance", l->provenance},
              {"first", l->gamma.empty() ? json(nullptr) : json(l->gamma[0])}};
    if (c) e["count_check"] = to_json(count_check(l->q, *l, *c, T));
    lists.push_back(e);
  }
  json out = {{"command", "zeros"}, {"q", f.q}, {"T", T}, {"lists", lists}};
  run.write("tsv", zeros_tsv(store.lists()));
  run.write_json(out);
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_psi(const Flags& f, RunRecord& run) {
  Weight w = make_weight(f.eta.empty() ? "expK:1" : f.eta);
  double T = f.T > 0 ? f.T : 200;
  CharacterGroup g(f.q);
  double t = std::log(f.x);
  ProgressionSums::Options po;
  po.tol = f.tol > 0 ? f.tol : 1e-3;
  po.X_max = uint64_t(std::min(f.budget, 1e10));
  po.exec = exec_of(f);
  ProgressionSums ps(f.q, w, {t}, po);
  bool zero_side = w.even;
  ZeroStore store;
  if (zero_side) store = zeros_for(g, T, f, run);
  json chars = json::array();
  CsvWriter csv({"conrey", "side", "re", "im", "bound"});
  for (int pos = 0; pos < g.phi(); ++pos) {
    const Character& c = g.at(pos);
    PsiValue p = ps.psi_char(g, pos, 0);
    json e = {{"conrey", c.conrey},
              {"prime", {{"re", num(p.value.real())}, {"im", num(p.value.imag())}, {"bound", num(p.bound)}}}};
    csv.row({std::to_string(c.conrey), "prime", csv_number(p.value.real()),
             csv_number(p.value.imag()), csv_number(p.bound)});
    if (zero_side && pos != g.principal()) {
      PsiValue z = ZeroSide(g, pos, w, store, T).psi(t);
      e["zero"] = {{"re", num(z.value.real())}, {"im", num(z.value.imag())}, {"bound", num(z.bound)}};
      e["agree"] = std::abs(z.value - p.value) <= z.bound + p.bound;
      csv.row({std::to_string(c.conrey), "zero", csv_number(z.value.real()),
               csv_number(z.value.imag()), csv_number(z.bound)});
    }
    chars.push_back(e);
  }
  json classes = json::array();
  for (int a : g.coprime_residues()) {
    PsiValue p = ps.psi_ap(f.q, a, 0);
    classes.push_back({{"a", a}, {"value", num(p.value.real())}, {"bound", num(p.bound)}});
  }
  json out = {{"command", "psi"}, {"q", f.q},          {"x", f.x},
              {"eta", w.spec},    {"X", ps.limit()},   {"T", zero_side ? json(T) : json(nullptr)},
              {"characters", chars}, {"classes", classes}};
  run.write("csv", csv.str());
  run.write_json(out);
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_moments(const Flags& f, RunRecord& run) {
  Weight w = make_weight(f.eta.empty() ? "expK:1" : f.eta);
  if (f.x > 1e9) throw BudgetError("moments: x above 1e9 needs the progression path");
  LambdaTable tab = sieve_lambda(uint64_t(f.x) + 1);
  MomentValue a = moment_residue_side(f.x, f.q, f.n, w, tab);
  MomentValue b = moment_character_side(f.x, f.q, f.n, w, tab);
  json out = {{"command", "moments"},
              {"q", f.q},
              {"n", f.n},
              {"x", f.x},
              {"eta", w.spec},
              {"residue_side", {{"value", num(a.value)}, {"bound", num(a.bound)}}},
              {"character_side", {{"value", num(b.value)}, {"imag", num(b.imag)}, {"bound", num(b.bound)}}},
              {"difference", num(std::abs(a.value - b.value))}};
  if (f.n >= 2 && w.even) out["main_terms"] = to_json(main_terms(f.q, f.n, 2, w));
  run.write_json(out);
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_vmoment(const Flags& f, RunRecord& run) {
  Weight w = make_weight(f.eta.empty() ? "selfconv:sech" : f.eta);
  Kernel K = make_kernel(f.phi);
  double T = f.T > 0 ? f.T : 50;
  std::string mode = f.mode.empty() ? "all" : f.mode;
  if (mode != "all" && mode != "empirical" && mode != "spectral" && mode != "limit")
    throw ValidationError("vmoment mode must be empirical, spectral, limit or all");
  CharacterGroup g(f.q);
  double Tz = auto_zero_height(w, f.q, 1e-12);
  ZeroStore store = zeros_for(g, Tz, f, run);
  ZeroFamily fam(g, w, store, Tz);
  PathOptions po;
  po.exec = exec_of(f);
  DeviationPath path(g, w, store, Tz, po);
  SpectralOptions so;
  so.budget = uint64_t(f.budget);
  so.exec = exec_of(f);
  QuadratureOptions qo;
  if (f.tol > 0) qo.tol = f.tol;
  if (!f.grid.empty()) qo.step = std::stod(f.grid);
  qo.exec = exec_of(f);
  SpectralMean m = spectral_mean(fam, f.n, so.budget);
  json reports = json::array();
  MomentReport e, sp;
  if (mode == "all" || mode == "empirical") {
    e = vsn_empirical(T, f.s, f.n, K, path, m.value, m.bound, qo);
    reports.push_back(to_json(e));
  }
  if (mode == "all" || mode == "spectral") {
    sp = vsn_spectral(T, f.s, f.n, K, fam, path, false, so, qo);
    reports.push_back(to_json(sp));
  }
  if (mode == "all" || mode == "limit")
    reports.push_back(to_json(vsn_spectral(T, f.s, f.n, K, fam, path, true, so, qo)));
  json out = {{"command", "vmoment"},
              {"q", f.q},
              {"s", f.s},
              {"n", f.n},
              {"T", T},
              {"phi", K.spec},
              {"eta", w.spec},
              {"zero_height", Tz},
              {"mean", {{"value", num(m.value)}, {"bound", num(m.bound)}}},
              {"reports", reports}};
  if (f.n >= 2) out["main_terms"] = to_json(main_terms(f.q, f.n, f.s, w));
  if (mode == "all") {
    double diff = std::abs(e.value - sp.value), bud = e.budget() + sp.budget();
    out["agreement"] = {{"difference", num(diff)}, {"budget", num(bud)}, {"pass", diff <= bud}};
  }
  run.write_json(out);
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_combin(const Flags& f, RunRecord& run) {
  EnumerationOptions opts;
  opts.budget = uint64_t(f.budget);
  opts.exec = exec_of(f);
  if (f.mode == "loose") opts.strict_pairing = false;
  InvolutionClass tag = parse_class(f.cls);
  InvolutionClassCount c = enumerate_class(f.s, f.n, tag, opts);
  json formula = nullptr, match = nullptr;
  if (tag == InvolutionClass::F) {
    try {
      BigInt v = f_formula(f.s, f.n);
      formula = json::parse(v.str());
      match = v == c.count;
    } catch (const ValidationError&) {
    }
  }
  json out = {{"command", "combin"},
              {"s", f.s},
              {"n", f.n},
              {"class", class_name(tag)},
              {"count", json::parse(c.count.str())},
              {"formula_value", formula},
              {"match", match},
              {"scanned", c.scanned},
              {"witness", c.witness}};
  run.write_json(out);
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_model(const Flags& f, RunRecord& run) {
  Weight w = make_weight(f.eta.empty() ? "expK:1" : f.eta);
  ModelMode mode = parse_model_mode(f.mode.empty() ? "li" : f.mode);
  double Tz = f.T > 0 ? f.T : 100;
  CharacterGroup g(f.q);
  ZeroStore store = zeros_for(g, Tz, f, run);
  ZeroFamily fam(g, w, store, Tz);
  SampleBatch b = sample_H(fam, f.n, mode, f.seed, f.samples, f.x, f.budget * 100, exec_of(f));
  std::vector<int> s_list{2, 3, 4};
  MomentsRecord rec = estimate_moments(b.values, s_list, 200, f.seed, [&](int s) {
    return main_terms(f.q, f.n, s, w).moment_prediction;
  });
  rec.V_n = main_terms(f.q, f.n, 2, w).V_n;
  json out = {{"command", "model"},
              {"q", f.q},
              {"n", f.n},
              {"eta", w.spec},
              {"mode", to_string(mode)},
              {"seed", f.seed},
              {"samples", f.samples},
              {"zero_height", Tz},
              {"max_imag", num(b.max_imag)},
              {"moments", to_json(rec)}};
  if (f.n == 2) {
    SumWithBound ex = model_mean_exact(fam, w);
    out["exact_mean"] = {{"value", num(ex.value)}, {"bound", num(ex.bound)}};
  }
  if (f.dump) {
    CsvWriter csv({"sample", "H"});
    for (size_t i = 0; i < b.values.size(); ++i)
      csv.row({std::to_string(i), csv_number(b.values[i])});
    run.write("csv", csv.str());
  }
  run.note("seeds", {f.seed});
  run.write_json(out);
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_omega(const Flags& f, RunRecord& run) {
  Weight w = make_weight(f.eta.empty() ? "expK:1" : f.eta);
  std::string mode = f.mode.empty() ? "m2m" : f.mode;
  std::vector<double> grid = parse_grid(f.grid.empty() ? "1000:1e7:40" : f.grid);
  double eps = f.tol > 0 ? f.tol : 0.5;
  if (f.n < 2 || f.n % 2) throw ValidationError("omega-search: n must be even >= 2");
  OmegaReport rep = omega_search(f.q, w, grid, eps, mode, f.n / 2,
                                 uint64_t(std::min(std::max(f.budget, 1e7), 1e10)), exec_of(f));
  json out = to_json(rep);
  out["command"] = "omega-search";
  CsvWriter csv({"x", "value", "bound", "residue"});
  for (const auto& h : rep.hits)
    csv.row({csv_number(h.x), csv_number(h.value), csv_number(h.bound), std::to_string(h.residue)});
  run.write("csv", csv.str());
  run.write_json(out);
  json brief = out;
  brief.erase("hits");
  std::cout << brief.dump(2) << "\n";
  return 0;
}

int cmd_histogram(const Flags& f, RunRecord& run) {
  int bins = f.grid.empty() ? 40 : std::stoi(f.grid);
  Histogram h = distribution_histogram(f.x, f.q, bins, exec_of(f));
  json out = to_json(h);
  out["command"] = "histogram";
  CsvWriter csv({"lo", "hi", "count"});
  for (size_t b = 0; b < h.counts.size(); ++b)
    csv.row({csv_number(h.edges[b]), csv_number(h.edges[b + 1]), std::to_string(h.counts[b])});
  run.write("csv", csv.str());
  run.write_json(out);
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_verify(const Flags& f, RunRecord& run) {
  CheckEnv env{f.cache, exec_of(f)};
  auto results = run_checks(f.level, env);
  json checks = json::array();
  bool all = true;
  for (const auto& r : results) {
    all = all && r.pass;
    checks.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
    std::fprintf(stderr, "[%s] %-42s %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
  }
  json out = {{"command", "verify"}, {"level", f.level}, {"pass", all}, {"checks", checks}};
  run.write_json(out);
  std::cout << json({{"pass", all}, {"checks", results.size()}}).dump() << "\n";
  return all ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"momlab: moments of prime counts in progressions"};
  app.require_subcommand(1);
  Flags f;
  const char* env_cache = std::getenv("MOMLAB_CACHE");
  f.cache = env_cache && *env_cache ? env_cache : "cache";

  std::map<std::string, std::function<void(const std::string&)>> setters;
  auto common = [&](CLI::App* sub, std::initializer_list<std::string> names) {
    for (const auto& nm : names) {
      if (nm == "q") sub->add_option("--q", f.q, "modulus");
      if (nm == "n") sub->add_option("--n", f.n, "moment order n");
      if (nm == "s") sub->add_option("--s", f.s, "outer moment order s");
      if (nm == "x") sub->add_option("--x", f.x, "x (time limit for the time-average model)");
      if (nm == "T") sub->add_option("--T", f.T, "height or time horizon");
      if (nm == "eta") sub->add_option("--eta", f.eta, "expK:<K>|selfconv:gauss|selfconv:sech|classical");
      if (nm == "phi") sub->add_option("--phi", f.phi, "triangle|indicator");
      if (nm == "mode") sub->add_option("--mode", f.mode, "command mode");
      if (nm == "samples") sub->add_option("--samples", f.samples, "Monte Carlo samples");
      if (nm == "seed") sub->add_option("--seed", f.seed, "generator seed");
      if (nm == "grid") sub->add_option("--grid", f.grid, "grid spec");
      if (nm == "class") sub->add_option("--class", f.cls, "F|G|I");
      if (nm == "level") sub->add_option("--level", f.level, "quick|full");
      if (nm == "dump") sub->add_flag("--dump", f.dump, "write the samples as CSV");
    }
    sub->add_option("--out", f.out, "output directory");
    sub->add_option("--cache-dir", f.cache, "zero cache root (env MOMLAB_CACHE)");
    sub->add_option("--budget", f.budget, "work budget");
    sub->add_option("--tol", f.tol, "tolerance");
    sub->add_option("--config", f.config, "key = value config file");
    sub->add_flag("--serial", f.serial, "serial reference kernels");
  };
  std::map<std::string, std::function<int(const Flags&, RunRecord&)>> handlers = {
      {"chars", cmd_chars},     {"zeros", cmd_zeros},   {"psi", cmd_psi},
      {"moments", cmd_moments}, {"vmoment", cmd_vmoment}, {"combin", cmd_combin},
      {"model", cmd_model},     {"omega-search", cmd_omega}, {"histogram", cmd_histogram},
      {"verify", cmd_verify}};
  common(app.add_subcommand("chars", "list the characters mod q"), {"q"});
  common(app.add_subcommand("zeros", "compute or load zeros to height T"), {"q", "T"});
  common(app.add_subcommand("psi", "weighted psi on both sides of the explicit formula"),
         {"q", "x", "T", "eta"});
  common(app.add_subcommand("moments", "M_n(x, q; eta) from both sides"), {"q", "n", "x", "eta"});
  common(app.add_subcommand("vmoment", "moments of moments V_{s,n}"),
         {"q", "n", "s", "T", "eta", "phi", "mode", "grid"});
  common(app.add_subcommand("combin", "involution class counts"), {"s", "n", "class", "mode"});
  common(app.add_subcommand("model", "Monte Carlo for the limiting variable"),
         {"q", "n", "x", "T", "eta", "mode", "samples", "seed", "dump"});
  common(app.add_subcommand("omega-search", "scan x for large deviations"),
         {"q", "n", "eta", "mode", "grid"});
  common(app.add_subcommand("histogram", "distribution of normalized deviations"),
         {"q", "x", "grid"});
  common(app.add_subcommand("verify", "run the invariant suite"), {"level"});

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
  CLI::App* sub = app.get_subcommands().front();
  const std::string cmd = sub->get_name();

  int rc = 0;
  try {
    if (!f.config.empty()) {
      // Flags given on the command line win over the config file.
      Config cfg = Config::load(f.config);
      // Plain keys apply to every command, "[<command>]" sections to one.
      std::map<std::string, std::string> merged;
      const std::string prefix = sub->get_name() + ".";
      for (const auto& [key, value] : cfg.values())
        if (key.find('.') == std::string::npos) merged[key] = value;
      for (const auto& [key, value] : cfg.values())
        if (key.rfind(prefix, 0) == 0) merged[key.substr(prefix.size())] = value;
      for (const auto& [key, value] : merged) {
        std::string name = "--" + key;
        CLI::Option* opt = nullptr;
        try {
          opt = sub->get_option(name);
        } catch (const CLI::OptionNotFound&) {
          continue;
        }
        if (opt->count() == 0 && key != "config") {
          opt->clear();
          opt->add_result(value);
          opt->run_callback();
        }
      }
    }
    json args = {{"q", f.q},       {"n", f.n},         {"s", f.s},         {"x", f.x},
                 {"T", f.T},       {"tol", f.tol},     {"budget", f.budget}, {"eta", f.eta},
                 {"phi", f.phi},   {"mode", f.mode},   {"grid", f.grid},   {"class", f.cls},
                 {"level", f.level}, {"samples", f.samples}, {"seed", f.seed}, {"dump", f.dump},
                 {"serial", f.serial}, {"cache-dir", f.cache}, {"config", f.config}};
    RunRecord run(cmd, args, f.out);
    try {
      rc = handlers.at(cmd)(f, run);
    } catch (...) {
      run.finish(-1);
      throw;
    }
    run.finish(rc);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const BudgetError& e) {
    std::cerr << "budget: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "io: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}
