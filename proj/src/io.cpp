#include "momlab/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace momlab {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string csv_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return format_double(x, 17);
}

CsvWriter::CsvWriter(const std::vector<std::string>& header) : width_(header.size()) {
  row(header);
  rows_ = 0;
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  if (fields.size() != width_) throw ValidationError("csv: row width does not match the header");
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ += ',';
    out_ += csv_field(fields[i]);
  }
  out_ += "\r\n";
  ++rows_;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> out;
  std::vector<std::string> rec;
  std::string field;
  bool quoted = false, any = false;
  size_t i = 0;
  auto end_record = [&] {
    rec.push_back(field);
    out.push_back(rec);
    rec.clear();
    field.clear();
    any = false;
  };
  while (i < text.size()) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          i += 2;
          continue;
        }
        quoted = false;
      } else {
        field += c;
      }
      ++i;
      continue;
    }
    if (c == '"') {
      if (!field.empty()) throw ValidationError("csv: quote inside an unquoted field");
      quoted = any = true;
    } else if (c == ',') {
      rec.push_back(field);
      field.clear();
      any = true;
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      end_record();
    } else {
      field += c;
      any = true;
    }
    ++i;
  }
  if (quoted) throw ValidationError("csv: unterminated quoted field");
  if (any || !field.empty() || !rec.empty()) end_record();
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t"), b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-'))
      return false;
  return true;
}

}  // namespace

Config Config::parse(std::istream& in, const std::string& name) {
  Config cfg;
  std::string line, section;
  int lineno = 0;
  auto fail = [&](const std::string& why) {
    throw ValidationError(name + ":" + std::to_string(lineno) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t[0] == '[') {
      if (t.back() != ']') fail("unterminated section header");
      section = trim(t.substr(1, t.size() - 2));
      if (!valid_key(section)) fail("bad section name");
      continue;
    }
    size_t eq = t.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    std::string key = trim(t.substr(0, eq));
    if (!valid_key(key)) fail("bad key '" + key + "'");
    std::string rest = trim(t.substr(eq + 1)), value;
    if (!rest.empty() && rest[0] == '"') {
      size_t i = 1;
      bool closed = false;
      for (; i < rest.size(); ++i) {
        if (rest[i] == '\\' && i + 1 < rest.size() && (rest[i + 1] == '"' || rest[i + 1] == '\\')) {
          value += rest[++i];
        } else if (rest[i] == '"') {
          closed = true;
          break;
        } else {
          value += rest[i];
        }
      }
      if (!closed) fail("unterminated string");
      std::string tail = trim(rest.substr(i + 1));
      if (!tail.empty() && tail[0] != '#') fail("text after closing quote");
    } else {
      value = trim(rest.substr(0, rest.find('#')));
    }
    cfg.values_[section.empty() ? key : section + "." + key] = value;
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  return parse(in, path);
}

std::string Config::get(const std::string& key, const std::string& def) const {
  auto it = values_.find(key);
  return it == values_.end() ? def : it->second;
}

double Config::get_double(const std::string& key, double def) const {
  auto it = values_.find(key);
  if (it == values_.end()) return def;
  size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(it->second, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != it->second.size())
    throw ValidationError("config key '" + key + "': not a number: '" + it->second + "'");
  return v;
}

// ---------------------------------------------------------------------------

void write_file(const std::string& path, const std::string& content) {
  std::error_code ec;
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
  std::string tmp = path + ".tmp";
  {
    std::ofstream o(tmp, std::ios::binary);
    if (!o) throw IoError("cannot write '" + path + "'");
    o << content;
    if (!o) throw IoError("write failed for '" + path + "'");
  }
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move '" + tmp + "' into place: " + ec.message());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::string hex(uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

RunRecord::RunRecord(std::string command, nlohmann::json args, std::string out_dir)
    : command_(std::move(command)),
      args_(std::move(args)),
      out_(std::move(out_dir)),
      start_(std::chrono::steady_clock::now()) {
  id_ = hex(fnv1a(command_ + " " + args_.dump())).substr(0, 12);
}

std::string RunRecord::write(const std::string& ext, const std::string& content) {
  std::string path = (fs::path(out_) / (command_ + "-" + id_ + "." + ext)).string();
  write_file(path, content);
  files_.push_back(fs::path(path).filename().string());
  return path;
}

std::string RunRecord::write_json(const nlohmann::json& j) {
  nlohmann::json body = j;
  body["run_id"] = id_;
  return write("json", body.dump(2) + "\n");
}

void RunRecord::add_zero_provenance(const ZeroStore& store) {
  for (const ZeroList* l : store.lists())
    zeros_.push_back({{"q", l->q},
                      {"conrey", l->conrey},
                      {"count", l->gamma.size()},
                      {"T_cert", num(l->T_cert)},
                      {"provenance", l->provenance},
                      {"hash", hex(fnv1a(zeros_tsv({l})))}});
}

nlohmann::json RunRecord::finish(int exit_code) {
  double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  nlohmann::json m = {{"run_id", id_},   {"command", command_}, {"args", args_},
                      {"version", kVersion}, {"exit_code", exit_code}, {"wall_time_s", wall},
                      {"outputs", files_}, {"zeros", zeros_}};
  for (auto& [k, v] : extra_.items()) m[k] = v;
  std::error_code ec;
  fs::create_directories(out_, ec);
  std::ofstream o((fs::path(out_) / "manifests.jsonl").string(), std::ios::app);
  if (!o) throw IoError("cannot append to the manifest log in '" + out_ + "'");
  o << m.dump() << "\n";
  return m;
}

// ---------------------------------------------------------------------------

nlohmann::json num(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x;
}

nlohmann::json to_json(const MomentReport& r) {
  nlohmann::json extra = nlohmann::json::object();
  for (const auto& [k, v] : r.extra) extra[k] = num(v);
  return {{"kind", r.kind},
          {"q", r.q},
          {"n", r.n},
          {"s", r.s},
          {"x", num(r.x)},
          {"T", num(r.T)},
          {"eta", r.eta},
          {"phi", r.phi},
          {"value", num(r.value)},
          {"prediction", num(r.prediction)},
          {"residual", num(r.residual)},
          {"quad_error", num(r.quad_error)},
          {"trunc_error", num(r.trunc_error)},
          {"budget", num(r.budget())},
          {"mean", num(r.mean)},
          {"extra", extra}};
}

nlohmann::json to_json(const MainTerms& m) {
  return {{"q", m.q},
          {"n", m.n},
          {"s", m.s},
          {"phi", num(m.phi)},
          {"alpha", num(m.alpha)},
          {"beta", num(m.beta)},
          {"nu", num(m.nu)},
          {"theta", num(m.theta)},
          {"V_n", num(m.V_n)},
          {"mean_prediction", num(m.mean_prediction)},
          {"moment_prediction", num(m.moment_prediction)}};
}

nlohmann::json to_json(const OmegaReport& r) {
  nlohmann::json hits = nlohmann::json::array();
  for (const auto& h : r.hits) {
    nlohmann::json e = {{"x", num(h.x)}, {"value", num(h.value)}, {"bound", num(h.bound)}};
    if (r.mode == "raw") e["residue"] = h.residue;
    hits.push_back(e);
  }
  return {{"q", r.q},
          {"mode", r.mode},
          {"eta", r.eta},
          {"m", r.m},
          {"epsilon", num(r.epsilon)},
          {"threshold", num(r.threshold)},
          {"X", r.X},
          {"grid_size", r.grid_size},
          {"hit_count", r.hits.size()},
          {"hits", hits}};
}

nlohmann::json to_json(const Histogram& h) {
  nlohmann::json tails = nlohmann::json::array();
  for (const auto& t : h.tails)
    tails.push_back({{"V", num(t.V)}, {"empirical", num(t.empirical)}, {"gaussian", num(t.gaussian)}});
  nlohmann::json edges = nlohmann::json::array();
  for (double e : h.edges) edges.push_back(num(e));
  return {{"q", h.q},
          {"x", num(h.x)},
          {"residues", h.values.size()},
          {"edges", edges},
          {"counts", h.counts},
          {"tails", tails}};
}

nlohmann::json to_json(const MomentsRecord& r) {
  nlohmann::json ms = nlohmann::json::array();
  for (const auto& m : r.moments)
    ms.push_back({{"s", m.s},
                  {"value", num(m.value)},
                  {"std_error", num(m.std_error)},
                  {"prediction", num(m.prediction)}});
  return {{"count", r.count},
          {"mean", num(r.mean)},
          {"mean_se", num(r.mean_se)},
          {"V_n", num(r.V_n)},
          {"moments", ms}};
}

nlohmann::json to_json(const CountCheck& c) {
  return {{"T", num(c.T)},
          {"count", c.count},
          {"expected", num(c.expected)},
          {"tolerance", num(c.tolerance)},
          {"pass", c.pass}};
}

}  // namespace momlab
