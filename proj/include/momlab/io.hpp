#pragma once

#include <json.hpp>

#include <chrono>
#include <istream>
#include <map>
#include <string>
#include <vector>

#include "momlab/model_mc.hpp"
#include "momlab/moments.hpp"
#include "momlab/zeros.hpp"

namespace momlab {

inline constexpr const char* kVersion = "0.4.0";

// CSV with RFC 4180 quoting: fields holding a comma, quote, CR or LF are
// quoted and inner quotes doubled; records end with CRLF.
std::string csv_field(const std::string& s);
std::string csv_number(double x);
class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header);
  void row(const std::vector<std::string>& fields);
  const std::string& str() const { return out_; }
  size_t rows() const { return rows_; }

 private:
  size_t width_;
  size_t rows_ = 0;
  std::string out_;
};
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

// Config grammar, one entry per line:
//   line    := ws (comment | section | entry)? ws
//   comment := '#' any*
//   section := '[' name ']'            prefixes later keys with "name."
//   entry   := key ws '=' ws value
//   key     := [A-Za-z0-9_.-]+
//   value   := '"' (char | '\"' | '\\')* '"' | bare text up to '#', trimmed
class Config {
 public:
  static Config parse(std::istream& in, const std::string& name);
  static Config load(const std::string& path);
  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string get(const std::string& key, const std::string& def) const;
  double get_double(const std::string& key, double def) const;
  const std::map<std::string, std::string>& values() const { return values_; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

 private:
  std::map<std::string, std::string> values_;
};

// Result files go to <out>/<command>-<run id>.<ext>; the run id is a hash of
// the command and its arguments so a rerun reproduces the same names and
// bytes. Manifests are appended to <out>/manifests.jsonl.
class RunRecord {
 public:
  RunRecord(std::string command, nlohmann::json args, std::string out_dir);
  const std::string& id() const { return id_; }
  const std::string& out_dir() const { return out_; }
  // Writes a result file and returns its path.
  std::string write(const std::string& ext, const std::string& content);
  std::string write_json(const nlohmann::json& j);
  void note(const std::string& key, nlohmann::json value) { extra_[key] = std::move(value); }
  void add_zero_provenance(const ZeroStore& store);
  // Appends the manifest line; returns it.
  nlohmann::json finish(int exit_code);

 private:
  std::string command_;
  nlohmann::json args_;
  std::string out_, id_;
  std::vector<std::string> files_;
  nlohmann::json extra_ = nlohmann::json::object();
  nlohmann::json zeros_ = nlohmann::json::array();
  std::chrono::steady_clock::time_point start_;
};

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

// JSON views of module results. Non-finite numbers become null.
nlohmann::json num(double x);
nlohmann::json to_json(const MomentReport& r);
nlohmann::json to_json(const MainTerms& m);
nlohmann::json to_json(const OmegaReport& r);
nlohmann::json to_json(const Histogram& h);
nlohmann::json to_json(const MomentsRecord& r);
nlohmann::json to_json(const CountCheck& c);

}  // namespace momlab
