#pragma once

// Run records, strict key=value configuration, CSV output, and the
// content-addressed spectral cache shared by every tool and test.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "anhgibbs/trapspec.hpp"

namespace anhgibbs {

inline std::filesystem::path cache_dir() {
  if (const char* env = std::getenv("ANHGIBBS_CACHE_DIR")) return env;
  return std::filesystem::temp_directory_path() / "anhgibbs-cache";
}

// Memoized + disk-cached eigensolve. Decompositions are immutable and shared.
// values_only skips eigenvectors (much faster; enough for spectral counting
// and trace work).
inline std::shared_ptr<const SpectralDecomposition> get_spectrum(TrapConfig cfg,
                                                                 bool values_only = false) {
  cfg = with_adaptive_box(cfg);
  cfg.validate();
  static std::mutex mu;
  static std::map<std::uint64_t, std::shared_ptr<const SpectralDecomposition>> memo;
  std::uint64_t key = config_key(cfg) ^ (values_only ? 0x76616c75ULL : 0);
  {
    std::lock_guard<std::mutex> lk(mu);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
  }
  auto spec = std::make_shared<SpectralDecomposition>();
  std::filesystem::path dir = cache_dir();
  char name[32];
  std::snprintf(name, sizeof name, "%016llx.spec", static_cast<unsigned long long>(key));
  std::filesystem::path file = dir / name;
  bool loaded = load_decomposition(file.string(), *spec);
  if (!loaded) {
    *spec = values_only ? solve_trap_values(cfg) : solve_trap(cfg);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (!ec) {
      // write-then-rename so concurrent processes never see partial files
      std::filesystem::path tmp = file;
      tmp += ".tmp";
      try {
        save_decomposition(*spec, tmp.string());
        std::filesystem::rename(tmp, file, ec);
      } catch (const std::exception&) {
      }
    }
  }
  std::lock_guard<std::mutex> lk(mu);
  memo.emplace(key, spec);
  return spec;
}

// ---------------------------------------------------------------------------
// RunRecord

enum class Verdict { pass, fail, inconclusive };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    default: return "inconclusive";
  }
}

struct ResultEntry {
  std::string name;
  double value = 0.0;
  double stderr_ = 0.0;
  double tolerance = 0.0;
  Verdict verdict = Verdict::pass;
};

struct RunRecord {
  std::string tool_version = "anhgibbs 1.0.0";
  std::string subcommand;
  std::map<std::string, std::string> params;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
  std::vector<ResultEntry> results;

  void add(const std::string& name, double value, Verdict v, double tol = 0.0,
           double se = 0.0) {
    results.push_back({name, value, se, tol, v});
  }
  int exit_code() const {
    bool any_fail = false, any_pass = false;
    for (const auto& r : results) {
      if (r.verdict == Verdict::fail) any_fail = true;
      if (r.verdict == Verdict::pass) any_pass = true;
    }
    if (any_fail) return 2;
    if (!any_pass && !results.empty()) return 3;
    return 0;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["tool_version"] = tool_version;
    j["subcommand"] = subcommand;
    j["params"] = params;
    j["seed"] = seed;
    j["wall_seconds"] = wall_seconds;
    j["results"] = nlohmann::json::array();
    for (const auto& r : results)
      j["results"].push_back({{"name", r.name},
                              {"value", r.value},
                              {"stderr", r.stderr_},
                              {"tolerance", r.tolerance},
                              {"verdict", verdict_name(r.verdict)}});
    return j;
  }

  static RunRecord from_json(const nlohmann::json& j) {
    RunRecord r;
    r.tool_version = j.at("tool_version").get<std::string>();
    r.subcommand = j.at("subcommand").get<std::string>();
    r.params = j.at("params").get<std::map<std::string, std::string>>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.wall_seconds = j.at("wall_seconds").get<double>();
    for (const auto& e : j.at("results")) {
      ResultEntry re;
      re.name = e.at("name").get<std::string>();
      re.value = e.at("value").get<double>();
      re.stderr_ = e.at("stderr").get<double>();
      re.tolerance = e.at("tolerance").get<double>();
      std::string v = e.at("verdict").get<std::string>();
      re.verdict = v == "pass" ? Verdict::pass : v == "fail" ? Verdict::fail : Verdict::inconclusive;
      r.results.push_back(re);
    }
    return r;
  }

  void save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    out << to_json().dump(2) << "\n";
  }
};

// ---------------------------------------------------------------------------
// Strict key = value configuration with [section] headers. Unknown keys are
// rejected by the consumer, which declares the accepted key set.

struct ConfigFile {
  // keys stored as "section.key" ("" section allowed)
  std::map<std::string, std::string> kv;

  static ConfigFile parse(std::istream& in) {
    ConfigFile c;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      auto trim = [](std::string t) {
        std::size_t a = t.find_first_not_of(" \t\r");
        std::size_t b = t.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : t.substr(a, b - a + 1);
      };
      line = trim(line);
      if (line.empty() || line[0] == '#') continue;
      if (line.front() == '[' && line.back() == ']') {
        section = trim(line.substr(1, line.size() - 2));
        continue;
      }
      std::size_t eq = line.find('=');
      if (eq == std::string::npos)
        throw std::runtime_error("config: line " + std::to_string(lineno) + " is not key = value");
      std::string key = trim(line.substr(0, eq));
      std::string val = trim(line.substr(eq + 1));
      if (key.empty()) throw std::runtime_error("config: empty key at line " + std::to_string(lineno));
      std::string full = section.empty() ? key : section + "." + key;
      if (c.kv.count(full))
        throw std::runtime_error("config: duplicate key '" + full + "'");
      c.kv[full] = val;
    }
    return c;
  }

  static ConfigFile load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    return parse(in);
  }
};

// CSV writer; '.' decimal, no locale.
struct CsvWriter {
  std::ofstream out;
  explicit CsvWriter(const std::filesystem::path& path) : out(path) {
    out.imbue(std::locale::classic());
    out.precision(12);
  }
  void header(const std::vector<std::string>& cols) { row_strings(cols); }
  void row_strings(const std::vector<std::string>& cols) {
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << "\n";
  }
  void row(const std::vector<double>& vals) {
    for (std::size_t i = 0; i < vals.size(); ++i) out << (i ? "," : "") << vals[i];
    out << "\n";
  }
};

struct WallTimer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

}  // namespace anhgibbs
