#pragma once

// Shared fixtures for the unit and acceptance tests.

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "pidlab/evalkit.hpp"
#include "pidlab/plant.hpp"
#include "pidlab/search.hpp"
#include "pidlab/stability.hpp"
#include "pidlab/validator.hpp"

namespace pidlab::testing {

inline PlantModel noiseless_plant(double t_max = 60.0) {
  PlantModel p;
  p.a1 = 1.0;
  p.a2 = 1.0;
  p.dt = 0.01;
  p.t_max = t_max;
  return p;
}

inline Mission hold(double duration = 60.0) {
  Mission m = Mission::make(MissionMode::Hold);
  m.duration = duration;
  return m;
}

inline ParamSpace plane(double p, GridAxis i, GridAxis d) { return {{p, p, 1.0}, i, d}; }

/// Routh-Hurwitz predicate on the default plant as a validator.
inline FunctionValidator routh_validator(double a1 = 1.0, double a2 = 1.0) {
  return FunctionValidator([=](const PidConfig& c) { return routh_stable(c, a1, a2); }, "routh");
}

/// Records every probed configuration; forwards verdicts from `is_valid`.
class RecordingValidator final : public Validator {
 public:
  explicit RecordingValidator(std::function<bool(const PidConfig&)> is_valid)
      : is_valid_(std::move(is_valid)) {}

  std::vector<PidConfig> probes() const {
    std::lock_guard lock(mu_);
    return probes_;
  }

 protected:
  Verdict do_validate(const PidConfig& pid) override {
    {
      std::lock_guard lock(mu_);
      probes_.push_back(pid);
    }
    Verdict v;
    v.runs = 1;
    v.valid = is_valid_(pid);
    v.votes_valid = v.valid ? 1 : 0;
    if (!v.valid) v.violated_spec = "recorded";
    return v;
  }

 private:
  std::function<bool(const PidConfig&)> is_valid_;
  mutable std::mutex mu_;
  std::vector<PidConfig> probes_;
};

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("pidlab-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

/// Vertices of the first `<polyline id="ID" ... points="...">` in an SVG document.
inline std::vector<std::pair<double, double>> polyline_points(const std::string& svg,
                                                              const std::string& id) {
  std::vector<std::pair<double, double>> pts;
  const auto at = svg.find("<polyline id=\"" + id + "\"");
  if (at == std::string::npos) return pts;
  const auto open = svg.find("points=\"", at);
  const auto close = svg.find('"', open + 8);
  std::istringstream in(svg.substr(open + 8, close - open - 8));
  double x = 0.0, y = 0.0;
  char comma = 0;
  while (in >> x >> comma >> y) pts.emplace_back(x, y);
  return pts;
}

inline std::set<GridIndex> as_set(const std::vector<GridIndex>& v) { return {v.begin(), v.end()}; }

}  // namespace pidlab::testing
