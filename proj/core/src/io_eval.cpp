// Copyright 2026 The rio Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rio/io_eval.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

namespace rio {

ParseError::ParseError(std::string file, std::size_t line, std::size_t column, const std::string& what)
    : std::runtime_error(file + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + what),
      file_(std::move(file)),
      line_(line),
      column_(column) {}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

bool to_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size() && std::isfinite(out);
}

bool to_long(std::string_view s, long& out) {
  if (s.empty()) return false;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

/// Visits the data rows of a CSV with a fixed header, handing out 1-based line numbers.
template <typename Fn>
void for_each_row(std::string_view text, const std::string& file, std::string_view header, Fn&& fn) {
  const std::size_t columns = split(header, ',').size();
  std::size_t line_no = 0;
  bool seen_header = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = trim(text.substr(pos, end - pos));
    ++line_no;
    pos = end + 1;
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (!seen_header) {
      if (line != header) throw ParseError(file, line_no, 0, "expected header '" + std::string(header) + "'");
      seen_header = true;
      continue;
    }
    const auto fields = split(line, ',');
    if (fields.size() < columns) {
      throw ParseError(file, line_no, fields.size() + 1,
                       "expected " + std::to_string(columns) + " columns, found " + std::to_string(fields.size()));
    }
    if (fields.size() > columns) {
      throw ParseError(file, line_no, columns + 1,
                       "expected " + std::to_string(columns) + " columns, found " + std::to_string(fields.size()));
    }
    fn(fields, line_no);
  }
  if (!seen_header) throw ParseError(file, 1, 0, "missing header '" + std::string(header) + "'");
}

template <std::size_t N>
std::array<double, N> numbers(const std::vector<std::string_view>& fields, const std::string& file,
                              std::size_t line) {
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    if (!to_double(fields[i], out[i])) {
      throw ParseError(file, line, i + 1, "not a finite number: '" + std::string(fields[i]) + "'");
    }
  }
  return out;
}

std::string fmt17(double v) {
  if (v == 0.0) v = 0.0;
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Shortest "%.Ng" with N >= 9 that parses back to v.
std::string fmt_sig(double v) {
  if (v == 0.0) v = 0.0;
  char buf[40];
  for (int prec = 9; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    double back = 0.0;
    if (to_double(buf, back) && back == v) break;
  }
  return buf;
}

std::string fmt_time(double t) {
  if (t == 0.0) t = 0.0;
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.9f", t);
  double back = 0.0;
  if (to_double(buf, back) && back == t) return buf;
  return fmt17(t);
}

std::vector<double> parse_vector(const KeyValue& kv, std::size_t n, const std::string& file) {
  const auto parts = split_ws(kv.value);
  if (parts.size() != n) {
    throw ParseError(file, kv.line, 0, "key '" + kv.key + "' expects " + std::to_string(n) + " numbers");
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!to_double(parts[i], out[i])) throw ParseError(file, kv.line, 0, "bad number in key '" + kv.key + "'");
  }
  return out;
}

double parse_scalar(const KeyValue& kv, const std::string& file) { return parse_vector(kv, 1, file)[0]; }

int parse_int(const KeyValue& kv, const std::string& file) {
  long v = 0;
  if (!to_long(kv.value, v)) throw ParseError(file, kv.line, 0, "key '" + kv.key + "' expects an integer");
  return static_cast<int>(v);
}

bool parse_bool(const KeyValue& kv, const std::string& file) {
  if (kv.value == "true" || kv.value == "1") return true;
  if (kv.value == "false" || kv.value == "0") return false;
  throw ParseError(file, kv.line, 0, "key '" + kv.key + "' expects true or false");
}

std::string scan_file_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06zu.csv", index);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<KeyValue> parse_key_values(std::string_view text, const std::string& file) {
  std::vector<KeyValue> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(file, line_no, 0, "expected 'key = value'");
    const std::string_view key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError(file, line_no, 1, "empty key");
    out.push_back({std::string(key), std::string(trim(line.substr(eq + 1))), line_no});
  }
  return out;
}

SequenceMeta parse_meta(std::string_view text, const std::string& file) {
  SequenceMeta meta;
  for (const auto& kv : parse_key_values(text, file)) {
    if (kv.key == "imu_rate_hz") {
      meta.imu_rate_hz = parse_scalar(kv, file);
      if (!(meta.imu_rate_hz > 0)) throw ParseError(file, kv.line, 0, "imu_rate_hz must be positive");
    } else if (kv.key == "scan_rate_hz") {
      meta.scan_rate_hz = parse_scalar(kv, file);
      if (!(meta.scan_rate_hz > 0)) throw ParseError(file, kv.line, 0, "scan_rate_hz must be positive");
    } else if (kv.key == "gravity_z") {
      meta.gravity_z = parse_scalar(kv, file);
    } else if (kv.key == "doppler_sign") {
      meta.doppler_sign = parse_int(kv, file);
      if (meta.doppler_sign != 1 && meta.doppler_sign != -1) {
        throw ParseError(file, kv.line, 0, "doppler_sign must be 1 or -1");
      }
    } else if (kv.key == "ext_q") {
      const auto q = parse_vector(kv, 4, file);
      const UnitQuat rot(q[3], q[0], q[1], q[2]);
      if (std::abs(rot.norm() - 1.0) > 1e-6) throw ParseError(file, kv.line, 0, "ext_q is not a unit quaternion");
      meta.ext.rot = rot.normalized();
    } else if (kv.key == "ext_t") {
      const auto t = parse_vector(kv, 3, file);
      meta.ext.trans = Vec3(t[0], t[1], t[2]);
    } else {
      throw ParseError(file, kv.line, 0, "unknown key '" + kv.key + "'");
    }
  }
  return meta;
}

std::string format_meta(const SequenceMeta& meta) {
  std::ostringstream os;
  const UnitQuat& q = meta.ext.rot;
  const Vec3& t = meta.ext.trans;
  os << "imu_rate_hz = " << fmt_sig(meta.imu_rate_hz) << "\n"
     << "scan_rate_hz = " << fmt_sig(meta.scan_rate_hz) << "\n"
     << "gravity_z = " << fmt_sig(meta.gravity_z) << "\n"
     << "doppler_sign = " << meta.doppler_sign << "\n"
     << "ext_q = " << fmt_sig(q.x()) << " " << fmt_sig(q.y()) << " " << fmt_sig(q.z()) << " " << fmt_sig(q.w()) << "\n"
     << "ext_t = " << fmt_sig(t.x()) << " " << fmt_sig(t.y()) << " " << fmt_sig(t.z()) << "\n";
  return os.str();
}

void apply_config(OdometryConfig& cfg, const std::vector<KeyValue>& entries, const std::string& file) {
  PreprocessConfig& pp = cfg.preprocess;
  AssocConfig& as = cfg.assoc;
  EstimatorConfig& es = cfg.estimator;
  ImuNoiseParams& nz = cfg.imu_noise;
  const std::map<std::string, double*> reals = {
      {"fov_azimuth", &pp.fov_azimuth},   {"fov_elevation", &pp.fov_elevation},
      {"range_max", &pp.range_max},       {"radius_d", &pp.radius_d},
      {"vel_threshold", &pp.vel_threshold}, {"nn_d", &as.nn_d},
      {"rcs_d", &as.rcs_d},               {"w_doppler", &es.w_doppler},
      {"w_p2p", &es.w_p2p},               {"robust_delta", &es.robust_delta},
      {"rel_tol", &es.rel_tol},           {"lm_lambda_init", &es.lm_lambda_init},
      {"sigma_g", &nz.sigma_g},           {"sigma_a", &nz.sigma_a},
      {"sigma_bg", &nz.sigma_bg},         {"sigma_ba", &nz.sigma_ba},
      {"bias_repropagate", &cfg.bias_repropagate}};
  const std::map<std::string, int*> ints = {{"radius_n", &pp.radius_n},
                                            {"min_hits", &as.min_hits},
                                            {"window_k", &es.window_k},
                                            {"max_iters", &es.max_iters}};
  for (const auto& kv : entries) {
    if (const auto r = reals.find(kv.key); r != reals.end()) {
      *r->second = parse_scalar(kv, file);
    } else if (const auto i = ints.find(kv.key); i != ints.end()) {
      *i->second = parse_int(kv, file);
    } else if (kv.key == "use_rcs") {
      as.use_rcs = parse_bool(kv, file);
    } else if (kv.key == "disable") {
      for (const auto name : split_ws(kv.value)) {
        if (!es.ablation.set(std::string(name))) {
          throw ParseError(file, kv.line, 0, "unknown ablation flag '" + std::string(name) + "'");
        }
      }
    } else {
      throw ParseError(file, kv.line, 0, "unknown key '" + kv.key + "'");
    }
  }
}

std::string format_config(const OdometryConfig& cfg) {
  const PreprocessConfig& pp = cfg.preprocess;
  const AssocConfig& as = cfg.assoc;
  const EstimatorConfig& es = cfg.estimator;
  const ImuNoiseParams& nz = cfg.imu_noise;
  std::ostringstream os;
  os << "fov_azimuth = " << fmt_sig(pp.fov_azimuth) << "\n"
     << "fov_elevation = " << fmt_sig(pp.fov_elevation) << "\n"
     << "range_max = " << fmt_sig(pp.range_max) << "\n"
     << "radius_n = " << pp.radius_n << "\n"
     << "radius_d = " << fmt_sig(pp.radius_d) << "\n"
     << "vel_threshold = " << fmt_sig(pp.vel_threshold) << "\n"
     << "nn_d = " << fmt_sig(as.nn_d) << "\n"
     << "rcs_d = " << fmt_sig(as.rcs_d) << "\n"
     << "min_hits = " << as.min_hits << "\n"
     << "use_rcs = " << (as.use_rcs ? "true" : "false") << "\n"
     << "window_k = " << es.window_k << "\n"
     << "w_doppler = " << fmt_sig(es.w_doppler) << "\n"
     << "w_p2p = " << fmt_sig(es.w_p2p) << "\n"
     << "robust_delta = " << fmt_sig(es.robust_delta) << "\n"
     << "max_iters = " << es.max_iters << "\n"
     << "rel_tol = " << fmt_sig(es.rel_tol) << "\n"
     << "lm_lambda_init = " << fmt_sig(es.lm_lambda_init) << "\n"
     << "sigma_g = " << fmt_sig(nz.sigma_g) << "\n"
     << "sigma_a = " << fmt_sig(nz.sigma_a) << "\n"
     << "sigma_bg = " << fmt_sig(nz.sigma_bg) << "\n"
     << "sigma_ba = " << fmt_sig(nz.sigma_ba) << "\n"
     << "bias_repropagate = " << fmt_sig(cfg.bias_repropagate) << "\n";
  const AblationFlags& ab = es.ablation;
  std::string disabled;
  const std::pair<bool, const char*> flags[] = {{ab.disable_imu_residual, "imu_residual"},
                                                {ab.disable_doppler_residual, "doppler_residual"},
                                                {ab.disable_p2p_residual, "p2p_residual"},
                                                {ab.disable_velocity_filter, "velocity_filter"},
                                                {ab.disable_rcs_filter, "rcs_filter"}};
  for (const auto& [on, name] : flags) {
    if (!on) continue;
    if (!disabled.empty()) disabled += ' ';
    disabled += name;
  }
  if (!disabled.empty()) os << "disable = " << disabled << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------

std::vector<ImuSample> parse_imu_csv(std::string_view text, const std::string& file) {
  std::vector<ImuSample> out;
  for_each_row(text, file, "t,wx,wy,wz,ax,ay,az", [&](const auto& fields, std::size_t line) {
    const auto v = numbers<7>(fields, file, line);
    if (!out.empty() && !(v[0] > out.back().t)) throw ParseError(file, line, 1, "imu timestamps must increase");
    out.push_back({v[0], Vec3(v[1], v[2], v[3]), Vec3(v[4], v[5], v[6])});
  });
  return out;
}

RadarScan parse_scan_csv(std::string_view text, const std::string& file, double fallback_t) {
  RadarScan scan;
  scan.t = fallback_t;
  bool first = true;
  for_each_row(text, file, "t,x,y,z,doppler,rcs", [&](const auto& fields, std::size_t line) {
    const auto v = numbers<6>(fields, file, line);
    if (first) {
      scan.t = v[0];
      first = false;
    } else if (v[0] != scan.t) {
      throw ParseError(file, line, 1, "all rows of a scan must share t");
    }
    scan.points.push_back({Vec3(v[1], v[2], v[3]), v[4], v[5]});
  });
  return scan;
}

std::vector<StampedPose> parse_gt_csv(std::string_view text, const std::string& file) {
  std::vector<StampedPose> out;
  for_each_row(text, file, "t,px,py,pz,qx,qy,qz,qw", [&](const auto& fields, std::size_t line) {
    const auto v = numbers<8>(fields, file, line);
    if (!out.empty() && !(v[0] > out.back().t)) throw ParseError(file, line, 1, "gt timestamps must increase");
    UnitQuat q(v[7], v[4], v[5], v[6]);
    if (!(q.norm() > 0.5)) throw ParseError(file, line, 5, "degenerate quaternion");
    if (std::abs(q.norm() - 1.0) > 1e-12) q.normalize();
    out.push_back({v[0], Vec3(v[1], v[2], v[3]), q});
  });
  return out;
}

std::string format_imu_csv(const std::vector<ImuSample>& imu) {
  std::string out = "t,wx,wy,wz,ax,ay,az\n";
  for (const auto& s : imu) {
    out += fmt_sig(s.t) + "," + fmt_sig(s.gyro.x()) + "," + fmt_sig(s.gyro.y()) + "," + fmt_sig(s.gyro.z()) + "," +
           fmt_sig(s.accel.x()) + "," + fmt_sig(s.accel.y()) + "," + fmt_sig(s.accel.z()) + "\n";
  }
  return out;
}

std::string format_scan_csv(const RadarScan& scan, int doppler_sign) {
  std::string out = "t,x,y,z,doppler,rcs\n";
  const std::string t = fmt_sig(scan.t);
  for (const auto& p : scan.points) {
    out += t + "," + fmt_sig(p.p.x()) + "," + fmt_sig(p.p.y()) + "," + fmt_sig(p.p.z()) + "," +
           fmt_sig(doppler_sign * p.doppler) + "," + fmt_sig(p.rcs) + "\n";
  }
  return out;
}

std::string format_gt_csv(const std::vector<StampedPose>& poses) {
  std::string out = "t,px,py,pz,qx,qy,qz,qw\n";
  for (const auto& s : poses) {
    out += fmt_sig(s.t) + "," + fmt_sig(s.p.x()) + "," + fmt_sig(s.p.y()) + "," + fmt_sig(s.p.z()) + "," +
           fmt_sig(s.q.x()) + "," + fmt_sig(s.q.y()) + "," + fmt_sig(s.q.z()) + "," + fmt_sig(s.q.w()) + "\n";
  }
  return out;
}

std::string format_labels_csv(const std::vector<std::vector<sim::PointLabel>>& labels) {
  std::string out = "scan,point,label\n";
  for (std::size_t k = 0; k < labels.size(); ++k) {
    for (std::size_t i = 0; i < labels[k].size(); ++i) {
      out += std::to_string(k) + "," + std::to_string(i) + "," + labels[k][i].to_string() + "\n";
    }
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), 0, 0, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Sequence read_sequence(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw ParseError(dir.string(), 0, 0, "not a sequence directory");
  Sequence seq;
  const fs::path meta_path = dir / "meta.txt";
  seq.meta = parse_meta(read_text_file(meta_path), meta_path.string());

  const fs::path imu_path = dir / "imu.csv";
  seq.imu = parse_imu_csv(read_text_file(imu_path), imu_path.string());

  const fs::path scan_dir = dir / "scans";
  if (!fs::is_directory(scan_dir)) throw ParseError(scan_dir.string(), 0, 0, "missing scans directory");
  std::size_t count = 0;
  for (const auto& entry : fs::directory_iterator(scan_dir)) {
    if (entry.path().extension() == ".csv") ++count;
  }
  for (std::size_t k = 0; k < count; ++k) {
    const fs::path p = scan_dir / scan_file_name(k);
    if (!fs::exists(p)) throw ParseError(p.string(), 0, 0, "scan files must be numbered contiguously from 0");
    RadarScan scan = parse_scan_csv(read_text_file(p), p.string(), static_cast<double>(k) / seq.meta.scan_rate_hz);
    if (!seq.scans.empty() && !(scan.t > seq.scans.back().t)) {
      throw ParseError(p.string(), 2, 1, "scan timestamps must increase");
    }
    for (auto& pt : scan.points) pt.doppler *= seq.meta.doppler_sign;
    seq.scans.push_back(std::move(scan));
  }

  const fs::path gt_path = dir / "gt.csv";
  if (fs::exists(gt_path)) seq.ground_truth = parse_gt_csv(read_text_file(gt_path), gt_path.string());

  const fs::path labels_path = dir / "labels.csv";
  if (fs::exists(labels_path)) {
    const std::string file = labels_path.string();
    seq.labels.resize(seq.scans.size());
    for (std::size_t k = 0; k < seq.scans.size(); ++k) seq.labels[k].resize(seq.scans[k].points.size());
    std::vector<std::vector<bool>> seen(seq.scans.size());
    for (std::size_t k = 0; k < seq.scans.size(); ++k) seen[k].assign(seq.scans[k].points.size(), false);
    std::size_t rows = 0;
    for_each_row(read_text_file(labels_path), file, "scan,point,label", [&](const auto& fields, std::size_t line) {
      long scan = 0;
      long point = 0;
      if (!to_long(fields[0], scan) || scan < 0 || static_cast<std::size_t>(scan) >= seq.scans.size()) {
        throw ParseError(file, line, 1, "bad scan index");
      }
      if (!to_long(fields[1], point) || point < 0 ||
          static_cast<std::size_t>(point) >= seq.scans[scan].points.size()) {
        throw ParseError(file, line, 2, "bad point index");
      }
      try {
        seq.labels[scan][point] = sim::PointLabel::parse(std::string(fields[2]));
      } catch (const std::exception&) {
        throw ParseError(file, line, 3, "bad label '" + std::string(fields[2]) + "'");
      }
      if (seen[scan][point]) throw ParseError(file, line, 0, "duplicate label");
      seen[scan][point] = true;
      ++rows;
    });
    std::size_t total = 0;
    for (const auto& s : seq.scans) total += s.points.size();
    if (rows != total) throw ParseError(file, 0, 0, "every point needs exactly one label");
  }
  return seq;
}

void write_sequence(const std::filesystem::path& dir, const Sequence& seq) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "scans");
  for (const auto& entry : fs::directory_iterator(dir / "scans")) {
    if (entry.path().extension() == ".csv") fs::remove(entry.path());
  }
  write_text_file(dir / "meta.txt", format_meta(seq.meta));
  write_text_file(dir / "imu.csv", format_imu_csv(seq.imu));
  for (std::size_t k = 0; k < seq.scans.size(); ++k) {
    write_text_file(dir / "scans" / scan_file_name(k), format_scan_csv(seq.scans[k], seq.meta.doppler_sign));
  }
  if (!seq.ground_truth.empty()) write_text_file(dir / "gt.csv", format_gt_csv(seq.ground_truth));
  if (!seq.labels.empty()) write_text_file(dir / "labels.csv", format_labels_csv(seq.labels));
}

Sequence to_sequence(const sim::SimSequence& s) {
  Sequence seq;
  seq.meta.imu_rate_hz = s.params.imu_rate_hz;
  seq.meta.scan_rate_hz = s.params.scan_rate_hz;
  seq.meta.gravity_z = s.params.gravity.g_z;
  seq.meta.ext = s.params.ext;
  seq.imu = s.imu;
  seq.scans = s.scans;
  seq.labels = s.labels;
  for (const auto& g : s.ground_truth) seq.ground_truth.push_back({g.t, g.p, g.q});
  return seq;
}

double intensity_to_rcs(double intensity, double range) {
  if (!(intensity > 0.0) || !(range > 0.0)) {
    throw std::invalid_argument("intensity_to_rcs needs positive intensity and range");
  }
  return 10.0 * std::log10(intensity) + 40.0 * std::log10(range);
}

// ---------------------------------------------------------------------------

std::string export_trajectory_tum(const std::vector<StampedPose>& poses) {
  std::string out;
  for (const auto& s : poses) {
    out += fmt_time(s.t) + " " + fmt_sig(s.p.x()) + " " + fmt_sig(s.p.y()) + " " + fmt_sig(s.p.z()) + " " +
           fmt_sig(s.q.x()) + " " + fmt_sig(s.q.y()) + " " + fmt_sig(s.q.z()) + " " + fmt_sig(s.q.w()) + "\n";
  }
  return out;
}

std::vector<StampedPose> parse_trajectory_tum(std::string_view text, const std::string& file) {
  std::vector<StampedPose> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split_ws(line);
    if (fields.size() != 8) {
      throw ParseError(file, line_no, std::min<std::size_t>(fields.size(), 8) + 1,
                       "expected 8 fields, found " + std::to_string(fields.size()));
    }
    double v[8];
    for (std::size_t i = 0; i < 8; ++i) {
      if (!to_double(fields[i], v[i])) throw ParseError(file, line_no, i + 1, "not a finite number");
    }
    if (!out.empty() && !(v[0] > out.back().t)) throw ParseError(file, line_no, 1, "timestamps must increase");
    UnitQuat q(v[7], v[4], v[5], v[6]);
    if (!(q.norm() > 0.5)) throw ParseError(file, line_no, 5, "degenerate quaternion");
    if (std::abs(q.norm() - 1.0) > 1e-12) q.normalize();
    out.push_back({v[0], Vec3(v[1], v[2], v[3]), q});
  }
  return out;
}

StampedPose stamped(const FrameState& x) { return {x.t, x.p, x.q}; }

std::vector<std::pair<std::size_t, std::size_t>> associate_by_time(const std::vector<StampedPose>& est,
                                                                   const std::vector<StampedPose>& gt,
                                                                   double max_dt) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (gt.empty()) return out;
  if (max_dt < 0.0) {
    std::vector<double> gaps;
    for (std::size_t i = 1; i < gt.size(); ++i) gaps.push_back(gt[i].t - gt[i - 1].t);
    if (gaps.empty()) {
      max_dt = 1e-9;
    } else {
      std::nth_element(gaps.begin(), gaps.begin() + static_cast<long>(gaps.size() / 2), gaps.end());
      max_dt = 0.5 * gaps[gaps.size() / 2];
    }
  }
  std::size_t j = 0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    const double t = est[i].t;
    while (j + 1 < gt.size() && std::abs(gt[j + 1].t - t) <= std::abs(gt[j].t - t)) ++j;
    if (std::abs(gt[j].t - t) <= max_dt) {
      if (out.empty() || out.back().second != j) out.emplace_back(i, j);
    }
  }
  return out;
}

namespace {

double rmse(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (const double x : v) s += x * x;
  return std::sqrt(s / static_cast<double>(v.size()));
}

double angle_deg(const UnitQuat& q) { return rotation_angle(q) * 180.0 / std::numbers::pi; }

}  // namespace

Metrics compute_ape(const std::vector<StampedPose>& est, const std::vector<StampedPose>& gt, Alignment align,
                    double max_dt) {
  const auto pairs = associate_by_time(est, gt, max_dt);
  if (pairs.size() < 3) throw std::invalid_argument("fewer than three poses associate in time");
  const auto n = static_cast<Eigen::Index>(pairs.size());
  Pose T;
  if (align == Alignment::kSE3) {
    Eigen::Matrix3Xd src(3, n);
    Eigen::Matrix3Xd dst(3, n);
    for (Eigen::Index k = 0; k < n; ++k) {
      src.col(k) = est[pairs[k].first].p;
      dst.col(k) = gt[pairs[k].second].p;
    }
    const Eigen::Matrix4d M = Eigen::umeyama(src, dst, false);
    T.q = UnitQuat(Mat3(M.block<3, 3>(0, 0))).normalized();
    T.t = M.block<3, 1>(0, 3);
  }
  Metrics m;
  for (const auto& [i, j] : pairs) {
    const Pose aligned = T * est[i].pose();
    m.ape_trans.push_back((aligned.t - gt[j].p).norm());
    m.ape_rot.push_back(angle_deg(gt[j].q.conjugate() * aligned.q));
  }
  m.ape_trans_rmse = rmse(m.ape_trans);
  m.ape_rot_rmse = rmse(m.ape_rot);
  return m;
}

Metrics compute_rpe(const std::vector<StampedPose>& est, const std::vector<StampedPose>& gt, int delta,
                    double max_dt) {
  if (delta < 1) throw std::invalid_argument("rpe delta must be at least 1");
  const auto pairs = associate_by_time(est, gt, max_dt);
  if (pairs.size() < 3) throw std::invalid_argument("fewer than three poses associate in time");
  Metrics m;
  for (std::size_t k = 0; k + static_cast<std::size_t>(delta) < pairs.size(); ++k) {
    const auto& a = pairs[k];
    const auto& b = pairs[k + static_cast<std::size_t>(delta)];
    const Pose rel_gt = gt[a.second].pose().inverse() * gt[b.second].pose();
    const Pose rel_est = est[a.first].pose().inverse() * est[b.first].pose();
    const Pose err = rel_gt.inverse() * rel_est;
    m.rpe_trans.push_back(err.t.norm());
    m.rpe_rot.push_back(angle_deg(err.q));
  }
  m.rpe_trans_rmse = rmse(m.rpe_trans);
  m.rpe_rot_rmse = rmse(m.rpe_rot);
  return m;
}

Metrics evaluate_trajectory(const std::vector<StampedPose>& est, const std::vector<StampedPose>& gt, int rpe_delta,
                            Alignment align) {
  Metrics m = compute_ape(est, gt, align);
  const Metrics r = compute_rpe(est, gt, rpe_delta);
  m.rpe_trans = r.rpe_trans;
  m.rpe_rot = r.rpe_rot;
  m.rpe_trans_rmse = r.rpe_trans_rmse;
  m.rpe_rot_rmse = r.rpe_rot_rmse;
  return m;
}

}  // namespace rio
