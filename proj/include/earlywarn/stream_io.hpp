#pragma once

// Reading and writing prediction streams (JSONL, CSV) and base-model
// prediction matrices (CSV + truth sidecar).
//
// JSONL stream:
//   {"format":"earlywarn-stream/1","A":0.5}
//   {"case_id":"c1","y":1.0,"deviation":true,"points":[{"j":1,"delta":0.4,"rho":0.9}, ...]}
// CSV stream (optional leading "# earlywarn-stream/1 A=<num>" line carries A):
//   case_id,j,l,delta,rho,y,deviation
// Base matrix CSV: case_id,j,model_index,y_hat   (model_index is 0-based)
// Truth sidecar:   case_id,y,deviation,l
//
// tau is never stored; it is recomputed from j and l on load.

#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "earlywarn/errors.hpp"
#include "earlywarn/stream.hpp"
#include "earlywarn/text.hpp"
#include "json.hpp"

namespace earlywarn {

enum class StreamFormat { kJsonl, kCsv };

inline constexpr const char* kStreamFormatTag = "earlywarn-stream/1";

/// Picks the format from the file extension; anything but .csv is JSONL.
inline StreamFormat format_for_path(const std::string& path) {
  return std::filesystem::path(path).extension() == ".csv" ? StreamFormat::kCsv
                                                           : StreamFormat::kJsonl;
}

inline StreamFormat parse_stream_format(const std::string& name) {
  if (name == "jsonl" || name == "json") return StreamFormat::kJsonl;
  if (name == "csv") return StreamFormat::kCsv;
  throw ConfigError("unknown stream format '" + name + "' (expected jsonl or csv)");
}

namespace detail {

inline void check_case_id_for_csv(const std::string& id) {
  if (id.find_first_of(",\"\r\n") != std::string::npos) {
    throw ValidationError("case '" + id + "' field case_id: not representable in CSV");
  }
}

inline void check_header(const std::string& source, std::size_t line_no, std::string_view line,
                         std::string_view expected) {
  if (text::trim(line) != expected) {
    throw ParseError(source, line_no,
                     "expected header '" + std::string(expected) + "', found '" +
                         std::string(text::trim(line)) + "'");
  }
}

inline PredictionStream load_jsonl(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  std::optional<double> expected_outcome;
  std::vector<CaseRecord> cases;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(source, line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) throw ParseError(source, line_no, "expected a JSON object");
    try {
      if (!expected_outcome) {
        if (!obj.contains("format") || obj.at("format").get<std::string>() != kStreamFormatTag) {
          throw ParseError(source, line_no,
                           std::string("first line must be the header {\"format\":\"") +
                               kStreamFormatTag + "\",\"A\":...}");
        }
        expected_outcome = obj.value("A", kCategoricalExpectedOutcome);
        continue;
      }
      CaseRecord c;
      c.case_id = obj.at("case_id").get<std::string>();
      c.outcome = obj.at("y").get<double>();
      c.deviation = obj.at("deviation").get<bool>();
      const auto& pts = obj.at("points");
      if (!pts.is_array()) throw ParseError(source, line_no, "points must be an array");
      std::vector<std::pair<int, std::pair<double, double>>> raw;
      for (const auto& p : pts) {
        raw.push_back({p.at("j").get<int>(), {p.at("delta").get<double>(), p.at("rho").get<double>()}});
      }
      const int l = static_cast<int>(raw.size());
      for (const auto& [j, dr] : raw) {
        const double tau = (j >= 1 && j <= l) ? compute_tau(j, l) : 0.0;
        c.points.push_back({j, dr.first, dr.second, tau});
      }
      cases.push_back(std::move(c));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(source, line_no, std::string("bad field: ") + e.what());
    }
  }
  if (!expected_outcome && cases.empty()) throw ValidationError("empty stream");
  return PredictionStream(std::move(cases), *expected_outcome);
}

inline PredictionStream load_csv(std::istream& in, const std::string& source) {
  static constexpr std::string_view kHeader = "case_id,j,l,delta,rho,y,deviation";
  std::string line;
  std::size_t line_no = 0;
  double expected_outcome = kCategoricalExpectedOutcome;
  bool header_seen = false;
  std::vector<CaseRecord> cases;
  std::vector<int> declared_lengths;

  while (std::getline(in, line)) {
    ++line_no;
    const auto t = text::trim(line);
    if (t.empty()) continue;
    if (!header_seen) {
      if (t.front() == '#') {
        const auto pos = t.find("A=");
        if (pos != std::string_view::npos) {
          const auto a = text::parse_double(t.substr(pos + 2));
          if (!a) throw ParseError(source, line_no, "bad A in comment header");
          expected_outcome = *a;
        }
        continue;
      }
      check_header(source, line_no, t, kHeader);
      header_seen = true;
      continue;
    }
    const auto f = text::split(t, ',');
    if (f.size() != 7) {
      throw ParseError(source, line_no, "expected 7 columns, found " + std::to_string(f.size()));
    }
    const std::string id(text::trim(f[0]));
    const auto j = text::parse_int(f[1]);
    const auto l = text::parse_int(f[2]);
    const auto delta = text::parse_double(f[3]);
    const auto rho = text::parse_double(f[4]);
    const auto y = text::parse_double(f[5]);
    const auto dev = text::parse_bool(f[6]);
    if (!j || !l || !delta || !rho || !y || !dev) {
      throw ParseError(source, line_no, "malformed value");
    }
    if (cases.empty() || cases.back().case_id != id) {
      cases.push_back({id, {}, *y, *dev});
      declared_lengths.push_back(static_cast<int>(*l));
    }
    auto& c = cases.back();
    if (declared_lengths.back() != *l || c.outcome != *y || c.deviation != *dev) {
      throw ValidationError("case '" + id + "' field l/y/deviation: changes between rows");
    }
    c.points.push_back({static_cast<int>(*j), *delta, *rho, 0.0});
  }
  if (!header_seen && cases.empty()) throw ValidationError("empty stream");
  for (std::size_t k = 0; k < cases.size(); ++k) {
    auto& c = cases[k];
    if (c.length() != declared_lengths[k]) {
      throw ValidationError("case '" + c.case_id + "' field l: declares " +
                            std::to_string(declared_lengths[k]) + " but has " +
                            std::to_string(c.length()) + " points");
    }
    for (auto& p : c.points) {
      if (p.prefix >= 1 && p.prefix <= c.length()) p.tau = compute_tau(p.prefix, c.length());
    }
  }
  return PredictionStream(std::move(cases), expected_outcome);
}

}  // namespace detail

inline PredictionStream load_stream(const std::string& path, StreamFormat format) {
  auto in = text::open_for_read(path);
  return format == StreamFormat::kCsv ? detail::load_csv(in, path) : detail::load_jsonl(in, path);
}

inline PredictionStream load_stream(const std::string& path) {
  return load_stream(path, format_for_path(path));
}

inline void write_stream(const PredictionStream& stream, std::ostream& out, StreamFormat format) {
  if (format == StreamFormat::kJsonl) {
    nlohmann::ordered_json header;
    header["format"] = kStreamFormatTag;
    header["A"] = stream.expected_outcome();
    out << header.dump() << '\n';
    for (const auto& c : stream) {
      nlohmann::ordered_json obj;
      obj["case_id"] = c.case_id;
      obj["y"] = c.outcome;
      obj["deviation"] = c.deviation;
      auto pts = nlohmann::ordered_json::array();
      for (const auto& p : c.points) {
        nlohmann::ordered_json jp;
        jp["j"] = p.prefix;
        jp["delta"] = p.delta;
        jp["rho"] = p.rho;
        pts.push_back(std::move(jp));
      }
      obj["points"] = std::move(pts);
      out << obj.dump() << '\n';
    }
    return;
  }
  out << "# " << kStreamFormatTag << " A=" << text::format_double(stream.expected_outcome())
      << '\n';
  out << "case_id,j,l,delta,rho,y,deviation\n";
  for (const auto& c : stream) {
    detail::check_case_id_for_csv(c.case_id);
    const std::string tail = text::format_double(c.outcome) + (c.deviation ? ",true" : ",false");
    for (const auto& p : c.points) {
      out << c.case_id << ',' << p.prefix << ',' << c.length() << ','
          << text::format_double(p.delta) << ',' << text::format_double(p.rho) << ',' << tail
          << '\n';
    }
  }
}

inline void write_stream(const PredictionStream& stream, const std::string& path,
                         StreamFormat format) {
  auto out = text::open_for_write(path);
  write_stream(stream, out, format);
  text::finish_write(out, path);
}

inline void write_stream(const PredictionStream& stream, const std::string& path) {
  write_stream(stream, path, format_for_path(path));
}

// ---------------------------------------------------------------------------
// Base-model prediction matrices

struct BaseMatrixSet {
  std::vector<BasePredictionMatrix> matrices;  // arrival order
  std::vector<CaseTruth> truths;               // parallel to matrices
};

inline void write_base_matrices(const BaseMatrixSet& set, const std::string& matrix_path,
                                const std::string& truth_path) {
  auto mat = text::open_for_write(matrix_path);
  auto tru = text::open_for_write(truth_path);
  mat << "case_id,j,model_index,y_hat\n";
  tru << "case_id,y,deviation,l\n";
  for (std::size_t k = 0; k < set.matrices.size(); ++k) {
    const auto& m = set.matrices[k];
    const auto& t = set.truths[k];
    detail::check_case_id_for_csv(m.case_id);
    tru << m.case_id << ',' << text::format_double(t.outcome) << ','
        << (t.deviation ? "true" : "false") << ',' << m.length() << '\n';
    for (int j = 1; j <= m.length(); ++j) {
      const auto& row = m.predictions[static_cast<std::size_t>(j - 1)];
      for (std::size_t i = 0; i < row.size(); ++i) {
        mat << m.case_id << ',' << j << ',' << i << ',' << text::format_double(row[i]) << '\n';
      }
    }
  }
  text::finish_write(mat, matrix_path);
  text::finish_write(tru, truth_path);
}

inline BaseMatrixSet load_base_matrices(const std::string& matrix_path,
                                        const std::string& truth_path,
                                        double expected_outcome = kCategoricalExpectedOutcome) {
  BaseMatrixSet set;
  std::unordered_map<std::string, std::size_t> index;
  std::string line;

  {
    auto in = text::open_for_read(truth_path);
    std::size_t line_no = 0;
    bool header = false;
    while (std::getline(in, line)) {
      ++line_no;
      const auto t = text::trim(line);
      if (t.empty()) continue;
      if (!header) {
        detail::check_header(truth_path, line_no, t, "case_id,y,deviation,l");
        header = true;
        continue;
      }
      const auto f = text::split(t, ',');
      if (f.size() != 4) throw ParseError(truth_path, line_no, "expected 4 columns");
      const auto y = text::parse_double(f[1]);
      const auto dev = text::parse_bool(f[2]);
      const auto l = text::parse_int(f[3]);
      if (!y || !dev || !l || *l < 1) throw ParseError(truth_path, line_no, "malformed value");
      std::string id(text::trim(f[0]));
      if (!index.emplace(id, set.matrices.size()).second) {
        throw ValidationError("case '" + id + "' field case_id: duplicate in truth file");
      }
      BasePredictionMatrix m;
      m.case_id = std::move(id);
      m.expected_outcome = expected_outcome;
      m.predictions.resize(static_cast<std::size_t>(*l));
      set.matrices.push_back(std::move(m));
      set.truths.push_back({*y, *dev});
    }
  }
  if (set.matrices.empty()) throw ValidationError("empty stream");

  // Per case and prefix: model_index -> y_hat.
  std::vector<std::vector<std::map<long long, double>>> cells(set.matrices.size());
  for (std::size_t k = 0; k < set.matrices.size(); ++k) {
    cells[k].resize(set.matrices[k].predictions.size());
  }
  {
    auto in = text::open_for_read(matrix_path);
    std::size_t line_no = 0;
    bool header = false;
    while (std::getline(in, line)) {
      ++line_no;
      const auto t = text::trim(line);
      if (t.empty()) continue;
      if (!header) {
        detail::check_header(matrix_path, line_no, t, "case_id,j,model_index,y_hat");
        header = true;
        continue;
      }
      const auto f = text::split(t, ',');
      if (f.size() != 4) throw ParseError(matrix_path, line_no, "expected 4 columns");
      const auto j = text::parse_int(f[1]);
      const auto i = text::parse_int(f[2]);
      const auto y_hat = text::parse_double(f[3]);
      if (!j || !i || !y_hat || *i < 0) throw ParseError(matrix_path, line_no, "malformed value");
      const std::string id(text::trim(f[0]));
      const auto it = index.find(id);
      if (it == index.end()) {
        throw ValidationError("case '" + id + "' field case_id: missing from truth file");
      }
      auto& per_prefix = cells[it->second];
      if (*j < 1 || *j > static_cast<long long>(per_prefix.size())) {
        throw ValidationError("case '" + id + "' field j: " + std::to_string(*j) +
                              " outside 1..l");
      }
      if (!per_prefix[static_cast<std::size_t>(*j - 1)].emplace(*i, *y_hat).second) {
        throw ValidationError("case '" + id + "' field model_index: duplicate entry");
      }
    }
  }

  for (std::size_t k = 0; k < set.matrices.size(); ++k) {
    auto& m = set.matrices[k];
    std::size_t ensemble = 0;
    for (std::size_t j = 0; j < cells[k].size(); ++j) {
      const auto& row = cells[k][j];
      if (row.empty()) {
        throw ValidationError("case '" + m.case_id + "' field j: no predictions at j=" +
                              std::to_string(j + 1));
      }
      if (j == 0) ensemble = row.size();
      if (row.size() != ensemble || static_cast<std::size_t>(row.rbegin()->first) + 1 != ensemble) {
        throw ValidationError("case '" + m.case_id +
                              "' field model_index: ensemble incomplete at j=" +
                              std::to_string(j + 1));
      }
      auto& out = m.predictions[j];
      out.reserve(ensemble);
      for (const auto& [idx, v] : row) out.push_back(v);
    }
  }
  return set;
}

/// Aggregates every matrix of the set into a validated stream.
inline PredictionStream aggregate_stream(const BaseMatrixSet& set,
                                         double expected_outcome = kCategoricalExpectedOutcome) {
  std::vector<CaseRecord> cases;
  cases.reserve(set.matrices.size());
  for (std::size_t k = 0; k < set.matrices.size(); ++k) {
    cases.push_back(aggregate_ensemble(set.matrices[k], set.truths[k]));
  }
  return PredictionStream(std::move(cases), expected_outcome);
}

}  // namespace earlywarn
