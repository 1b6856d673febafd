// Copyright 2026 The clampqp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "clampqp/problem.hpp"

#include <cmath>
#include <json.hpp>

namespace clampqp {

namespace {

using Code = ProblemError::Code;

constexpr double kInfThreshold = 1e30;

[[noreturn]] void fail(Code code, const std::string& what) {
  throw ProblemError(code, what);
}

double decode_scalar(const nlohmann::ordered_json& j, const char* field) {
  if (j.is_string()) {
    const std::string& s = j.get_ref<const std::string&>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    fail(Code::MalformedDocument,
         std::string("unrecognized token \"") + s + "\" in field " + field);
  }
  if (!j.is_number()) {
    fail(Code::MalformedDocument, std::string("non-numeric entry in field ") + field);
  }
  double v = j.get<double>();
  if (v >= kInfThreshold) return kInf;
  if (v <= -kInfThreshold) return -kInf;
  return v;
}

nlohmann::ordered_json encode_scalar(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

Vec decode_vector(const nlohmann::ordered_json& j, const char* field, Index len) {
  if (!j.is_array()) fail(Code::MalformedDocument, std::string(field) + " must be an array");
  if (static_cast<Index>(j.size()) != len) {
    fail(Code::MissingField, std::string(field) + " has length " +
                                 std::to_string(j.size()) + ", expected " +
                                 std::to_string(len));
  }
  Vec v(len);
  for (Index i = 0; i < len; ++i) v[i] = decode_scalar(j[i], field);
  return v;
}

Mat decode_matrix(const nlohmann::ordered_json& j, const char* field, Index rows,
                  Index cols) {
  if (!j.is_array()) fail(Code::MalformedDocument, std::string(field) + " must be an array");
  if (static_cast<Index>(j.size()) != rows) {
    fail(Code::MissingField, std::string(field) + " has " + std::to_string(j.size()) +
                                 " rows, expected " + std::to_string(rows));
  }
  Mat m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    m.row(i) = decode_vector(j[i], field, cols).transpose();
  }
  return m;
}

nlohmann::ordered_json encode_vector(const Vec& v) {
  auto j = nlohmann::ordered_json::array();
  for (Index i = 0; i < v.size(); ++i) j.push_back(encode_scalar(v[i]));
  return j;
}

nlohmann::ordered_json encode_matrix(const Mat& m) {
  auto j = nlohmann::ordered_json::array();
  for (Index i = 0; i < m.rows(); ++i) j.push_back(encode_vector(m.row(i).transpose()));
  return j;
}

const nlohmann::ordered_json& require_field(const nlohmann::ordered_json& doc,
                                            const char* field) {
  auto it = doc.find(field);
  if (it == doc.end()) fail(Code::MissingField, std::string("missing field ") + field);
  return *it;
}

}  // namespace

std::vector<ConstraintKind> constraint_kinds(const QProblem& p) {
  std::vector<ConstraintKind> kinds(static_cast<size_t>(p.num_constraints()));
  for (Index i = 0; i < p.num_constraints(); ++i) {
    kinds[static_cast<size_t>(i)] = row_kind(p.c[i], p.d[i]);
  }
  return kinds;
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Solved:
      return "solved";
    case SolveStatus::MaxIters:
      return "max-iters";
    case SolveStatus::Invalid:
      return "invalid";
  }
  return "invalid";
}

QProblem validate(QProblem p) {
  const Index n = p.H.rows();
  const Index m = p.G.rows();
  if (n < 1) fail(Code::DimensionMismatch, "n must be >= 1");
  if (m < 1) {
    fail(Code::DimensionMismatch,
         "m must be >= 1 (use a row with infinite bounds for an unconstrained problem)");
  }
  if (p.H.cols() != n) fail(Code::DimensionMismatch, "H must be square");
  if (p.g.size() != n) fail(Code::DimensionMismatch, "g length must equal n");
  if (p.G.cols() != n) fail(Code::DimensionMismatch, "G must have n columns");
  if (p.c.size() != m) fail(Code::DimensionMismatch, "c length must equal m");
  if (p.d.size() != m) fail(Code::DimensionMismatch, "d length must equal m");

  if (!p.H.allFinite()) fail(Code::NonFiniteEntry, "H contains a non-finite entry");
  if (!p.g.allFinite()) fail(Code::NonFiniteEntry, "g contains a non-finite entry");
  if (!p.G.allFinite()) fail(Code::NonFiniteEntry, "G contains a non-finite entry");

  const double h_scale = std::max(1.0, inf_norm(p.H));
  const double asym = (p.H - p.H.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * h_scale) {
    fail(Code::NonSymmetricH, "H is not symmetric (max |H_ij - H_ji| = " +
                                  std::to_string(asym) + ")");
  }

  Eigen::LLT<Mat> llt(p.H);
  if (llt.info() != Eigen::Success) {
    fail(Code::NonPositiveDefiniteH, "H is not positive-definite");
  }

  for (Index i = 0; i < m; ++i) {
    const double lo = p.c[i];
    const double hi = p.d[i];
    if (std::isnan(lo) || std::isnan(hi)) {
      fail(Code::NonFiniteEntry, "bound row " + std::to_string(i) + " contains NaN");
    }
    if (lo == kInf || hi == -kInf || lo > hi) {
      fail(Code::InvertedBounds,
           "row " + std::to_string(i) + " has inverted bounds (c = " +
               std::to_string(lo) + ", d = " + std::to_string(hi) + ")");
    }
  }
  return p;
}

QProblem parse_problem(const std::string& text) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(Code::MalformedDocument, std::string("parse error: ") + e.what());
  }
  if (!doc.is_object()) fail(Code::MalformedDocument, "document must be an object");

  const auto& jn = require_field(doc, "n");
  const auto& jm = require_field(doc, "m");
  if (!jn.is_number_integer() || !jm.is_number_integer()) {
    fail(Code::MalformedDocument, "n and m must be integers");
  }
  const Index n = jn.get<Index>();
  const Index m = jm.get<Index>();
  if (n < 1 || m < 1) fail(Code::DimensionMismatch, "n and m must be >= 1");

  QProblem p;
  p.H = decode_matrix(require_field(doc, "H"), "H", n, n);
  p.g = decode_vector(require_field(doc, "g"), "g", n);
  p.G = decode_matrix(require_field(doc, "G"), "G", m, n);
  p.c = decode_vector(require_field(doc, "c"), "c", m);
  p.d = decode_vector(require_field(doc, "d"), "d", m);
  return validate(std::move(p));
}

std::string serialize_problem(const QProblem& p) {
  nlohmann::ordered_json doc;
  doc["n"] = p.num_vars();
  doc["m"] = p.num_constraints();
  doc["H"] = encode_matrix(p.H);
  doc["g"] = encode_vector(p.g);
  doc["G"] = encode_matrix(p.G);
  doc["c"] = encode_vector(p.c);
  doc["d"] = encode_vector(p.d);
  return doc.dump(2) + "\n";
}

}  // namespace clampqp
