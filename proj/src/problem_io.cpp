#include "qroof/problem_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <sstream>

namespace qroof::io {

namespace {

[[noreturn]] void fail(const std::string& what) {
  throw ValidationError(ValidationError::Kind::kShape, 0.0, what);
}

Complex decode_scalar(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    fail(where + ": expected [re, im]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

json encode_matrix(const ComplexMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

json encode_vector(const ComplexVector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back({v[i].real(), v[i].imag()});
  return out;
}

ComplexMatrix decode_matrix(const json& j, std::size_t dim, const std::string& name) {
  if (!j.is_array() || j.size() != dim) fail(name + ": expected " + std::to_string(dim) + " rows");
  const auto n = static_cast<Eigen::Index>(dim);
  ComplexMatrix m(n, n);
  for (std::size_t r = 0; r < dim; ++r) {
    const json& row = j[r];
    if (!row.is_array() || row.size() != dim) {
      fail(name + "[" + std::to_string(r) + "]: expected " + std::to_string(dim) + " entries");
    }
    for (std::size_t c = 0; c < dim; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          decode_scalar(row[c], name + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
    }
  }
  return m;
}

ComplexVector decode_vector(const json& j, std::size_t dim, const std::string& name) {
  if (!j.is_array() || j.size() != dim) fail(name + ": expected " + std::to_string(dim) + " entries");
  ComplexVector v(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim; ++i) {
    v[static_cast<Eigen::Index>(i)] = decode_scalar(j[i], name + "[" + std::to_string(i) + "]");
  }
  return v;
}

json encode_ensemble(const PureEnsemble& e) {
  json members = json::array();
  for (const auto& m : e.members) members.push_back({{"weight", m.weight}, {"state", encode_vector(m.state)}});
  return {{"dim", e.target_dim}, {"members", std::move(members)}};
}

PureEnsemble decode_ensemble(const json& j, std::size_t dim) {
  if (!j.is_object() || !j.contains("members") || !j["members"].is_array()) fail("ensemble: missing members");
  PureEnsemble e;
  e.target_dim = dim;
  for (const json& m : j["members"]) {
    if (!m.contains("weight") || !m["weight"].is_number() || !m.contains("state")) {
      fail("ensemble: member needs weight and state");
    }
    e.members.push_back({m["weight"].get<double>(), decode_vector(m["state"], dim, "state")});
  }
  return e;
}

json encode_problem(const ComplexMatrix& rho, const ComplexMatrix& h) {
  return {{"dim", rho.rows()}, {"rho", encode_matrix(rho)}, {"H", encode_matrix(h)}};
}

std::string content_digest(const std::string& text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, hash);
  return std::string("fnv1a64:") + buf;
}

Problem parse_problem(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte);
    std::ostringstream os;
    os << "malformed JSON at line " << line << ", column " << col << ": " << e.what();
    throw ValidationError(ValidationError::Kind::kParse, 0.0, os.str());
  }
  if (!doc.is_object()) fail("problem: top level must be an object");
  if (!doc.contains("dim") || !doc["dim"].is_number_integer() || doc["dim"].get<long long>() < 1) {
    fail("problem: \"dim\" must be a positive integer");
  }
  const auto dim = doc["dim"].get<std::size_t>();
  if (!doc.contains("rho")) fail("problem: missing \"rho\"");
  if (!doc.contains("H")) fail("problem: missing \"H\"");

  Tolerances tol;
  if (doc.contains("tolerances")) {
    const json& t = doc["tolerances"];
    if (!t.is_object()) fail("problem: \"tolerances\" must be an object");
    auto read = [&](const char* key, double& field) {
      if (!t.contains(key)) return;
      if (!t[key].is_number()) fail(std::string("tolerances.") + key + " must be a number");
      field = t[key].get<double>();
    };
    read("herm", tol.herm);
    read("trace", tol.trace);
    read("psd", tol.psd);
    read("rank", tol.rank);
  }

  const ComplexMatrix rho = decode_matrix(doc["rho"], dim, "rho");
  const ComplexMatrix h = decode_matrix(doc["H"], dim, "H");
  return Problem{validate_density(rho, tol), Observable(h, tol.herm), tol, content_digest(doc.dump())};
}

}  // namespace qroof::io
