#pragma once

#include <string>

#include <json.hpp>

#include "qroof/ensemble.hpp"

namespace qroof::io {

using json = nlohmann::json;

/// Input problem: {"dim": n, "rho": M, "H": M, "tolerances": {...}} where each
/// M is an n x n array of [re, im] pairs. "tolerances" is optional and may set
/// any of "herm", "trace", "psd", "rank".
struct Problem {
  DensityMatrix rho;
  Observable h;
  Tolerances tolerances;
  std::string digest;  // of the canonical form of the input document
};

/// Parses and validates a problem document. Malformed JSON raises a
/// ValidationError (kind kParse) whose message carries line and column.
Problem parse_problem(const std::string& text);

json encode_matrix(const ComplexMatrix& m);
json encode_vector(const ComplexVector& v);
/// Throws ValidationError unless `j` is a dim x dim array of [re, im] pairs.
ComplexMatrix decode_matrix(const json& j, std::size_t dim, const std::string& name);
ComplexVector decode_vector(const json& j, std::size_t dim, const std::string& name);

json encode_ensemble(const PureEnsemble& e);
PureEnsemble decode_ensemble(const json& j, std::size_t dim);

json encode_problem(const ComplexMatrix& rho, const ComplexMatrix& h);

/// "fnv1a64:" followed by 16 hex digits of the FNV-1a hash of `text`.
std::string content_digest(const std::string& text);

}  // namespace qroof::io
