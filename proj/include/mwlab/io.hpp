#pragma once

#include "mwlab/carleson.hpp"
#include "mwlab/seqspaces.hpp"
#include "mwlab/sparse.hpp"
#include "mwlab/weights.hpp"

#include <json.hpp>

#include <string>

namespace mwlab {

using Json = nlohmann::json;

/// JSON formats. Doubles survive a dump/parse round trip bit-for-bit
/// (shortest-round-trip printing on write, correctly rounded strtod on read).
///
/// weight   {"schema": "mwlab-weight-v1", "depth": N, "dim": d,
///           "cells": [[row-major d*d doubles], ...]}
/// family   {"schema": "mwlab-family-v1", "depth": N, "c": 0.5,
///           "members": ["k:p", ...]}
/// sequence {"schema": "mwlab-sequence-v1", "depth": N, "dim": d,
///           "entries": [{"index": "k:p", "matrix": [row-major]}, ...]}
///
/// Loaders validate the schema tag and re-run the type invariants
/// (SPD cells, PSD sequence entries, sparsity), so a loaded object is as
/// trustworthy as a constructed one.

Json weight_to_json(const MatrixWeight& w);
MatrixWeight weight_from_json(const Json& j);

Json family_to_json(const SparseFamily& f);
SparseFamily family_from_json(const Json& j);

Json carleson_to_json(const CarlesonSequence& a);
CarlesonSequence carleson_from_json(const Json& j);

Json matrix_sequence_to_json(const MatrixSequence& s);
MatrixSequence matrix_sequence_from_json(const Json& j);

/// File helpers; failures carry the path in the exception message.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
Json load_json_file(const std::string& path);

namespace detail {
Json matrix_to_json(const Matrix& m);                     // row-major flat list
Matrix matrix_from_json(const Json& j, int rows, int cols);
void require_schema(const Json& j, const std::string& tag);
}  // namespace detail

}  // namespace mwlab
