#include "mwlab/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mwlab {

namespace detail {

Json matrix_to_json(const Matrix& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
  return out;
}

Matrix matrix_from_json(const Json& j, int rows, int cols) {
  if (!j.is_array() || j.size() != static_cast<std::size_t>(rows) * cols)
    throw std::invalid_argument("matrix entry: expected " +
                                std::to_string(rows * cols) + " values");
  Matrix m(rows, cols);
  std::size_t k = 0;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = j[k++].get<double>();
  return m;
}

void require_schema(const Json& j, const std::string& tag) {
  if (!j.is_object() || j.value("schema", "") != tag)
    throw std::invalid_argument("expected a \"" + tag + "\" document");
}

}  // namespace detail

namespace {

constexpr const char* kWeightSchema = "mwlab-weight-v1";
constexpr const char* kFamilySchema = "mwlab-family-v1";
constexpr const char* kSequenceSchema = "mwlab-sequence-v1";

Json sequence_entries_to_json(const char* tag, int depth, int dim,
                              const std::map<DyadicIndex, Matrix>& entries) {
  Json out{{"schema", tag}, {"depth", depth}, {"dim", dim}};
  Json list = Json::array();
  for (const auto& [idx, m] : entries)
    list.push_back(
        {{"index", idx.str()}, {"matrix", detail::matrix_to_json(m)}});
  out["entries"] = std::move(list);
  return out;
}

std::map<DyadicIndex, Matrix> sequence_entries_from_json(const Json& j,
                                                         int dim) {
  std::map<DyadicIndex, Matrix> entries;
  for (const Json& e : j.at("entries")) {
    const DyadicIndex idx = DyadicIndex::parse(e.at("index").get<std::string>());
    if (!entries.emplace(idx, detail::matrix_from_json(e.at("matrix"), dim, dim))
             .second)
      throw std::invalid_argument("sequence: duplicate index " + idx.str());
  }
  return entries;
}

}  // namespace

Json weight_to_json(const MatrixWeight& w) {
  Json cells = Json::array();
  for (const Matrix& m : w.cells()) cells.push_back(detail::matrix_to_json(m));
  return {{"schema", kWeightSchema},
          {"depth", w.depth()},
          {"dim", w.dim()},
          {"cells", std::move(cells)}};
}

MatrixWeight weight_from_json(const Json& j) {
  detail::require_schema(j, kWeightSchema);
  const int depth = j.at("depth").get<int>();
  const int dim = j.at("dim").get<int>();
  const Json& cells = j.at("cells");
  std::vector<Matrix> out;
  out.reserve(cells.size());
  for (const Json& c : cells)
    out.push_back(detail::matrix_from_json(c, dim, dim));
  return MatrixWeight(depth, dim, std::move(out));
}

Json family_to_json(const SparseFamily& f) {
  Json members = Json::array();
  for (const DyadicIndex& i : f.members()) members.push_back(i.str());
  return {{"schema", kFamilySchema},
          {"depth", f.depth()},
          {"c", f.sparsity_constant()},
          {"members", std::move(members)}};
}

SparseFamily family_from_json(const Json& j) {
  detail::require_schema(j, kFamilySchema);
  std::set<DyadicIndex> members;
  for (const Json& m : j.at("members"))
    members.insert(DyadicIndex::parse(m.get<std::string>()));
  return SparseFamily(j.at("depth").get<int>(), std::move(members),
                      j.value("c", 0.5));
}

Json carleson_to_json(const CarlesonSequence& a) {
  return sequence_entries_to_json(kSequenceSchema, a.depth(), a.dim(),
                                  a.entries());
}

CarlesonSequence carleson_from_json(const Json& j) {
  detail::require_schema(j, kSequenceSchema);
  const int dim = j.at("dim").get<int>();
  return CarlesonSequence(j.at("depth").get<int>(), dim,
                          sequence_entries_from_json(j, dim));
}

Json matrix_sequence_to_json(const MatrixSequence& s) {
  return sequence_entries_to_json(kSequenceSchema, s.depth(), s.dim(),
                                  s.entries());
}

MatrixSequence matrix_sequence_from_json(const Json& j) {
  detail::require_schema(j, kSequenceSchema);
  const int dim = j.at("dim").get<int>();
  return MatrixSequence(j.at("depth").get<int>(), dim,
                        sequence_entries_from_json(j, dim));
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path + " for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (!in.good() && !in.eof())
    throw std::runtime_error("error while reading " + path);
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << content;
  out.flush();
  if (!out.good()) throw std::runtime_error("error while writing " + path);
}

Json load_json_file(const std::string& path) {
  try {
    return Json::parse(read_text_file(path));
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

}  // namespace mwlab
