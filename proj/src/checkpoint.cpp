#include "hyperhier/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include "hyperhier/errors.hpp"

namespace hyperhier {

namespace {

// shortest text that restores the exact double
std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void append_tensor(std::ostream& os, const std::string& name, std::span<const double> values) {
  os << name << " =";
  for (double v : values) os << " " << fmt(v);
  os << "\n";
}

struct LineReader {
  std::istream& is;
  std::size_t lineno = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw FormatError("model line " + std::to_string(lineno) + ": " + what);
  }

  // next nonempty line split at " = "; key in tokens[0], values after
  std::vector<std::string> next(const std::string& expect_key, std::size_t expect_values) {
    std::string line;
    while (std::getline(is, line)) {
      ++lineno;
      std::istringstream ss(line);
      std::vector<std::string> tokens;
      std::string t;
      while (ss >> t) tokens.push_back(t);
      if (tokens.empty()) continue;
      if (tokens[0] != expect_key) fail("expected '" + expect_key + "', got '" + tokens[0] + "'");
      if (tokens.size() < 2 || tokens[1] != "=") fail("expected '=' after '" + expect_key + "'");
      if (tokens.size() != expect_values + 2)
        fail("expected " + std::to_string(expect_values) + " values for '" + expect_key + "'");
      tokens.erase(tokens.begin(), tokens.begin() + 2);
      return tokens;
    }
    throw FormatError("model: unexpected end of file, wanted '" + expect_key + "'");
  }

  double number(const std::string& token) const {
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0') fail("bad number '" + token + "'");
    return v;
  }

  std::size_t integer(const std::string& token) const {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(token.c_str(), &end, 10);
    if (end == token.c_str() || *end != '\0') fail("bad integer '" + token + "'");
    return static_cast<std::size_t>(v);
  }
};

}  // namespace

std::string format_model(const FlatModel& model) {
  model.validate();
  std::ostringstream os;
  os << "header = " << geometry_name(model.geometry) << " " << model.classes() << " "
     << model.dim() << " " << fmt(model.ball.c) << " " << fmt(model.ball.boundary_eps) << "\n";
  for (std::size_t k = 0; k < model.classes(); ++k) {
    const std::string tag = std::to_string(k);
    if (model.geometry == Geometry::hyperbolic) {
      append_tensor(os, "gyroplane." + tag + ".offset", model.planes[k].offset.coords);
      append_tensor(os, "gyroplane." + tag + ".normal", model.planes[k].normal.coords);
    } else {
      append_tensor(os, "class." + tag + ".weight", model.weights[k].coords);
      const double bias[1] = {model.biases[k]};
      append_tensor(os, "class." + tag + ".bias", bias);
    }
  }
  return os.str();
}

FlatModel parse_model(std::istream& is) {
  LineReader reader{is};
  const std::vector<std::string> header = reader.next("header", 5);
  FlatModel model;
  try {
    model.geometry = parse_geometry(header[0]);
  } catch (const std::invalid_argument& e) {
    reader.fail(e.what());
  }
  const std::size_t classes = reader.integer(header[1]);
  const std::size_t dim = reader.integer(header[2]);
  model.ball.c = reader.number(header[3]);
  model.ball.boundary_eps = reader.number(header[4]);
  if (classes < 2) reader.fail("fewer than two classes");
  if (dim == 0) reader.fail("zero dimension");

  const auto read_vec = [&](const std::string& key, std::size_t count) {
    const std::vector<std::string> tokens = reader.next(key, count);
    Vec v(count);
    for (std::size_t i = 0; i < count; ++i) v[i] = reader.number(tokens[i]);
    return v;
  };
  for (std::size_t k = 0; k < classes; ++k) {
    const std::string tag = std::to_string(k);
    if (model.geometry == Geometry::hyperbolic) {
      Gyroplane plane;
      plane.offset.coords = read_vec("gyroplane." + tag + ".offset", dim);
      plane.normal.coords = read_vec("gyroplane." + tag + ".normal", dim);
      model.planes.push_back(std::move(plane));
    } else {
      model.weights.push_back(Tangent{read_vec("class." + tag + ".weight", dim)});
      model.biases.push_back(read_vec("class." + tag + ".bias", 1)[0]);
    }
  }
  std::string extra;
  while (std::getline(is, extra)) {
    ++reader.lineno;
    std::istringstream ss(extra);
    std::string t;
    if (ss >> t) reader.fail("trailing content '" + t + "'");
  }
  try {
    model.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("model: ") + e.what());
  }
  return model;
}

FlatModel load_model(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw FileMissingError("no such file: " + path.string());
  std::ifstream is(path);
  if (!is) throw IoError("cannot open: " + path.string());
  return parse_model(is);
}

void save_model(const std::filesystem::path& path, const FlatModel& model) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  os << format_model(model);
  if (!os) throw IoError("write failed: " + path.string());
}

}  // namespace hyperhier
