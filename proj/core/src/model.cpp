#include "ssan/model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ssan/errors.hpp"
#include "ssan/rng.hpp"

namespace ssan {

namespace {

Matrix glorot(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Matrix w(fan_in, fan_out);
  for (auto& v : w.data()) v = rng.uniform(-bound, bound);
  return w;
}

}  // namespace

SsanModel init_model(const ModelShapes& s, const InitSpec& init) {
  if (s.d_s == 0 || s.d_t == 0 || s.h == 0 || s.d_common == 0 || s.K == 0)
    throw ParameterError("init_model: every dimension must be >= 1");

  Rng rng(init.seed, Rng::Stream::Init);
  SsanModel m;
  m.shapes = s;
  // Fixed fill order; changing it would silently change every seeded run.
  Matrix es_w1 = glorot(s.d_s, s.h, rng);
  Matrix es_w2 = glorot(s.h, s.d_common, rng);
  Matrix et_w1 = glorot(s.d_t, s.h, rng);
  Matrix et_w2 = glorot(s.h, s.d_common, rng);
  Matrix cls_w = glorot(s.d_common, s.K, rng);
  Matrix disc_w = glorot(s.d_common, 1, rng);

  m.params["es.w1"] = std::move(es_w1);
  m.params["es.b1"] = Matrix(1, s.h);
  m.params["es.w2"] = std::move(es_w2);
  m.params["es.b2"] = Matrix(1, s.d_common);
  m.params["et.w1"] = std::move(et_w1);
  m.params["et.b1"] = Matrix(1, s.h);
  m.params["et.w2"] = std::move(et_w2);
  m.params["et.b2"] = Matrix(1, s.d_common);
  m.params["cls.w"] = std::move(cls_w);
  m.params["cls.b"] = Matrix(1, s.K);
  m.params["disc.w"] = std::move(disc_w);
  m.params["disc.b"] = Matrix(1, 1);
  return m;
}

namespace {

Matrix encode_two_layer(const Matrix& x, const Matrix& w1, const Matrix& b1,
                        const Matrix& w2, const Matrix& b2) {
  Matrix hdn = leaky_relu(affine(x, w1, b1), kLeakySlope);
  return leaky_relu(affine(hdn, w2, b2), kLeakySlope);
}

}  // namespace

Matrix encode_source(const SsanModel& m, const Matrix& X) {
  return encode_two_layer(X, m.params.at("es.w1"), m.params.at("es.b1"),
                          m.params.at("es.w2"), m.params.at("es.b2"));
}

Matrix encode_target(const SsanModel& m, const Matrix& X) {
  return encode_two_layer(X, m.params.at("et.w1"), m.params.at("et.b1"),
                          m.params.at("et.w2"), m.params.at("et.b2"));
}

Matrix classify(const SsanModel& m, const Matrix& Z) {
  return affine(Z, m.params.at("cls.w"), m.params.at("cls.b"));
}

Matrix discriminate(const SsanModel& m, const Matrix& Z) {
  return logistic_clamped(affine(Z, m.params.at("disc.w"), m.params.at("disc.b")));
}

std::vector<int> predict_labels(const Matrix& logits) {
  std::vector<int> out(logits.rows());
  for (std::size_t i = 0; i < logits.rows(); ++i)
    out[i] = static_cast<int>(argmax(logits.row(i)));
  return out;
}

TapeModel put_on_tape(Tape& t, const SsanModel& m) {
  return put_on_tape(t, m.params);
}

TapeModel put_on_tape(Tape& t, const ParamMap& params) {
  TapeModel tm;
  tm.es_w1 = t.param("es.w1", params.at("es.w1"));
  tm.es_b1 = t.param("es.b1", params.at("es.b1"));
  tm.es_w2 = t.param("es.w2", params.at("es.w2"));
  tm.es_b2 = t.param("es.b2", params.at("es.b2"));
  tm.et_w1 = t.param("et.w1", params.at("et.w1"));
  tm.et_b1 = t.param("et.b1", params.at("et.b1"));
  tm.et_w2 = t.param("et.w2", params.at("et.w2"));
  tm.et_b2 = t.param("et.b2", params.at("et.b2"));
  tm.cls_w = t.param("cls.w", params.at("cls.w"));
  tm.cls_b = t.param("cls.b", params.at("cls.b"));
  tm.disc_w = t.param("disc.w", params.at("disc.w"));
  tm.disc_b = t.param("disc.b", params.at("disc.b"));
  return tm;
}

Tape::NodeId encode_source(Tape& t, const TapeModel& tm, Tape::NodeId x) {
  auto hdn = t.leaky_relu(t.affine(x, tm.es_w1, tm.es_b1), kLeakySlope);
  return t.leaky_relu(t.affine(hdn, tm.es_w2, tm.es_b2), kLeakySlope);
}

Tape::NodeId encode_target(Tape& t, const TapeModel& tm, Tape::NodeId x) {
  auto hdn = t.leaky_relu(t.affine(x, tm.et_w1, tm.et_b1), kLeakySlope);
  return t.leaky_relu(t.affine(hdn, tm.et_w2, tm.et_b2), kLeakySlope);
}

Tape::NodeId classify(Tape& t, const TapeModel& tm, Tape::NodeId z) {
  return t.affine(z, tm.cls_w, tm.cls_b);
}

Tape::NodeId discriminate(Tape& t, const TapeModel& tm, Tape::NodeId z) {
  return t.logistic_clamped(t.affine(z, tm.disc_w, tm.disc_b));
}

const std::vector<std::string>& encoder_classifier_param_names() {
  static const std::vector<std::string> names{
      "es.w1", "es.b1", "es.w2", "es.b2", "et.w1", "et.b1",
      "et.w2", "et.b2", "cls.w", "cls.b"};
  return names;
}

const std::vector<std::string>& discriminator_param_names() {
  static const std::vector<std::string> names{"disc.w", "disc.b"};
  return names;
}

void save_model(const SsanModel& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("save_model: cannot open '" + path + "' for writing");
  out << "ssan-model v1\n";
  out << "shapes " << m.shapes.d_s << ' ' << m.shapes.d_t << ' ' << m.shapes.h
      << ' ' << m.shapes.d_common << ' ' << m.shapes.K << '\n';
  char buf[40];
  for (const auto& [name, value] : m.params) {
    out << "param " << name << ' ' << value.rows() << ' ' << value.cols() << '\n';
    for (std::size_t r = 0; r < value.rows(); ++r) {
      auto row = value.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) {
        std::snprintf(buf, sizeof buf, "%.17g", row[c]);
        out << (c ? " " : "") << buf;
      }
      out << '\n';
    }
  }
  out << "end\n";
  if (!out) throw IoError("save_model: write to '" + path + "' failed");
}

SsanModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_model: cannot open '" + path + "'");
  std::string line;
  std::size_t lineno = 0;
  auto next_line = [&]() {
    if (!std::getline(in, line))
      throw ParseError("load_model: unexpected end of file after line " +
                       std::to_string(lineno));
    ++lineno;
  };

  next_line();
  if (line != "ssan-model v1")
    throw ParseError("load_model: line 1: expected header 'ssan-model v1'");

  SsanModel m;
  next_line();
  {
    std::istringstream ss(line);
    std::string tag;
    ss >> tag >> m.shapes.d_s >> m.shapes.d_t >> m.shapes.h >>
        m.shapes.d_common >> m.shapes.K;
    if (tag != "shapes" || !ss)
      throw ParseError("load_model: line " + std::to_string(lineno) +
                       ": malformed shapes line");
  }

  for (;;) {
    next_line();
    if (line == "end") break;
    std::istringstream ss(line);
    std::string tag, name;
    std::size_t rows = 0, cols = 0;
    ss >> tag >> name >> rows >> cols;
    if (tag != "param" || !ss)
      throw ParseError("load_model: line " + std::to_string(lineno) +
                       ": expected 'param <name> <rows> <cols>'");
    Matrix value(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
      next_line();
      std::istringstream vs(line);
      auto row = value.row(r);
      for (std::size_t c = 0; c < cols; ++c) {
        if (!(vs >> row[c]))
          throw ParseError("load_model: line " + std::to_string(lineno) +
                           ": expected " + std::to_string(cols) + " values");
      }
    }
    m.params[name] = std::move(value);
  }
  return m;
}

}  // namespace ssan
