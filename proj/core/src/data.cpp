#include "ssan/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>

#include "ssan/errors.hpp"
#include "ssan/rng.hpp"

namespace ssan {

void validate_dataset(const HdaDataset& ds) {
  if (ds.K == 0) throw ProtocolError("dataset: class count is 0");
  if (ds.x_s.rows() == 0) throw ProtocolError("dataset: empty source domain");
  if (ds.x_l.rows() == 0) throw ProtocolError("dataset: no labeled target data");
  if (ds.y_s.size() != ds.x_s.rows() || ds.y_l.size() != ds.x_l.rows())
    throw DimensionError("dataset: label/row count mismatch");
  if (ds.has_truth() && ds.y_u_truth.size() != ds.x_u.rows())
    throw DimensionError("dataset: truth/row count mismatch");

  auto check_side = [&](const std::vector<int>& y, const char* side) {
    std::vector<bool> seen(ds.K, false);
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] < 0 || static_cast<std::size_t>(y[i]) >= ds.K)
        throw LabelError(std::string("dataset(") + side + "): label " +
                         std::to_string(y[i]) + " out of range at row " +
                         std::to_string(i));
      seen[static_cast<std::size_t>(y[i])] = true;
    }
    for (std::size_t k = 0; k < ds.K; ++k)
      if (!seen[k])
        throw ProtocolError(std::string("dataset(") + side + "): class " +
                            std::to_string(k) + " has no instance");
  };
  check_side(ds.y_s, "source");
  check_side(ds.y_l, "labeled target");

  if (ds.x_l.rows() > ds.x_u.rows())
    std::cerr << "[ssan] warning: labeled target (" << ds.x_l.rows()
              << " rows) outnumbers unlabeled target (" << ds.x_u.rows()
              << " rows); the protocol expects the opposite\n";
}

LoadedCsv load_feature_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_feature_csv: cannot open '" + path + "'");

  LoadedCsv out;
  std::vector<double> values;
  std::size_t width = 0;  // features per row
  std::size_t lineno = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() && in.eof()) break;
    std::vector<double> fields;
    const char* p = line.c_str();
    for (;;) {
      char* end = nullptr;
      const double v = std::strtod(p, &end);
      if (end == p)
        throw ParseError("load_feature_csv: " + path + ": line " +
                         std::to_string(lineno) + ": non-numeric field");
      fields.push_back(v);
      while (*end == ' ' || *end == '\t') ++end;
      if (*end == ',') {
        p = end + 1;
      } else if (*end == '\0' || *end == '\r') {
        break;
      } else {
        throw ParseError("load_feature_csv: " + path + ": line " +
                         std::to_string(lineno) + ": unexpected character '" +
                         std::string(1, *end) + "'");
      }
    }
    if (fields.size() < 2)
      throw ParseError("load_feature_csv: " + path + ": line " +
                       std::to_string(lineno) +
                       ": need a label and at least one feature");
    const double label = fields[0];
    if (label != std::floor(label) || label < -1)
      throw ParseError("load_feature_csv: " + path + ": line " +
                       std::to_string(lineno) + ": label must be an integer >= -1");
    if (width == 0) {
      width = fields.size() - 1;
    } else if (fields.size() - 1 != width) {
      throw ParseError("load_feature_csv: " + path + ": line " +
                       std::to_string(lineno) + ": expected " +
                       std::to_string(width) + " features, got " +
                       std::to_string(fields.size() - 1));
    }
    out.labels.push_back(static_cast<int>(label));
    values.insert(values.end(), fields.begin() + 1, fields.end());
  }
  if (out.labels.empty())
    throw ParseError("load_feature_csv: " + path + ": empty file");

  out.x = Matrix(out.labels.size(), width);
  std::copy(values.begin(), values.end(), out.x.data().begin());
  return out;
}

void save_feature_csv(const std::string& path, const Matrix& x,
                      const std::vector<int>& labels) {
  if (labels.size() != x.rows())
    throw DimensionError("save_feature_csv: " + std::to_string(labels.size()) +
                         " labels for " + x.shape_str());
  std::ofstream out(path);
  if (!out) throw IoError("save_feature_csv: cannot open '" + path + "' for writing");
  char buf[40];
  for (std::size_t i = 0; i < x.rows(); ++i) {
    out << labels[i];
    for (double v : x.row(i)) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << ',' << buf;
    }
    out << '\n';
  }
  if (!out) throw IoError("save_feature_csv: write to '" + path + "' failed");
}

SplitResult split_protocol(const Matrix& pool_x, const std::vector<int>& pool_y,
                           std::size_t m, std::uint64_t seed) {
  if (pool_y.size() != pool_x.rows())
    throw DimensionError("split_protocol: " + std::to_string(pool_y.size()) +
                         " labels for " + pool_x.shape_str());
  if (m == 0) throw ParameterError("split_protocol: m must be >= 1");

  int max_label = -1;
  for (std::size_t i = 0; i < pool_y.size(); ++i) {
    if (pool_y[i] < 0)
      throw LabelError("split_protocol: unlabeled row " + std::to_string(i) +
                       " in the labeled pool");
    max_label = std::max(max_label, pool_y[i]);
  }
  if (max_label < 0) throw ProtocolError("split_protocol: empty pool");
  const std::size_t K = static_cast<std::size_t>(max_label) + 1;

  std::vector<std::vector<std::size_t>> by_class(K);
  for (std::size_t i = 0; i < pool_y.size(); ++i)
    by_class[static_cast<std::size_t>(pool_y[i])].push_back(i);

  Rng rng(seed, Rng::Stream::Split);
  std::vector<bool> labeled(pool_y.size(), false);
  for (std::size_t k = 0; k < K; ++k) {
    auto& rows = by_class[k];
    if (rows.size() <= m)
      throw ProtocolError("split_protocol: class " + std::to_string(k) +
                          " has " + std::to_string(rows.size()) +
                          " instances, need more than m=" + std::to_string(m));
    // Partial Fisher-Yates: the first m slots end up a uniform sample.
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t pick = j + rng.below(rows.size() - j);
      std::swap(rows[j], rows[pick]);
      labeled[rows[j]] = true;
    }
  }

  SplitResult out;
  std::vector<std::size_t> l_rows, u_rows;
  for (std::size_t i = 0; i < pool_y.size(); ++i)
    (labeled[i] ? l_rows : u_rows).push_back(i);
  out.x_l = select_rows(pool_x, l_rows);
  out.x_u = select_rows(pool_x, u_rows);
  for (std::size_t i : l_rows) out.y_l.push_back(pool_y[i]);
  for (std::size_t i : u_rows) out.y_u_truth.push_back(pool_y[i]);
  return out;
}

Standardizer fit_standardizer(const Matrix& reference) {
  if (reference.rows() == 0)
    throw ProtocolError("fit_standardizer: empty reference matrix");
  const std::size_t n = reference.rows();
  const std::size_t d = reference.cols();
  Standardizer s;
  s.mean = Matrix(1, d);
  s.scale = Matrix(1, d, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = reference.row(i);
    for (std::size_t j = 0; j < d; ++j) s.mean(0, j) += row[j];
  }
  for (double& v : s.mean.row(0)) v /= static_cast<double>(n);
  Matrix var(1, d);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = reference.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      const double c = row[j] - s.mean(0, j);
      var(0, j) += c * c;
    }
  }
  for (std::size_t j = 0; j < d; ++j) {
    const double v = var(0, j) / static_cast<double>(n);
    if (v >= 1e-12) s.scale(0, j) = std::sqrt(v);
  }
  return s;
}

Matrix apply_standardizer(const Standardizer& s, const Matrix& x) {
  if (x.rows() != 0 && x.cols() != s.mean.cols())
    throw DimensionError("apply_standardizer: " + x.shape_str() +
                         " vs statistics " + s.mean.shape_str());
  Matrix out = x;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto row = out.row(i);
    for (std::size_t j = 0; j < row.size(); ++j)
      row[j] = (row[j] - s.mean(0, j)) / s.scale(0, j);
  }
  return out;
}

void standardize_dataset(HdaDataset& ds) {
  Standardizer src = fit_standardizer(ds.x_s);
  ds.x_s = apply_standardizer(src, ds.x_s);
  Standardizer tgt = fit_standardizer(concat_rows(ds.x_l, ds.x_u));
  ds.x_l = apply_standardizer(tgt, ds.x_l);
  ds.x_u = apply_standardizer(tgt, ds.x_u);
}

void validate(const SynthSpec& spec) {
  if (spec.K == 0 || spec.d_latent == 0 || spec.d_s == 0 || spec.d_t == 0 ||
      spec.per_class == 0 || spec.m == 0)
    throw ParameterError("synth spec: every count must be >= 1");
  if (!(spec.separation > 0.0))
    throw ParameterError("synth spec: separation must be > 0");
  if (spec.noise < 0.0) throw ParameterError("synth spec: noise must be >= 0");
  if (spec.per_class <= spec.m)
    throw ParameterError("synth spec: per_class must exceed m");
}

namespace {

// Observed features: tanh of a random linear read-out of the latent,
// plus a small observation noise. Entries of the read-out matrix scale
// with 1/sqrt(d_latent) to keep tanh inputs O(separation).
Matrix observe(const Matrix& latents, const Matrix& a, double noise, Rng& rng) {
  Matrix x = matmul(latents, a);
  for (double& v : x.data()) v = std::tanh(v);
  if (noise > 0.0) {
    const double eps = 0.1 * noise;
    for (double& v : x.data()) v += eps * rng.gaussian();
  }
  return x;
}

}  // namespace

SynthPool synth_generate_pool(const SynthSpec& spec, SynthDebug* debug) {
  validate(spec);
  Rng rng(spec.seed, Rng::Stream::Synth);

  // Class means on a sphere of radius `separation`.
  Matrix means(spec.K, spec.d_latent);
  for (std::size_t k = 0; k < spec.K; ++k) {
    auto row = means.row(k);
    double norm = 0.0;
    do {
      norm = 0.0;
      for (double& v : row) {
        v = rng.gaussian();
        norm += v * v;
      }
      norm = std::sqrt(norm);
    } while (norm < 1e-12);
    for (double& v : row) v *= spec.separation / norm;
  }

  Matrix a_s(spec.d_latent, spec.d_s);
  Matrix a_t(spec.d_latent, spec.d_t);
  const double a_scale = 1.0 / std::sqrt(static_cast<double>(spec.d_latent));
  for (double& v : a_s.data()) v = rng.gaussian() * a_scale;
  for (double& v : a_t.data()) v = rng.gaussian() * a_scale;

  const std::size_t n = spec.K * spec.per_class;
  auto draw_latents = [&](Matrix& latents, std::vector<int>& labels) {
    latents = Matrix(n, spec.d_latent);
    labels.resize(n);
    std::size_t row = 0;
    for (std::size_t k = 0; k < spec.K; ++k) {
      for (std::size_t i = 0; i < spec.per_class; ++i, ++row) {
        auto dst = latents.row(row);
        auto mu = means.row(k);
        for (std::size_t j = 0; j < spec.d_latent; ++j)
          dst[j] = mu[j] + spec.noise * rng.gaussian();
        labels[row] = static_cast<int>(k);
      }
    }
  };

  Matrix source_latents, target_latents;
  SynthPool out;
  draw_latents(source_latents, out.y_s);
  draw_latents(target_latents, out.pool_y);
  out.x_s = observe(source_latents, a_s, spec.noise, rng);
  out.pool_x = observe(target_latents, a_t, spec.noise, rng);

  if (debug) {
    debug->class_means = means;
    debug->source_latents = std::move(source_latents);
    debug->target_latents = std::move(target_latents);
  }
  return out;
}

HdaDataset synth_generate(const SynthSpec& spec, SynthDebug* debug) {
  SynthPool pool = synth_generate_pool(spec, debug);
  SplitResult split = split_protocol(pool.pool_x, pool.pool_y, spec.m, spec.seed);
  HdaDataset ds;
  ds.x_s = std::move(pool.x_s);
  ds.y_s = std::move(pool.y_s);
  ds.x_l = std::move(split.x_l);
  ds.y_l = std::move(split.y_l);
  ds.x_u = std::move(split.x_u);
  ds.y_u_truth = std::move(split.y_u_truth);
  ds.K = spec.K;
  return ds;
}

}  // namespace ssan
