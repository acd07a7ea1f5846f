#include "tailsampler/relu_network.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tailsampler {

std::string_view to_string(OuterLoss outer) {
  switch (outer) {
  case OuterLoss::Identity: return "identity";
  case OuterLoss::Excess: return "excess";
  case OuterLoss::Square: return "square";
  }
  return "unknown";
}

ReluNetwork::ReluNetwork(std::vector<ReluLayer> layers, Vector readout, double readout_bias,
                         OuterLoss outer, double outer_level, std::size_t covariate_dim)
    : layers_(std::move(layers)), readout_(std::move(readout)), readout_bias_(readout_bias),
      outer_(outer), outer_level_(outer_level), covariate_dim_(covariate_dim) {
  Eigen::Index width = layers_.empty() ? readout_.size() : layers_.front().A.cols();
  input_dim_ = static_cast<std::size_t>(width);
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const ReluLayer &layer = layers_[k];
    if (layer.A.cols() != width)
      throw std::invalid_argument("relu layer " + std::to_string(k + 1) + ": expected " +
                                  std::to_string(width) + " columns, got " +
                                  std::to_string(layer.A.cols()));
    if (layer.b.size() != layer.A.rows())
      throw std::invalid_argument("relu layer " + std::to_string(k + 1) +
                                  ": bias length does not match rows");
    width = layer.A.rows();
  }
  if (readout_.size() != width)
    throw std::invalid_argument("relu readout length " + std::to_string(readout_.size()) +
                                " does not match last width " + std::to_string(width));
  if (covariate_dim_ >= input_dim_)
    throw std::invalid_argument("relu network needs at least one factor input");
}

std::size_t ReluNetwork::flat_size(const std::vector<std::size_t> &widths) {
  if (widths.empty())
    throw std::invalid_argument("relu widths must list the input size");
  std::size_t n = 0;
  for (std::size_t k = 1; k < widths.size(); ++k)
    n += widths[k] * widths[k - 1] + widths[k];
  return n + widths.back() + 1;
}

ReluNetwork ReluNetwork::from_flat(const std::vector<double> &params,
                                   const std::vector<std::size_t> &widths, OuterLoss outer,
                                   double outer_level, std::size_t covariate_dim) {
  const std::size_t need = flat_size(widths);
  if (params.size() != need)
    throw std::invalid_argument("relu weights: expected " + std::to_string(need) +
                                " numbers for the declared shapes, got " +
                                std::to_string(params.size()));
  std::size_t pos = 0;
  std::vector<ReluLayer> layers;
  for (std::size_t k = 1; k < widths.size(); ++k) {
    const auto rows = static_cast<Eigen::Index>(widths[k]);
    const auto cols = static_cast<Eigen::Index>(widths[k - 1]);
    ReluLayer layer{Matrix(rows, cols), Vector(rows)};
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j)
        layer.A(i, j) = params[pos++];
    for (Eigen::Index i = 0; i < rows; ++i)
      layer.b(i) = params[pos++];
    layers.push_back(std::move(layer));
  }
  Vector theta(static_cast<Eigen::Index>(widths.back()));
  for (Eigen::Index i = 0; i < theta.size(); ++i)
    theta(i) = params[pos++];
  const double theta0 = params[pos++];
  return ReluNetwork(std::move(layers), std::move(theta), theta0, outer, outer_level,
                     covariate_dim);
}

double ReluNetwork::apply_outer(double s) const {
  switch (outer_) {
  case OuterLoss::Identity: return s;
  case OuterLoss::Excess: return s > outer_level_ ? s - outer_level_ : 0.0;
  case OuterLoss::Square: return (s - outer_level_) * (s - outer_level_);
  }
  return s;
}

double ReluNetwork::score(const Vector &x, const Vector &v) const {
  if (static_cast<std::size_t>(x.size()) != factor_dim() ||
      static_cast<std::size_t>(v.size()) != covariate_dim_)
    throw std::invalid_argument("relu network: input dimension mismatch");
  Vector h(static_cast<Eigen::Index>(input_dim_));
  h << x, v;
  for (const ReluLayer &layer : layers_)
    h = (layer.A * h - layer.b).cwiseMax(0.0);
  return readout_.dot(h) + readout_bias_;
}

double ReluNetwork::eval(const Vector &x) const { return eval(x, Vector::Zero(0)); }

double ReluNetwork::eval(const Vector &x, const Vector &v) const {
  return apply_outer(score(x, v));
}

double ReluNetwork::limit_score(const Vector &x) const {
  if (static_cast<std::size_t>(x.size()) != factor_dim())
    throw std::invalid_argument("relu network: input dimension mismatch");
  if (layers_.empty())
    return readout_.head(x.size()).dot(x);
  const auto d = static_cast<Eigen::Index>(factor_dim());
  Vector h = (layers_.front().A.leftCols(d) * x).cwiseMax(0.0);
  for (std::size_t k = 1; k < layers_.size(); ++k)
    h = (layers_[k].A * h).cwiseMax(0.0);
  return readout_.dot(h);
}

double ReluNetwork::limit_eval(const Vector &x) const {
  const double s = limit_score(x);
  switch (outer_) {
  case OuterLoss::Identity: return s;
  case OuterLoss::Excess: return s > 0.0 ? s : 0.0;
  case OuterLoss::Square: return s * s;
  }
  return s;
}

std::vector<double> read_flat_weights(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open weights file: " + path);
  std::vector<double> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    for (char &c : line)
      if (c == ',' || c == ';')
        c = ' ';
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) {
      char *end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str() || *end != '\0')
        throw std::runtime_error(path + ":" + std::to_string(line_no) + ": not a number: " + tok);
      out.push_back(v);
    }
  }
  return out;
}

} // namespace tailsampler
