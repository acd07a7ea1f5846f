#include "tailsampler/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include "tailsampler/lp_solver.hpp"
#include "tailsampler/relu_network.hpp"

namespace tailsampler {

using nlohmann::json;

ConfigError::ConfigError(std::string pointer, const std::string &message)
    : std::runtime_error("config error at " + (pointer.empty() ? std::string("/") : pointer) +
                         ": " + message),
      pointer_(std::move(pointer)) {}

namespace {

std::string escape_token(const std::string &key) {
  std::string out;
  for (char c : key) {
    if (c == '~')
      out += "~0";
    else if (c == '/')
      out += "~1";
    else
      out += c;
  }
  return out;
}

// A JSON value together with its pointer, so every error names its location.
class Node {
public:
  Node(const json &v, std::string ptr) : v_(&v), ptr_(std::move(ptr)) {}

  const json &value() const { return *v_; }
  const std::string &ptr() const { return ptr_; }

  [[noreturn]] void fail(const std::string &msg) const { throw ConfigError(ptr_, msg); }

  void require_object() const {
    if (!v_->is_object())
      fail("expected an object");
  }

  void allow_keys(std::initializer_list<const char *> keys) const {
    require_object();
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (auto it = v_->begin(); it != v_->end(); ++it)
      if (!allowed.count(it.key()))
        throw ConfigError(ptr_ + "/" + escape_token(it.key()), "unknown key");
  }

  bool has(const char *key) const { return v_->is_object() && v_->contains(key); }

  Node at(const char *key) const {
    require_object();
    if (!v_->contains(key))
      throw ConfigError(ptr_ + "/" + escape_token(key), "missing required key");
    return Node((*v_)[key], ptr_ + "/" + escape_token(key));
  }

  std::optional<Node> opt(const char *key) const {
    require_object();
    if (!v_->contains(key))
      return std::nullopt;
    return Node((*v_)[key], ptr_ + "/" + escape_token(key));
  }

  std::size_t size() const {
    if (!v_->is_array())
      fail("expected an array");
    return v_->size();
  }

  Node operator[](std::size_t i) const {
    return Node((*v_)[i], ptr_ + "/" + std::to_string(i));
  }

  double number() const {
    if (!v_->is_number())
      fail("expected a number");
    const double x = v_->get<double>();
    if (!std::isfinite(x))
      fail("expected a finite number");
    return x;
  }

  double positive() const {
    const double x = number();
    if (!(x > 0.0))
      fail("expected a positive number");
    return x;
  }

  std::size_t count(std::size_t min = 1) const {
    if (!v_->is_number_integer() || v_->get<long long>() < static_cast<long long>(min))
      fail("expected an integer >= " + std::to_string(min));
    return v_->get<std::size_t>();
  }

  std::uint64_t seed() const {
    if (!v_->is_number_unsigned() && !(v_->is_number_integer() && v_->get<long long>() >= 0))
      fail("expected a nonnegative integer");
    return v_->get<std::uint64_t>();
  }

  bool boolean() const {
    if (!v_->is_boolean())
      fail("expected true or false");
    return v_->get<bool>();
  }

  std::string string() const {
    if (!v_->is_string())
      fail("expected a string");
    return v_->get<std::string>();
  }

  std::vector<double> numbers(std::size_t min_len = 1) const {
    const std::size_t n = size();
    if (n < min_len)
      fail("expected at least " + std::to_string(min_len) + " entries");
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
      out[i] = (*this)[i].number();
    return out;
  }

  Vector vector(std::size_t len) const {
    const std::vector<double> xs = numbers(len == 0 ? 1 : len);
    if (len != 0 && xs.size() != len)
      fail("expected " + std::to_string(len) + " entries");
    return Eigen::Map<const Vector>(xs.data(), static_cast<Eigen::Index>(xs.size()));
  }

  Matrix matrix(std::size_t rows, std::size_t cols) const {
    const std::size_t r = size();
    if (rows != 0 && r != rows)
      fail("expected " + std::to_string(rows) + " rows");
    if (r == 0)
      fail("expected a non-empty matrix");
    Matrix M;
    for (std::size_t i = 0; i < r; ++i) {
      const Vector row = (*this)[i].vector(cols);
      if (i == 0) {
        cols = static_cast<std::size_t>(row.size());
        M.resize(static_cast<Eigen::Index>(r), row.size());
      } else if (static_cast<std::size_t>(row.size()) != cols) {
        (*this)[i].fail("ragged matrix row");
      }
      M.row(static_cast<Eigen::Index>(i)) = row.transpose();
    }
    return M;
  }

private:
  const json *v_;
  std::string ptr_;
};

template <class F> auto guarded(const Node &n, F &&f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError &) {
    throw;
  } catch (const std::exception &e) {
    n.fail(e.what());
  }
}

Marginal parse_marginal(const Node &n) {
  const std::string kind = n.at("kind").string();
  auto get = [&n](const char *key, double fallback) {
    const auto v = n.opt(key);
    return v ? v->number() : fallback;
  };
  auto need = [&n](const char *key) { return n.at(key).number(); };
  return guarded(n, [&]() -> Marginal {
    if (kind == "exponential") {
      n.allow_keys({"kind", "count", "rate"});
      return Marginal::exponential(get("rate", 1.0));
    }
    if (kind == "weibull") {
      n.allow_keys({"kind", "count", "shape", "scale"});
      return Marginal::weibull(need("shape"), get("scale", 1.0));
    }
    if (kind == "normal") {
      n.allow_keys({"kind", "count", "mean", "sd"});
      return Marginal::normal(get("mean", 0.0), get("sd", 1.0));
    }
    if (kind == "gamma") {
      n.allow_keys({"kind", "count", "shape", "rate"});
      return Marginal::gamma(need("shape"), get("rate", 1.0));
    }
    if (kind == "lognormal") {
      n.allow_keys({"kind", "count", "mu", "sigma"});
      return Marginal::lognormal(get("mu", 0.0), get("sigma", 1.0));
    }
    if (kind == "pareto") {
      n.allow_keys({"kind", "count", "index", "scale"});
      return Marginal::pareto(need("index"), get("scale", 1.0));
    }
    n.at("kind").fail("unknown marginal kind '" + kind + "'");
  });
}

Copula parse_copula(const Node &n, std::size_t d) {
  const std::string kind = n.at("kind").string();
  if (kind == "independence") {
    n.allow_keys({"kind"});
    return Copula::independence(d);
  }
  if (kind == "gaussian") {
    n.allow_keys({"kind", "R", "equicorrelation", "band"});
    const int given = n.has("R") + n.has("equicorrelation") + n.has("band");
    if (given != 1)
      n.fail("gaussian copula needs exactly one of R, equicorrelation, band");
    Matrix R;
    std::string where;
    if (auto c = n.opt("R")) {
      R = c->matrix(d, d);
      where = c->ptr();
    } else if (auto e = n.opt("equicorrelation")) {
      R = equicorrelation(d, e->number());
      where = e->ptr();
    } else {
      auto b = n.at("band");
      R = band_correlation(d, b.number());
      where = b.ptr();
    }
    try {
      return Copula::gaussian(R);
    } catch (const std::exception &ex) {
      throw ConfigError(where, ex.what());
    }
  }
  if (kind == "clayton") {
    n.allow_keys({"kind", "theta"});
    const auto t = n.at("theta");
    return guarded(t, [&] { return Copula::clayton(d, t.positive()); });
  }
  n.at("kind").fail("unknown copula kind '" + kind + "'");
}

ModelSpec parse_model(const Node &n) {
  n.allow_keys({"marginals", "copula"});
  ModelSpec spec;
  const Node ms = n.at("marginals");
  if (ms.size() == 0)
    ms.fail("at least one marginal is required");
  for (std::size_t i = 0; i < ms.size(); ++i) {
    const Node m = ms[i];
    const Marginal marg = parse_marginal(m);
    const std::size_t reps = m.has("count") ? m.at("count").count() : 1;
    spec.marginals.insert(spec.marginals.end(), reps, marg);
  }
  if (auto c = n.opt("copula"))
    spec.copula = parse_copula(*c, spec.marginals.size());
  else
    spec.copula = Copula::independence(spec.marginals.size());
  return spec;
}

OuterLoss parse_outer(const Node &n) {
  const std::string s = n.string();
  if (s == "identity")
    return OuterLoss::Identity;
  if (s == "excess")
    return OuterLoss::Excess;
  if (s == "square")
    return OuterLoss::Square;
  n.fail("unknown outer loss '" + s + "'");
}

// Either explicit layers or a flat parameter array (inline or from a file).
ReluNetwork parse_relu(const Node &n, std::size_t factor_dim, std::size_t covariate_dim,
                       const std::filesystem::path &base_dir,
                       std::initializer_list<const char *> extra_keys) {
  std::vector<const char *> keys{"layers",  "readout", "readout_bias", "widths",
                                 "weights", "weights_file", "outer", "outer_level"};
  keys.insert(keys.end(), extra_keys.begin(), extra_keys.end());
  {
    std::set<std::string> allowed(keys.begin(), keys.end());
    n.require_object();
    for (auto it = n.value().begin(); it != n.value().end(); ++it)
      if (!allowed.count(it.key()))
        throw ConfigError(n.ptr() + "/" + escape_token(it.key()), "unknown key");
  }
  const OuterLoss outer = n.has("outer") ? parse_outer(n.at("outer")) : OuterLoss::Identity;
  const double level = n.has("outer_level") ? n.at("outer_level").number() : 0.0;
  const std::size_t input = factor_dim + covariate_dim;

  if (n.has("layers")) {
    if (n.has("widths") || n.has("weights") || n.has("weights_file"))
      n.fail("give either layers or widths with weights, not both");
    const Node ls = n.at("layers");
    if (ls.size() == 0)
      ls.fail("at least one layer is required");
    std::vector<ReluLayer> layers;
    std::size_t width = input;
    for (std::size_t k = 0; k < ls.size(); ++k) {
      const Node L = ls[k];
      L.allow_keys({"A", "b"});
      Matrix A = L.at("A").matrix(0, width);
      Vector b = L.has("b") ? L.at("b").vector(static_cast<std::size_t>(A.rows()))
                            : Vector::Zero(A.rows());
      width = static_cast<std::size_t>(A.rows());
      layers.push_back({std::move(A), std::move(b)});
    }
    const Vector readout = n.has("readout") ? n.at("readout").vector(width) : Vector::Ones(
        static_cast<Eigen::Index>(width));
    const double bias = n.has("readout_bias") ? n.at("readout_bias").number() : 0.0;
    return guarded(n, [&] {
      return ReluNetwork(std::move(layers), readout, bias, outer, level, covariate_dim);
    });
  }

  const Node w = n.at("widths");
  std::vector<std::size_t> widths(w.size());
  for (std::size_t i = 0; i < widths.size(); ++i)
    widths[i] = w[i].count();
  if (widths.size() < 2)
    w.fail("widths needs the input width and at least one hidden width");
  if (widths.front() != input)
    w[0].fail("input width must be " + std::to_string(input));
  std::vector<double> params;
  if (n.has("weights") == n.has("weights_file"))
    n.fail("give exactly one of weights, weights_file");
  if (auto p = n.opt("weights")) {
    params = p->numbers();
  } else {
    const Node f = n.at("weights_file");
    std::filesystem::path path = f.string();
    if (path.is_relative())
      path = base_dir / path;
    params = guarded(f, [&] { return read_flat_weights(path.string()); });
  }
  if (params.size() != ReluNetwork::flat_size(widths))
    n.fail("expected " + std::to_string(ReluNetwork::flat_size(widths)) + " weights, got " +
           std::to_string(params.size()));
  return guarded(n, [&] {
    return ReluNetwork::from_flat(params, widths, outer, level, covariate_dim);
  });
}

NetworkSpec parse_network(const Node &n, std::size_t d) {
  NetworkSpec spec;
  spec.topology = n.at("topology").string();
  if (spec.topology == "complete") {
    if (d < 2)
      n.fail("a complete network needs at least two nodes");
    spec.A = complete_network(d);
  } else if (spec.topology == "cyclic") {
    if (d < 2)
      n.fail("a cyclic network needs at least two nodes");
    spec.A = cyclic_network(d);
  } else if (spec.topology == "custom") {
    spec.A = n.at("A").matrix(d, d);
  } else {
    n.at("topology").fail("unknown topology '" + spec.topology + "'");
  }
  if (spec.topology != "custom" && n.has("A"))
    n.at("A").fail("A is only accepted with topology 'custom'");
  const std::string where = n.has("A") ? n.at("A").ptr() : n.at("topology").ptr();
  if (!is_row_stochastic(spec.A, 1e-9))
    throw ConfigError(where, "connectivity matrix must have zero diagonal, nonnegative entries "
                             "and unit row sums");
  if (!is_irreducible(spec.A))
    throw ConfigError(where, "connectivity matrix is reducible; excess demand could be trapped "
                             "and the network LP may be unbounded");
  if (auto w = n.opt("supply_weights")) {
    spec.supply_weights = w->vector(d);
    if ((spec.supply_weights.array() <= 0.0).any())
      w->fail("supply weights must be positive");
    spec.supply_weights /= spec.supply_weights.sum();
  } else {
    spec.supply_weights = Vector::Constant(static_cast<Eigen::Index>(d), 1.0 / static_cast<double>(d));
  }
  if (auto k = n.opt("k")) {
    spec.k = k->number();
    if (spec.k < 0.0)
      k->fail("k must be nonnegative");
  }
  return spec;
}

LossSpec parse_loss(const Node &n, std::size_t d, const std::filesystem::path &base_dir) {
  const std::string kind = n.at("kind").string();
  LossSpec spec;
  if (kind == "linear") {
    n.allow_keys({"kind", "w"});
    spec.loss = LossModel::linear(n.at("w").vector(d));
  } else if (kind == "piecewise_affine") {
    n.allow_keys({"kind", "pieces"});
    const Node ps = n.at("pieces");
    if (ps.size() == 0)
      ps.fail("at least one piece is required");
    std::vector<Vector> theta;
    std::vector<double> r;
    for (std::size_t i = 0; i < ps.size(); ++i) {
      ps[i].allow_keys({"theta", "r"});
      theta.push_back(ps[i].at("theta").vector(d));
      r.push_back(ps[i].has("r") ? ps[i].at("r").number() : 0.0);
    }
    spec.loss = guarded(n, [&] { return LossModel::piecewise_affine(theta, r); });
  } else if (kind == "piecewise_quadratic") {
    n.allow_keys({"kind", "pieces"});
    const Node ps = n.at("pieces");
    if (ps.size() == 0)
      ps.fail("at least one piece is required");
    std::vector<Matrix> Q;
    std::vector<Vector> c;
    for (std::size_t i = 0; i < ps.size(); ++i) {
      ps[i].allow_keys({"Q", "c"});
      Q.push_back(ps[i].at("Q").matrix(d, d));
      c.push_back(ps[i].has("c") ? ps[i].at("c").vector(d)
                                 : Vector::Zero(static_cast<Eigen::Index>(d)));
    }
    spec.loss = guarded(n, [&] { return LossModel::piecewise_quadratic(Q, c); });
  } else if (kind == "relu") {
    spec.loss = LossModel::relu(parse_relu(n, d, 0, base_dir, {"kind"}));
  } else if (kind == "distribution_network") {
    n.allow_keys({"kind", "topology", "A", "supply_weights", "k"});
    spec.network = parse_network(n, d);
    spec.loss = LossModel::distribution_network(spec.network->A, spec.network->supply_weights);
  } else {
    n.at("kind").fail("unknown loss kind '" + kind + "'");
  }
  spec.rho = spec.loss->rho();
  return spec;
}

LPolicy parse_l(const Node &n) {
  LPolicy p;
  if (n.value().is_number()) {
    p.value = n.positive();
    return p;
  }
  const std::string policy = n.at("policy").string();
  if (policy == "fixed") {
    n.allow_keys({"policy", "value"});
    p.value = n.at("value").positive();
  } else if (policy == "crossval") {
    n.allow_keys({"policy", "grid", "relative_to_log_u"});
    p.crossval = true;
    p.grid = n.at("grid").numbers();
    if (auto r = n.opt("relative_to_log_u"))
      p.relative_to_log_u = r->boolean();
    if (!p.relative_to_log_u)
      for (std::size_t i = 0; i < p.grid.size(); ++i)
        if (!(p.grid[i] > 0.0))
          n.at("grid")[i].fail("grid values must be positive");
  } else {
    n.at("policy").fail("unknown l policy '" + policy + "'");
  }
  return p;
}

std::vector<double> parse_levels(const Node &n) {
  std::vector<double> xs = n.numbers();
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (!(xs[i] > 0.0))
      n[i].fail("sweep levels must be positive");
  return xs;
}

EstimateConfig parse_estimate_common(const Node &root, const std::filesystem::path &base_dir) {
  root.allow_keys({"description", "model", "loss", "sweep", "n_samples", "l", "seed",
                   "naive_samples", "chunk_size"});
  EstimateConfig cfg;
  cfg.model = parse_model(root.at("model"));
  cfg.loss = parse_loss(root.at("loss"), cfg.model.marginals.size(), base_dir);
  cfg.sweep = parse_levels(root.at("sweep"));
  cfg.n_samples = root.at("n_samples").count();
  cfg.l = parse_l(root.at("l"));
  if (auto s = root.opt("seed"))
    cfg.seed = s->seed();
  if (auto s = root.opt("naive_samples"))
    cfg.naive_samples = s->count(0);
  if (auto s = root.opt("chunk_size"))
    cfg.chunk_size = s->count();
  if (!cfg.l.crossval)
    for (std::size_t i = 0; i < cfg.sweep.size(); ++i)
      if (cfg.sweep[i] < cfg.l.value)
        root.at("sweep")[i].fail("sweep level is below the fixed l");
  return cfg;
}

} // namespace

std::vector<double> LPolicy::candidates(double u) const {
  if (!crossval)
    return {value};
  std::vector<double> out;
  for (double g : grid) {
    const double l = relative_to_log_u ? g + std::log(u) : g;
    if (l > 0.0 && l < u)
      out.push_back(l);
  }
  return out;
}

json load_json_file(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open config file " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error &e) {
    throw std::runtime_error("config file " + path.string() + " is not valid JSON: " + e.what());
  }
}

std::uint64_t config_hash(const json &config) {
  const std::string s = config.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

EstimateConfig parse_estimate_config(const json &j, const std::filesystem::path &base_dir) {
  const Node root(j, "");
  EstimateConfig cfg = parse_estimate_common(root, base_dir);
  if (cfg.loss.network)
    root.at("loss").fail("distribution networks are run with the network command");
  return cfg;
}

EstimateConfig parse_network_config(const json &j, const std::filesystem::path &base_dir) {
  const Node root(j, "");
  EstimateConfig cfg = parse_estimate_common(root, base_dir);
  if (!cfg.loss.network)
    root.at("loss").at("kind").fail("the network command needs a distribution_network loss");
  return cfg;
}

EstimateConfig parse_crossval_config(const json &j, const std::filesystem::path &base_dir) {
  const Node root(j, "");
  EstimateConfig cfg = parse_estimate_common(root, base_dir);
  if (!cfg.l.crossval)
    root.at("l").fail("the crossval command needs a crossval l policy");
  return cfg;
}

PcrConfig parse_pcr_config(const json &j, const std::filesystem::path &base_dir) {
  const Node root(j, "");
  root.allow_keys({"description", "model", "portfolio", "default_model", "gamma", "n_samples",
                   "l", "seed", "factor_level", "naive_samples", "chunk_size"});
  PcrConfig cfg;
  cfg.model = parse_model(root.at("model"));
  const std::size_t d = cfg.model.marginals.size();

  const Node pf = root.at("portfolio");
  pf.allow_keys({"loans", "exposures", "types", "covariates", "q", "networks"});
  const Node nets = pf.at("networks");
  if (nets.size() == 0)
    nets.fail("at least one score network is required");
  for (std::size_t t = 0; t < nets.size(); ++t) {
    const std::size_t cov = nets[t].has("covariate_dim") ? nets[t].at("covariate_dim").count(0) : 0;
    cfg.book.W.push_back(parse_relu(nets[t], d, cov, base_dir, {"covariate_dim"}));
  }
  std::size_t m = 0;
  if (auto l = pf.opt("loans"))
    m = l->count();
  else if (auto e = pf.opt("exposures"); e && e->value().is_array())
    m = e->size();
  else
    pf.fail("give the loan count or an exposure per loan");

  if (auto e = pf.opt("exposures")) {
    if (e->value().is_array()) {
      if (e->size() != m)
        e->fail("expected " + std::to_string(m) + " exposures");
      for (std::size_t i = 0; i < m; ++i)
        cfg.book.exposures.push_back((*e)[i].positive());
    } else {
      cfg.book.exposures.assign(m, e->positive());
    }
  } else {
    cfg.book.exposures.assign(m, 1.0);
  }
  if (auto t = pf.opt("types")) {
    if (t->size() != m)
      t->fail("expected " + std::to_string(m) + " types");
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t ty = (*t)[i].count(0);
      if (ty >= cfg.book.W.size())
        (*t)[i].fail("type has no score network");
      cfg.book.types.push_back(ty);
    }
  } else {
    cfg.book.types.assign(m, 0);
  }
  if (auto c = pf.opt("covariates")) {
    if (c->size() != m)
      c->fail("expected " + std::to_string(m) + " covariate vectors");
    for (std::size_t i = 0; i < m; ++i)
      cfg.book.covariates.push_back(
          (*c)[i].size() == 0 ? Vector() : (*c)[i].vector(cfg.book.W[cfg.book.types[i]].covariate_dim()));
  } else {
    cfg.book.covariates.assign(m, Vector());
  }
  cfg.book.q = pf.at("q").number();
  guarded(pf, [&] {
    cfg.book.validate();
    return 0;
  });

  const Node dm = root.at("default_model");
  auto model_of = [](const Node &n) {
    const std::string s = n.string();
    if (s == "logit")
      return DefaultModel::Logit;
    if (s == "intensity")
      return DefaultModel::Intensity;
    n.fail("unknown default model '" + s + "'");
  };
  if (dm.value().is_array()) {
    for (std::size_t i = 0; i < dm.size(); ++i)
      cfg.default_models.push_back(model_of(dm[i]));
    if (cfg.default_models.empty())
      dm.fail("at least one default model is required");
  } else if (dm.value().is_string() && dm.value() == "both") {
    cfg.default_models = {DefaultModel::Logit, DefaultModel::Intensity};
  } else {
    cfg.default_models = {model_of(dm)};
  }

  cfg.gammas = root.at("gamma").numbers();
  cfg.n_samples = root.at("n_samples").count();
  cfg.l = parse_l(root.at("l"));
  if (auto s = root.opt("seed"))
    cfg.seed = s->seed();
  if (auto f = root.opt("factor_level")) {
    f->allow_keys({"c", "eta"});
    cfg.level_c = f->at("c").positive();
    cfg.level_eta = f->has("eta") ? f->at("eta").number() : 0.0;
  }
  if (auto s = root.opt("naive_samples"))
    cfg.naive_samples = s->count(0);
  if (auto s = root.opt("chunk_size"))
    cfg.chunk_size = s->count();
  return cfg;
}

SelfsimConfig parse_selfsim_config(const json &j, const std::filesystem::path &base_dir) {
  const Node root(j, "");
  root.allow_keys({"description", "model", "loss", "l0", "u", "points", "max_draws", "seed"});
  SelfsimConfig cfg;
  cfg.model = parse_model(root.at("model"));
  cfg.loss = parse_loss(root.at("loss"), cfg.model.marginals.size(), base_dir);
  if (cfg.loss.network)
    root.at("loss").fail("selfsim needs a scalar loss, not a distribution network");
  cfg.l0 = root.at("l0").positive();
  cfg.u = root.at("u").positive();
  if (cfg.u < cfg.l0)
    root.at("u").fail("u must be at least l0");
  cfg.points = root.at("points").count();
  if (auto m = root.opt("max_draws"))
    cfg.max_draws = m->count();
  if (auto s = root.opt("seed"))
    cfg.seed = s->seed();
  return cfg;
}

RateConfig parse_rate_config(const json &j, const std::filesystem::path &base_dir) {
  const Node root(j, "");
  root.allow_keys({"description", "model", "loss", "heavy", "scan_steps", "lambda_min_at"});
  RateConfig cfg;
  cfg.model = parse_model(root.at("model"));
  cfg.loss = parse_loss(root.at("loss"), cfg.model.marginals.size(), base_dir);
  if (auto h = root.opt("heavy"))
    cfg.heavy = h->boolean();
  if (auto s = root.opt("scan_steps"))
    cfg.scan_steps = s->count();
  if (auto l = root.opt("lambda_min_at"))
    cfg.lambda_min_at = parse_levels(*l);
  return cfg;
}

} // namespace tailsampler
