#include "tailsampler/experiments.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "tailsampler/config.hpp"
#include "tailsampler/lp_solver.hpp"
#include "tailsampler/pcr.hpp"
#include "tailsampler/rate_analysis.hpp"

namespace tailsampler {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// naive baselines draw from a different seed than the IS run
constexpr std::uint64_t kNaiveSeedMix = 0x9e3779b97f4a7c15ULL;

class Csv {
public:
  Csv(const std::filesystem::path &path, const std::string &command, std::uint64_t hash,
      std::uint64_t seed)
      : out_(path, std::ios::binary) {
    if (!out_)
      throw std::runtime_error("cannot write " + path.string());
    char buf[64];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, hash);
    out_ << "# tailsampler " << command << " config_hash=" << buf << " seed=" << seed << '\n';
  }

  void row(const std::vector<std::string> &cells) {
    for (std::size_t i = 0; i < cells.size(); ++i)
      out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }

private:
  std::ofstream out_;
};

std::string num(double x) { return format_number(x); }
std::string num(std::size_t x) { return std::to_string(x); }

void log_line(const RunOptions &opt, const std::string &msg) {
  if (opt.log)
    *opt.log << msg << '\n';
}

std::string level_label(const char *name, double v) { return std::string(name) + "=" + num(v); }

void prepare_out(const RunOptions &opt) {
  if (opt.out_dir.empty())
    throw std::invalid_argument("an output directory is required");
  std::filesystem::create_directories(opt.out_dir);
}

void write_json(const std::filesystem::path &path, const json &j) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

// Event {L(z) > u}, or network failure at supply u * weights.
EventFn make_event(const LossSpec &loss, double u) {
  if (loss.network) {
    const NetworkSpec &net = *loss.network;
    const Vector supply = u * net.supply_weights;
    return [&net, supply](const Vector &z) { return network_failed(net.A, z, supply, net.k); };
  }
  const LossModel &lm = *loss.loss;
  return [&lm, u](const Vector &z) { return lm.eval(z) > u; };
}

// Picks the crossval point of smallest variance among those with hits.
const CrossvalPoint *select_point(const std::vector<CrossvalPoint> &table) {
  const CrossvalPoint *best = nullptr;
  for (const CrossvalPoint &p : table)
    if (p.estimate.hit_count > 0 &&
        (!best || p.estimate.sample_variance < best->estimate.sample_variance))
      best = &p;
  return best;
}

// Shared sweep of estimate, network and crossval.
std::vector<SweepRow> run_is_sweep(const EstimateConfig &cfg, const RunOptions &opt,
                                   std::uint64_t seed, CommandResult &res) {
  const JointModel jm = cfg.model.joint();
  std::vector<SweepRow> rows;
  for (double u : cfg.sweep) {
    try {
      const EventFn event = make_event(cfg.loss, u);
      ISConfig base;
      base.u = u;
      base.rho = cfg.loss.rho;
      base.n_samples = cfg.n_samples;
      base.seed = seed;
      base.chunk_size = cfg.chunk_size;
      base.threads = opt.threads;
      SweepRow row;
      row.level = u;
      row.u = u;
      if (cfg.l.crossval) {
        const std::vector<double> grid = cfg.l.candidates(u);
        if (grid.empty())
          throw std::runtime_error("no crossval candidate lies in (0, u)");
        base.l = grid.front();
        CrossvalResult cv = crossvalidate_l(jm, event, base, grid);
        row.crossval = cv.table;
        const CrossvalPoint *best = select_point(cv.table);
        if (!best)
          throw std::runtime_error("no crossval candidate produced a hit");
        row.l = best->l;
        row.estimate = best->estimate;
      } else {
        base.l = cfg.l.value;
        row.l = base.l;
        row.estimate = estimate_is(jm, event, base);
      }
      if (cfg.naive_samples > 0)
        row.naive = estimate_naive(jm, event, cfg.naive_samples, seed ^ kNaiveSeedMix,
                                   opt.threads, cfg.chunk_size);
      log_line(opt, level_label("u", u) + " l=" + num(row.l) + " estimate=" +
                        num(row.estimate.estimate) + " variance=" +
                        num(row.estimate.sample_variance));
      rows.push_back(std::move(row));
    } catch (const std::exception &e) {
      res.failed.push_back(level_label("u", u) + ": " + e.what());
    }
  }
  return rows;
}

void write_crossval_table(const std::filesystem::path &path, const std::string &command,
                          std::uint64_t hash, std::uint64_t seed,
                          const std::vector<SweepRow> &rows, bool with_model,
                          const std::function<double(const SweepRow &, double)> &u_of) {
  Csv csv(path, command, hash, seed);
  std::vector<std::string> head;
  if (with_model)
    head.push_back("model");
  for (const char *h : {"level", "u", "l", "estimate", "variance", "relative_error", "hits",
                        "selected"})
    head.emplace_back(h);
  csv.row(head);
  for (const SweepRow &r : rows)
    for (const CrossvalPoint &p : r.crossval) {
      std::vector<std::string> cells;
      if (with_model)
        cells.push_back(r.model);
      for (const std::string &s :
           {num(r.level), num(u_of(r, p.l)), num(p.l), num(p.estimate.estimate),
            num(p.estimate.sample_variance), num(p.estimate.relative_error),
            num(p.estimate.hit_count), std::string(p.l == r.l ? "1" : "0")})
        cells.push_back(s);
      csv.row(cells);
    }
}

double row_u(const SweepRow &r, double) { return r.u; }

void finish(CommandResult &res, const RunOptions &opt) {
  for (const std::string &f : res.failed)
    log_line(opt, "failed point " + f);
  res.exit_code = res.failed.empty() ? 0 : 1;
}

std::uint64_t pick_seed(const RunOptions &opt, std::uint64_t config_seed) {
  return opt.seed.value_or(config_seed);
}

} // namespace

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double log_variance_slope(const std::vector<SweepRow> &rows) {
  double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const SweepRow &r : rows) {
    const double p = r.estimate.estimate;
    const double v = r.estimate.sample_variance;
    if (!(p > 0.0) || !(v > 0.0))
      continue;
    const double x = std::log(p), y = std::log(v);
    n += 1;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double den = n * sxx - sx * sx;
  if (n < 2 || !(den > 0.0))
    return kNaN;
  return (n * sxy - sx * sy) / den;
}

CommandResult cmd_estimate(const json &config, const RunOptions &opt) {
  const EstimateConfig cfg = parse_estimate_config(config, opt.base_dir);
  prepare_out(opt);
  const std::uint64_t seed = pick_seed(opt, cfg.seed);
  const std::uint64_t hash = config_hash(config);
  CommandResult res;
  res.rows = run_is_sweep(cfg, opt, seed, res);

  const auto path = opt.out_dir / "estimate.csv";
  Csv csv(path, "estimate", hash, seed);
  csv.row({"u", "l", "estimate", "variance", "relative_error", "hits", "naive_estimate",
           "naive_variance"});
  for (const SweepRow &r : res.rows)
    csv.row({num(r.u), num(r.l), num(r.estimate.estimate), num(r.estimate.sample_variance),
             num(r.estimate.relative_error), num(r.estimate.hit_count),
             r.naive ? num(r.naive->estimate) : "", r.naive ? num(r.naive->sample_variance) : ""});
  res.files.push_back(path);
  if (cfg.l.crossval) {
    const auto cv = opt.out_dir / "estimate_crossval.csv";
    write_crossval_table(cv, "estimate", hash, seed, res.rows, false, row_u);
    res.files.push_back(cv);
  }
  finish(res, opt);
  return res;
}

CommandResult cmd_network(const json &config, const RunOptions &opt) {
  const EstimateConfig cfg = parse_network_config(config, opt.base_dir);
  prepare_out(opt);
  const std::uint64_t seed = pick_seed(opt, cfg.seed);
  const std::uint64_t hash = config_hash(config);
  CommandResult res;
  res.rows = run_is_sweep(cfg, opt, seed, res);

  const auto path = opt.out_dir / "network.csv";
  Csv csv(path, "network", hash, seed);
  csv.row({"u", "l", "estimate", "variance", "relative_error", "hits", "naive_variance",
           "variance_reduction"});
  for (const SweepRow &r : res.rows) {
    const double p = r.estimate.estimate;
    const double naive_var = r.naive ? r.naive->sample_variance : p * (1.0 - p);
    const double reduction = naive_var > 0.0 ? 1.0 - r.estimate.sample_variance / naive_var : kNaN;
    csv.row({num(r.u), num(r.l), num(p), num(r.estimate.sample_variance),
             num(r.estimate.relative_error), num(r.estimate.hit_count), num(naive_var),
             num(reduction)});
  }
  res.files.push_back(path);
  if (cfg.l.crossval) {
    const auto cv = opt.out_dir / "network_crossval.csv";
    write_crossval_table(cv, "network", hash, seed, res.rows, false, row_u);
    res.files.push_back(cv);
  }

  const double slope = log_variance_slope(res.rows);
  res.summary["topology"] = cfg.loss.network->topology;
  res.summary["slope"] = finite_or_null(slope);
  if (!res.rows.empty()) {
    const SweepRow &first = res.rows.front();
    const double p = first.estimate.estimate;
    const double naive_var = first.naive ? first.naive->sample_variance : p * (1.0 - p);
    res.summary["least_rare_u"] = first.u;
    res.summary["variance_reduction_least_rare"] =
        finite_or_null(naive_var > 0.0 ? 1.0 - first.estimate.sample_variance / naive_var : kNaN);
  }
  log_line(opt, "log-variance slope " + num(slope));
  const auto sp = opt.out_dir / "network_summary.json";
  write_json(sp, res.summary);
  res.files.push_back(sp);
  finish(res, opt);
  return res;
}

CommandResult cmd_crossval(const json &config, const RunOptions &opt) {
  const EstimateConfig cfg = parse_crossval_config(config, opt.base_dir);
  prepare_out(opt);
  const std::uint64_t seed = pick_seed(opt, cfg.seed);
  const std::uint64_t hash = config_hash(config);
  CommandResult res;
  res.rows = run_is_sweep(cfg, opt, seed, res);
  const auto path = opt.out_dir / "crossval.csv";
  write_crossval_table(path, "crossval", hash, seed, res.rows, false, row_u);
  res.files.push_back(path);
  json best = json::array();
  for (const SweepRow &r : res.rows)
    best.push_back({{"u", r.u}, {"l", r.l}});
  res.summary["selected"] = best;
  finish(res, opt);
  return res;
}

CommandResult cmd_pcr(const json &config, const RunOptions &opt) {
  const PcrConfig cfg = parse_pcr_config(config, opt.base_dir);
  prepare_out(opt);
  const std::uint64_t seed = pick_seed(opt, cfg.seed);
  const std::uint64_t hash = config_hash(config);
  const JointModel jm = cfg.model.joint();
  const double m = static_cast<double>(cfg.book.loans());
  CommandResult res;

  for (DefaultModel dm : cfg.default_models) {
    const std::string model_name(to_string(dm));
    for (double gamma : cfg.gammas) {
      const std::string label = model_name + " " + level_label("gamma", gamma);
      try {
        const Portfolio p(cfg.book, dm, gamma);
        for (const std::string &w : p.warnings())
          log_line(opt, label + ": " + w);
        auto level_for = [&](double l) {
          return cfg.level_c ? *cfg.level_c * std::pow(m, cfg.level_eta) : std::max(gamma, l);
        };
        const double ref = cfg.level_c ? level_for(0.0) : std::max(gamma, 1.0);
        std::vector<double> grid;
        if (cfg.l.crossval) {
          for (double g : cfg.l.grid) {
            const double l = cfg.l.relative_to_log_u ? g + std::log(ref) : g;
            if (l > 0.0 && l <= level_for(l))
              grid.push_back(l);
          }
        } else if (cfg.l.value <= level_for(cfg.l.value)) {
          grid.push_back(cfg.l.value);
        }
        if (grid.empty())
          throw std::runtime_error("no admissible l at this factor level");

        SweepRow row;
        row.model = model_name;
        row.level = gamma;
        std::size_t failures = 0;
        for (double l : grid) {
          ISConfig c;
          c.u = level_for(l);
          c.l = l;
          c.rho = cfg.book.W.front().rho();
          c.n_samples = cfg.n_samples;
          c.seed = seed;
          c.chunk_size = cfg.chunk_size;
          c.threads = opt.threads;
          const PcrEstimate e = estimate_pcr(p, jm, c);
          if (cfg.l.crossval)
            row.crossval.push_back({l, e.estimate});
          const bool better = row.estimate.n == 0 ||
                              (e.estimate.hit_count > 0 &&
                               (row.estimate.hit_count == 0 ||
                                e.estimate.sample_variance < row.estimate.sample_variance));
          if (better) {
            row.estimate = e.estimate;
            row.l = l;
            row.u = c.u;
            failures = e.twist_failures;
          }
        }
        if (cfg.l.crossval && row.estimate.hit_count == 0)
          throw std::runtime_error("no crossval candidate produced a hit");
        row.twist_failures = failures;
        if (failures > 0)
          log_line(opt, label + ": " + std::to_string(failures) +
                            " replications skipped after twist-solve failures");
        if (cfg.naive_samples > 0)
          row.naive = estimate_pcr_naive(p, jm, cfg.naive_samples, seed ^ kNaiveSeedMix,
                                         opt.threads);
        log_line(opt, label + " l=" + num(row.l) + " estimate=" + num(row.estimate.estimate) +
                          " variance=" + num(row.estimate.sample_variance));
        res.rows.push_back(std::move(row));
      } catch (const std::exception &e) {
        res.failed.push_back(label + ": " + e.what());
      }
    }
  }

  auto ratio = [](const SweepRow &r) {
    const double p = r.estimate.estimate, v = r.estimate.sample_variance;
    return p > 0.0 && p < 1.0 && v > 0.0 ? std::log(v) / std::log(p) : kNaN;
  };
  const auto path = opt.out_dir / "pcr.csv";
  Csv csv(path, "pcr", hash, seed);
  csv.row({"model", "gamma", "u", "l", "estimate", "variance", "relative_error", "hits",
           "twist_failures", "log_ratio", "naive_estimate", "naive_variance"});
  for (const SweepRow &r : res.rows)
    csv.row({r.model, num(r.level), num(r.u), num(r.l), num(r.estimate.estimate),
             num(r.estimate.sample_variance), num(r.estimate.relative_error),
             num(r.estimate.hit_count), num(r.twist_failures), num(ratio(r)),
             r.naive ? num(r.naive->estimate) : "", r.naive ? num(r.naive->sample_variance) : ""});
  res.files.push_back(path);
  if (cfg.l.crossval) {
    const auto cv = opt.out_dir / "pcr_crossval.csv";
    write_crossval_table(cv, "pcr", hash, seed, res.rows, true, [&](const SweepRow &r, double l) {
      return cfg.level_c ? *cfg.level_c * std::pow(m, cfg.level_eta) : std::max(r.level, l);
    });
    res.files.push_back(cv);
  }

  json per_model = json::object();
  for (DefaultModel dm : cfg.default_models) {
    const std::string name(to_string(dm));
    const SweepRow *rarest = nullptr;
    for (const SweepRow &r : res.rows)
      if (r.model == name && r.estimate.estimate > 0.0 &&
          (!rarest || r.estimate.estimate < rarest->estimate.estimate))
        rarest = &r;
    if (rarest) {
      per_model[name] = {{"rarest_gamma", rarest->level},
                         {"rarest_estimate", rarest->estimate.estimate},
                         {"log_ratio", finite_or_null(ratio(*rarest))}};
      log_line(opt, name + ": log-variance / log-probability at the rarest point " +
                        num(ratio(*rarest)));
    }
  }
  res.summary["models"] = per_model;
  const auto sp = opt.out_dir / "pcr_summary.json";
  write_json(sp, res.summary);
  res.files.push_back(sp);
  finish(res, opt);
  return res;
}

CommandResult cmd_selfsim(const json &config, const RunOptions &opt) {
  const SelfsimConfig cfg = parse_selfsim_config(config, opt.base_dir);
  prepare_out(opt);
  const std::uint64_t seed = pick_seed(opt, cfg.seed);
  const std::uint64_t hash = config_hash(config);
  const JointModel jm = cfg.model.joint();
  const LossModel &lm = *cfg.loss.loss;
  const std::size_t d = jm.dimension();
  const double rho = cfg.loss.rho;
  CommandResult res;

  struct Cloud {
    std::vector<Vector> points;
    std::vector<double> weights;
    std::size_t draws = 0;
  };
  // Draw k uses stream (seed, offset + k), so both clouds are reproducible.
  auto collect = [&](bool transformed, std::uint64_t offset, Cloud &cloud) -> bool {
    while (cloud.points.size() < cfg.points) {
      if (cloud.draws >= cfg.max_draws)
        return false;
      RandomStream stream(seed, offset + cloud.draws);
      ++cloud.draws;
      const Vector x = jm.sample_joint(stream);
      if (!transformed) {
        if (lm.eval(x) > cfg.l0) {
          cloud.points.push_back(x);
          cloud.weights.push_back(1.0);
        }
      } else {
        const Vector z = transform(jm, x, cfg.u, cfg.l0, rho);
        if (lm.eval(z) > cfg.u) {
          cloud.points.push_back(z);
          cloud.weights.push_back(likelihood_ratio(jm, x, z, cfg.u, cfg.l0, rho));
        }
      }
      if (cloud.draws >= 1000000 &&
          static_cast<double>(cloud.points.size()) < 1e-5 * static_cast<double>(cloud.draws))
        return false;
    }
    return true;
  };

  Cloud zero_var, is_cloud;
  const bool ok_zero = collect(false, 0, zero_var);
  const bool ok_is = collect(true, std::uint64_t{1} << 62, is_cloud);
  auto report = [&](const char *name, bool ok, const Cloud &c) {
    if (ok)
      return;
    const double rate = c.draws ? static_cast<double>(c.points.size()) / c.draws : 0.0;
    res.failed.push_back(std::string(name) + ": " + std::to_string(c.points.size()) + " of " +
                         std::to_string(cfg.points) + " points after " +
                         std::to_string(c.draws) + " draws (acceptance " + num(rate) +
                         "); lower l0 or u so the conditioning event has probability >= 1e-4");
  };
  report("zero-variance cloud", ok_zero, zero_var);
  report("IS cloud", ok_is, is_cloud);

  auto write_cloud = [&](const char *file, const Cloud &c) {
    const auto path = opt.out_dir / file;
    Csv csv(path, "selfsim", hash, seed);
    std::vector<std::string> head;
    for (std::size_t i = 0; i < d; ++i)
      head.push_back("x" + std::to_string(i + 1));
    head.emplace_back("weight");
    csv.row(head);
    for (std::size_t k = 0; k < c.points.size(); ++k) {
      std::vector<std::string> cells;
      for (Eigen::Index i = 0; i < c.points[k].size(); ++i)
        cells.push_back(num(c.points[k](i)));
      cells.push_back(num(c.weights[k]));
      csv.row(cells);
    }
    res.files.push_back(path);
  };
  write_cloud("selfsim_zero_variance.csv", zero_var);
  write_cloud("selfsim_is.csv", is_cloud);

  res.summary = {{"zero_variance", {{"points", zero_var.points.size()}, {"draws", zero_var.draws}}},
                 {"is", {{"points", is_cloud.points.size()}, {"draws", is_cloud.draws}}}};
  finish(res, opt);
  return res;
}

CommandResult cmd_rate(const json &config, const RunOptions &opt) {
  const RateConfig cfg = parse_rate_config(config, opt.base_dir);
  prepare_out(opt);
  const std::uint64_t hash = config_hash(config);
  const JointModel jm = cfg.model.joint();
  const LossModel &lm = *cfg.loss.loss;
  CommandResult res;

  const QStar qs = q_star(jm.marginals());
  const bool heavy = cfg.heavy.value_or(qs.heavy);
  if (!qs.converged)
    log_line(opt, "warning: q* did not converge (relative disagreement " +
                      num(qs.max_rel_diff) + " between probe levels)");
  RateSpec rs = RateSpec::for_copula(jm.copula());
  rs.with_tails(qs.alpha, qs.q);

  const IStar is = exponent_Istar(rs, lm, heavy);
  const LevelFn G = heavy ? heavy_level_function(lm)
                          : LevelFn([&lm](const Vector &x) { return lm.limit_eval(x); });
  const std::size_t steps = cfg.scan_steps ? cfg.scan_steps : default_grid_steps(rs.d);
  const std::vector<DirectionScan> scan = scan_directions(rs, G, steps);

  auto vec = [](const Vector &v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
      a.push_back(finite_or_null(v(i)));
    return a;
  };
  json report;
  report["rate_kind"] = std::string(to_string(rs.kind));
  report["dimension"] = rs.d;
  report["heavy"] = heavy;
  report["alpha"] = vec(qs.alpha);
  report["q_star"] = vec(qs.q);
  report["q_star_converged"] = qs.converged;
  report["q_star_max_rel_diff"] = qs.max_rel_diff;
  report["I_star"] = finite_or_null(is.value);
  report["y_star"] = vec(is.y);
  json lmin = json::array();
  for (double x : cfg.lambda_min_at)
    lmin.push_back({{"x", x}, {"value", finite_or_null(lambda_min(jm.marginals(), x))}});
  report["lambda_min"] = lmin;
  if (cfg.loss.network && qs.converged)
    report["network_theta_star"] = vec(network_theta_star(jm.marginals()));
  res.summary = report;

  const auto rp = opt.out_dir / "rate.json";
  write_json(rp, report);
  res.files.push_back(rp);

  const auto lp = opt.out_dir / "levelset.csv";
  Csv csv(lp, "rate", hash, 0);
  std::vector<std::string> head;
  for (std::size_t i = 0; i < rs.d; ++i)
    head.push_back("y" + std::to_string(i + 1));
  head.emplace_back("c");
  head.emplace_back("rate");
  csv.row(head);
  for (const DirectionScan &s : scan) {
    std::vector<std::string> cells;
    for (Eigen::Index i = 0; i < s.direction.size(); ++i)
      cells.push_back(num(s.direction(i)));
    cells.push_back(num(s.c));
    cells.push_back(num(s.rate));
    csv.row(cells);
  }
  res.files.push_back(lp);
  log_line(opt, "I* = " + num(is.value));
  finish(res, opt);
  return res;
}

CommandResult run_command(const std::string &name, const json &config, const RunOptions &opt) {
  if (name == "estimate")
    return cmd_estimate(config, opt);
  if (name == "network")
    return cmd_network(config, opt);
  if (name == "pcr")
    return cmd_pcr(config, opt);
  if (name == "selfsim")
    return cmd_selfsim(config, opt);
  if (name == "rate")
    return cmd_rate(config, opt);
  if (name == "crossval")
    return cmd_crossval(config, opt);
  throw std::invalid_argument("unknown command '" + name + "'");
}

} // namespace tailsampler
