#include "treepca/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace treepca {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_eps(double eps) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%.0e", eps);
  return buf;
}

std::string fmt_gamma(double g) { return std::to_string(static_cast<long long>(std::lround(g))); }

BlackBox make_henon_heiles(int d) {
  if (d < 2) throw std::invalid_argument("henon_heiles needs d >= 2");
  const double sigma = 0.2;
  auto f = [d, sigma](const std::vector<double>& x) {
    double quad = 0.0, cubic = 0.0, quart = 0.0;
    for (int i = 0; i < d; ++i) quad += x[i] * x[i];
    for (int i = 0; i + 1 < d; ++i) {
      cubic += x[i] * x[i + 1] * x[i + 1] - x[i] * x[i] * x[i];
      const double s = x[i] * x[i] + x[i + 1] * x[i + 1];
      quart += s * s;
    }
    return 0.5 * quad + sigma * cubic + (sigma * sigma / 16.0) * quart;
  };
  return BlackBox(f, std::vector<Measure1D>(d, Measure1D::std_gaussian()));
}

BlackBox make_sine_sum(int d) {
  if (d < 1) throw std::invalid_argument("sine_sum needs d >= 1");
  auto f = [d](const std::vector<double>& x) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += x[i];
    return std::sin(s);
  };
  return BlackBox(f, std::vector<Measure1D>(d, Measure1D::uniform(-1.0, 1.0)));
}

BlackBox make_sum_bivariate(int d, bool poly) {
  if (d < 2 || d % 2 != 0) throw std::invalid_argument("sum_bivariate needs even d >= 2");
  auto g_poly = [](double y, double z) {
    double s = 0.0, yp = 1.0, zp = 1.0;
    for (int j = 0; j <= 3; ++j) {
      s += yp * zp;
      yp *= y;
      zp *= z;
    }
    return s;
  };
  auto g_gauss = [](double y, double z) { return std::exp(-(y - z) * (y - z) / 8.0); };
  auto f = [d, poly, g_poly, g_gauss](const std::vector<double>& x) {
    double s = 0.0;
    for (int i = 0; i + 1 < d; i += 2)
      s += poly ? g_poly(x[i], x[i + 1]) : g_gauss(x[i], x[i + 1]);
    return s;
  };
  return BlackBox(f, std::vector<Measure1D>(d, Measure1D::uniform(-1.0, 1.0)));
}

BlackBox make_borehole(int d) {
  if (d != 8) throw std::invalid_argument("borehole is a function of exactly 8 variables");
  auto f = [](const std::vector<double>& x) {
    const double y1 = 0.1 + 0.0161812 * x[0];
    const double y2 = 7.71 + 1.0056 * x[1];
    const double y3 = 89335.0 + 26265.0 * x[2];
    const double y4 = 1050.0 + 60.0 * x[3];
    const double y5 = 89.55 + 26.45 * x[4];
    const double y6 = 760.0 + 60.0 * x[5];
    const double y7 = 1400.0 + 280.0 * x[6];
    const double y8 = 10950.0 + 1095.0 * x[7];
    const double lg = y2 - std::log(y1);
    const double denom = lg * (1.0 + 2.0 * y7 * y3 / (lg * y1 * y1 * y8) + y3 / y5);
    return 2.0 * M_PI * y3 * (y4 - y6) / denom;
  };
  std::vector<Measure1D> measures;
  measures.push_back(Measure1D::std_gaussian());
  measures.push_back(Measure1D::std_gaussian());
  for (int i = 0; i < 6; ++i) measures.push_back(Measure1D::uniform(-1.0, 1.0));
  return BlackBox(f, std::move(measures));
}

}  // namespace

BlackBox test_function(const std::string& name, int d) {
  if (name == "henon_heiles") return make_henon_heiles(d);
  if (name == "sine_sum") return make_sine_sum(d);
  if (name == "sum_bivariate_poly4") return make_sum_bivariate(d, true);
  if (name == "sum_bivariate_gauss") return make_sum_bivariate(d, false);
  if (name == "borehole") return make_borehole(d);
  if (name == "tensorized_square") return tensorize([](double t) { return t * t; }, d);
  if (name == "tensorized_sqrt") return tensorize([](double t) { return std::sqrt(t); }, d);
  throw std::invalid_argument("unknown test function: " + name);
}

std::vector<std::string> test_function_names() {
  return {"henon_heiles",     "sine_sum", "sum_bivariate_poly4", "sum_bivariate_gauss",
          "borehole",         "tensorized_square", "tensorized_sqrt"};
}

FeatureSpace space_for(const Measure1D& measure, int degree) {
  switch (measure.kind) {
    case Measure1D::Kind::Uniform:
      return FeatureSpace::legendre(degree, measure.a, measure.b);
    case Measure1D::Kind::StdGaussian:
      return FeatureSpace::hermite(degree);
    case Measure1D::Kind::FiniteUniform:
      return FeatureSpace::canonical(measure.m);
  }
  throw std::logic_error("unknown measure kind");
}

int degree_for_tolerance(double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("tolerance must be positive");
  const int p = static_cast<int>(std::ceil(std::log10(1.0 / eps) - 1e-9));
  return std::max(1, p);
}

ErrorEstimate mc_errors(const BlackBox& u, const TreeTensor& approx, std::int64_t nsamples,
                        std::uint64_t seed) {
  if (nsamples < 1) throw std::invalid_argument("need at least one test sample");
  const int d = u.dimension();
  RngStream rng = RngStream(seed).split("mc");

  double sum_u2 = 0.0, sum_diff2 = 0.0, max_u = 0.0, max_diff = 0.0;
  const std::int64_t chunk = 16384;
  Eigen::MatrixXd pts(chunk, d);
  std::vector<double> x(d);
  for (std::int64_t done = 0; done < nsamples;) {
    const std::int64_t b = std::min(chunk, nsamples - done);
    for (std::int64_t i = 0; i < b; ++i)
      for (int k = 0; k < d; ++k) pts(i, k) = sample_one(u.measures()[k], rng);
    const Eigen::VectorXd approx_vals = eval_tree(approx, pts.topRows(b));
    for (std::int64_t i = 0; i < b; ++i) {
      for (int k = 0; k < d; ++k) x[k] = pts(i, k);
      const double exact = u.eval_uncounted(x);
      const double diff = exact - approx_vals(i);
      sum_u2 += exact * exact;
      sum_diff2 += diff * diff;
      max_u = std::max(max_u, std::abs(exact));
      max_diff = std::max(max_diff, std::abs(diff));
    }
    done += b;
  }
  if (sum_u2 == 0.0) throw std::runtime_error("relative error undefined: zero norm estimate");
  ErrorEstimate est;
  est.l2 = std::sqrt(sum_diff2 / sum_u2);
  est.linf = max_diff / max_u;
  return est;
}

double mc_relative_error(const BlackBox& u, const TreeTensor& approx, std::int64_t nsamples,
                         std::uint64_t seed) {
  return mc_errors(u, approx, nsamples, seed).l2;
}

std::string ExperimentConfig::effective_label() const {
  if (!label.empty()) return label;
  std::string s = function + "-" + tree + "-" + mode + "-d" + std::to_string(d);
  if (mode == "rank") {
    s += "-p" + std::to_string(effective_degree()) + "-r" + std::to_string(rank);
  } else {
    s += degree >= 0 ? "-p" + std::to_string(degree) : std::string("-padaptive");
    s += "-eps" + fmt_eps(eps);
  }
  if (gamma != 1.0) s += "-g" + fmt_gamma(gamma);
  return s;
}

int ExperimentConfig::effective_degree() const {
  if (degree >= 0) return degree;
  if (mode == "tolerance") return degree_for_tolerance(eps);
  throw std::invalid_argument("degree required outside tolerance mode");
}

void to_json(nlohmann::json& j, const ExperimentConfig& cfg) {
  j = nlohmann::json{{"label", cfg.label},
                     {"function", cfg.function},
                     {"d", cfg.d},
                     {"tree", cfg.tree},
                     {"degree", cfg.degree},
                     {"mode", cfg.mode},
                     {"rank", cfg.rank},
                     {"gamma", cfg.gamma},
                     {"eps", cfg.eps},
                     {"local_rule", cfg.local_rule},
                     {"runs", cfg.runs},
                     {"base_seed", cfg.base_seed},
                     {"mc_samples", cfg.mc_samples},
                     {"pool", cfg.pool}};
}

void from_json(const nlohmann::json& j, ExperimentConfig& cfg) {
  ExperimentConfig def;
  cfg.label = j.value("label", def.label);
  cfg.function = j.value("function", def.function);
  cfg.d = j.value("d", def.d);
  cfg.tree = j.value("tree", def.tree);
  cfg.degree = j.value("degree", def.degree);
  cfg.mode = j.value("mode", def.mode);
  cfg.rank = j.value("rank", def.rank);
  cfg.gamma = j.value("gamma", def.gamma);
  cfg.eps = j.value("eps", def.eps);
  cfg.local_rule = j.value("local_rule", def.local_rule);
  cfg.runs = j.value("runs", def.runs);
  cfg.base_seed = j.value("base_seed", def.base_seed);
  cfg.mc_samples = j.value("mc_samples", def.mc_samples);
  cfg.pool = j.value("pool", def.pool);
}

namespace {

QuantileSummary quantiles(std::vector<double> v) {
  QuantileSummary q;
  if (v.empty()) return q;
  std::sort(v.begin(), v.end());
  auto pick = [&](double p) {
    std::int64_t i = static_cast<std::int64_t>(std::ceil(p * static_cast<double>(v.size())));
    i = std::clamp<std::int64_t>(i, 1, static_cast<std::int64_t>(v.size()));
    return v[static_cast<std::size_t>(i - 1)];
  };
  q.q05 = pick(0.05);
  q.q50 = pick(0.50);
  q.q95 = pick(0.95);
  return q;
}

BudgetPolicy policy_from(const ExperimentConfig& cfg) {
  if (cfg.mode == "rank") return BudgetPolicy::prescribed_rank(cfg.rank, cfg.gamma);
  if (cfg.mode == "tolerance") {
    const auto rule = cfg.local_rule == "eps_sqrt" ? BudgetPolicy::LocalRule::EpsOverSqrtA
                                                   : BudgetPolicy::LocalRule::Eps;
    if (cfg.local_rule != "eps" && cfg.local_rule != "eps_sqrt")
      throw std::invalid_argument("unknown local rule: " + cfg.local_rule);
    return BudgetPolicy::prescribed_tolerance(cfg.eps, rule, cfg.gamma);
  }
  throw std::invalid_argument("unknown mode: " + cfg.mode);
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& cfg) {
  if (cfg.runs < 1) throw std::invalid_argument("need at least one run");
  if (cfg.mc_samples < 1000) throw std::invalid_argument("need at least 1000 test samples");
  if (cfg.function.empty()) throw std::invalid_argument("no test function given");
  policy_from(cfg);  // validate policy fields eagerly

  RunReport report;
  report.config = cfg;

  for (int i = 0; i < cfg.runs; ++i) {
    RunRow row;
    row.run = i;
    row.seed = cfg.base_seed + static_cast<std::uint64_t>(i);
    try {
      BlackBox u = test_function(cfg.function, cfg.d);
      auto [tree, active] = build_tree(tree_kind_from_string(cfg.tree), u.dimension());
      const int p = cfg.effective_degree();
      std::vector<FeatureSpace> spaces;
      for (const Measure1D& m : u.measures()) spaces.push_back(space_for(m, p));

      auto [tt, info] = hopca_approximate(u, tree, active, spaces, policy_from(cfg), row.seed,
                                          cfg.pool);
      const std::int64_t snapshot = u.eval_count();
      const ErrorEstimate err = mc_errors(u, tt, cfg.mc_samples, row.seed);
      if (u.eval_count() != snapshot)
        throw std::logic_error("error estimation consumed training evaluations");

      row.ok = true;
      row.err_l2 = err.l2;
      row.err_linf = err.linf;
      row.evaluations = info.evaluations;
      row.storage = info.storage;
      for (const NodeResult& nr : info.nodes)
        row.ranks.push_back(static_cast<int>(nr.components.rows()));
      row.max_rank = row.ranks.empty() ? 0 : *std::max_element(row.ranks.begin(), row.ranks.end());
    } catch (const std::exception& e) {
      row.ok = false;
      row.message = e.what();
      row.err_l2 = row.err_linf = std::nan("");
    }
    report.rows.push_back(std::move(row));
  }

  std::vector<double> l2, linf, evals, storage, maxr;
  std::vector<std::int64_t> rank_sums;
  int nok = 0;
  for (const RunRow& row : report.rows) {
    if (!row.ok) {
      ++report.failures;
      continue;
    }
    ++nok;
    l2.push_back(row.err_l2);
    linf.push_back(row.err_linf);
    evals.push_back(static_cast<double>(row.evaluations));
    storage.push_back(static_cast<double>(row.storage));
    maxr.push_back(row.max_rank);
    if (rank_sums.size() < row.ranks.size()) rank_sums.resize(row.ranks.size(), 0);
    for (std::size_t k = 0; k < row.ranks.size(); ++k) rank_sums[k] += row.ranks[k];
  }
  report.err_l2 = quantiles(l2);
  report.err_linf = quantiles(linf);
  report.evaluations = quantiles(evals);
  report.storage = quantiles(storage);
  report.max_rank = quantiles(maxr);
  if (nok > 0)
    for (std::int64_t s : rank_sums)
      report.mean_ranks.push_back(static_cast<int>(
          std::lround(static_cast<double>(s) / static_cast<double>(nok))));
  return report;
}

std::string to_csv(const RunReport& report) {
  std::string out = "run,seed,error_l2,error_linf,M,S,ranks\n";
  for (const RunRow& row : report.rows) {
    out += std::to_string(row.run) + "," + std::to_string(row.seed) + ",";
    out += fmt_double(row.err_l2) + "," + fmt_double(row.err_linf) + ",";
    out += std::to_string(row.evaluations) + "," + std::to_string(row.storage) + ",";
    for (std::size_t k = 0; k < row.ranks.size(); ++k) {
      if (k) out += ";";
      out += std::to_string(row.ranks[k]);
    }
    out += "\n";
  }
  return out;
}

nlohmann::json report_json(const RunReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const RunRow& row : report.rows) {
    nlohmann::json r{{"run", row.run}, {"seed", row.seed}, {"ok", row.ok}};
    if (row.ok) {
      r["error_l2"] = row.err_l2;
      r["error_linf"] = row.err_linf;
      r["M"] = row.evaluations;
      r["S"] = row.storage;
      r["ranks"] = row.ranks;
      r["max_rank"] = row.max_rank;
    } else {
      r["message"] = row.message;
    }
    rows.push_back(std::move(r));
  }
  auto qj = [](const QuantileSummary& q) {
    return nlohmann::json{{"q05", q.q05}, {"q50", q.q50}, {"q95", q.q95}};
  };
  return nlohmann::json{{"config", report.config},
                        {"rows", rows},
                        {"failures", report.failures},
                        {"summary",
                         {{"error_l2", qj(report.err_l2)},
                          {"error_linf", qj(report.err_linf)},
                          {"M", qj(report.evaluations)},
                          {"S", qj(report.storage)},
                          {"max_rank", qj(report.max_rank)},
                          {"mean_ranks", report.mean_ranks}}}};
}

std::vector<std::string> write_report(const RunReport& report, const std::string& dir,
                                      const std::string& format) {
  if (format != "csv" && format != "json" && format != "both")
    throw std::invalid_argument("format must be csv, json or both");
  std::filesystem::create_directories(dir);
  const std::string stem = (std::filesystem::path(dir) / report.config.effective_label()).string();
  std::vector<std::string> written;
  if (format == "csv" || format == "both") {
    std::ofstream f(stem + ".csv", std::ios::binary);
    f << to_csv(report);
    if (!f) throw std::runtime_error("failed to write " + stem + ".csv");
    written.push_back(stem + ".csv");
  }
  if (format == "json" || format == "both") {
    std::ofstream f(stem + ".json", std::ios::binary);
    f << report_json(report).dump(2) << "\n";
    if (!f) throw std::runtime_error("failed to write " + stem + ".json");
    written.push_back(stem + ".json");
  }
  return written;
}

std::vector<std::string> preset_names() {
  return {"henon-heiles-rank",   "sine-sum-rank",
          "sine-sum-tolerance",  "sum-bivariate-poly",
          "sum-bivariate-gauss", "sum-bivariate-gauss-adaptive",
          "borehole-rank",       "borehole-tolerance-adaptive",
          "tensorized-square",   "tensorized-sqrt"};
}

std::vector<ExperimentConfig> preset_configs(const std::string& name) {
  std::vector<ExperimentConfig> out;
  auto add = [&out](ExperimentConfig c, std::string label) {
    c.label = std::move(label);
    out.push_back(std::move(c));
  };
  const std::vector<double> eps_decade{1e-1, 1e-2, 1e-3, 1e-4, 1e-5,
                                       1e-6, 1e-7, 1e-8, 1e-9, 1e-10};

  if (name == "henon-heiles-rank") {
    for (int d : {5, 10, 20, 50, 100})
      for (double g : {1.0, 100.0}) {
        ExperimentConfig c;
        c.function = "henon_heiles";
        c.d = d;
        c.tree = "tt";
        c.degree = 4;
        c.mode = "rank";
        c.rank = 3;
        c.gamma = g;
        add(c, name + "-d" + std::to_string(d) + "-g" + fmt_gamma(g));
      }
  } else if (name == "sine-sum-rank") {
    for (int d : {10, 20, 50})
      for (int p : {3, 5, 7, 9, 11, 13, 15, 17}) {
        ExperimentConfig c;
        c.function = "sine_sum";
        c.d = d;
        c.tree = "ttt";
        c.degree = p;
        c.mode = "rank";
        c.rank = 2;
        add(c, name + "-d" + std::to_string(d) + "-p" + std::to_string(p));
      }
  } else if (name == "sine-sum-tolerance") {
    for (int d : {10, 20, 50}) {
      ExperimentConfig c;
      c.function = "sine_sum";
      c.d = d;
      c.tree = "ttt";
      c.degree = 17;
      c.mode = "tolerance";
      c.eps = 1e-12;
      add(c, name + "-d" + std::to_string(d));
    }
  } else if (name == "sum-bivariate-poly") {
    for (double g : {1.0, 10.0})
      for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
        ExperimentConfig c;
        c.function = "sum_bivariate_poly4";
        c.d = 10;
        c.tree = "ttt";
        c.degree = 5;
        c.mode = "tolerance";
        c.eps = eps;
        c.gamma = g;
        add(c, name + "-eps" + fmt_eps(eps) + "-g" + fmt_gamma(g));
      }
  } else if (name == "sum-bivariate-gauss" || name == "sum-bivariate-gauss-adaptive") {
    for (double eps : eps_decade) {
      ExperimentConfig c;
      c.function = "sum_bivariate_gauss";
      c.d = 10;
      c.tree = "ttt";
      c.degree = name == "sum-bivariate-gauss" ? 10 : -1;
      c.mode = "tolerance";
      c.eps = eps;
      add(c, name + "-eps" + fmt_eps(eps));
    }
  } else if (name == "borehole-rank") {
    for (double g : {1.0, 100.0})
      for (int r = 1; r <= 10; ++r) {
        ExperimentConfig c;
        c.function = "borehole";
        c.d = 8;
        c.tree = "tt";
        c.degree = 10;
        c.mode = "rank";
        c.rank = r;
        c.gamma = g;
        add(c, name + "-r" + std::to_string(r) + "-g" + fmt_gamma(g));
      }
  } else if (name == "borehole-tolerance-adaptive") {
    for (double eps : eps_decade) {
      ExperimentConfig c;
      c.function = "borehole";
      c.d = 8;
      c.tree = "ttt";
      c.degree = -1;
      c.mode = "tolerance";
      c.eps = eps;
      add(c, name + "-eps" + fmt_eps(eps));
    }
  } else if (name == "tensorized-square" || name == "tensorized-sqrt") {
    for (double eps : eps_decade) {
      ExperimentConfig c;
      c.function = name == "tensorized-square" ? "tensorized_square" : "tensorized_sqrt";
      c.d = 40;
      c.tree = "tt";
      c.degree = 0;
      c.mode = "tolerance";
      c.eps = eps;
      c.mc_samples = 1000000;
      add(c, name + "-eps" + fmt_eps(eps));
    }
  } else {
    throw std::invalid_argument("unknown preset: " + name);
  }
  return out;
}

}  // namespace treepca
