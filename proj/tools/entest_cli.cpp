// entest: command line front end for the location estimators.
//
//   entest estimate     --input data.csv --estimator hybrid
//   entest simulate     --example iid --n-grid 4096,8192,16384 --trials 50
//   entest regress      --input xy.csv --r 0.1
//   entest check-oracle --model model.json --grid 0.5,1,2,4
//
// Exit codes: 0 ok, 2 input/output, 3 bad parameter, 4 problem too large.

#include <entest/entest.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace {

enum ExitCode
{
  kOk = 0,
  kIoError = 2,
  kParamError = 3,
  kScaleGuard = 4,
};

// Failure reading or parsing an input file.
struct IoError : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

nlohmann::json read_json_file(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError("'" + path + "': " + e.what());
  }
}

entest::NumericTable read_table(const std::string& path)
{
  try {
    return entest::read_csv_file(path);
  } catch (const entest::CsvError& e) {
    throw IoError(e.what());
  }
}

std::vector<std::string> split_list(const std::string& s)
{
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty())
      out.push_back(item);
  return out;
}

nlohmann::json flags_json(const entest::Flags& f)
{
  return f.names();
}

// -- estimate -----------------------------------------------------------------

struct EstimateOptions
{
  std::string input;
  std::string estimator = "hybrid";
  std::optional<double> r;
  std::optional<std::size_t> k, k1, k2;
  double C = 5.0;
  double tie_tol = 0.0;
};

nlohmann::json run_estimate(const EstimateOptions& o)
{
  using namespace entest;
  const NumericTable table = read_table(o.input);
  const std::size_t n = table.rows;
  const std::size_t d = table.cols;
  nlohmann::json out{ { "estimator", o.estimator } };

  if (d == 1) {
    const Dataset1D data(table.values);
    auto emit = [&](const LocationEstimate& e) {
      out["center"] = { e.center };
      out["radius"] = e.radius;
      out["count"] = e.count;
      out["flags"] = flags_json(e.flags);
    };
    auto point = [&](double c) {
      emit({ c, 0.0, data.count_within(c, c), {} });
    };
    if (o.estimator == "mean")
      point(sample_mean(data.sorted()));
    else if (o.estimator == "median")
      point(sample_median(data));
    else if (o.estimator == "modal")
      emit(modal_interval_1d(data, o.r.value_or(1.0)));
    else if (o.estimator == "shorth")
      emit(shorth_1d(data, o.k.value_or(default_shorth_k(n))));
    else if (o.estimator == "hybrid")
      emit(hybrid_1d(data, o.k1.value_or(default_median_k(n)), o.k2.value_or(default_shorth_k(n))));
    else if (o.estimator == "lepski")
      emit(lepski_modal_1d(data, { o.C, o.tie_tol, 4.0, 2.0 }));
    else if (o.estimator == "kmedian") {
      const auto iv = k_median_interval(data, o.k.value_or(default_median_k(n)));
      emit({ iv.midpoint(), 0.5 * (iv.hi - iv.lo), data.count_within(iv.lo, iv.hi), {} });
      out["lo"] = { iv.lo };
      out["hi"] = { iv.hi };
      out["ranks"] = { iv.lo_index, iv.hi_index };
    } else
      throw InvalidParamError("unknown estimator '" + o.estimator + "'");
    return out;
  }

  const DatasetND data(table.values, d);
  auto emit = [&](const LocationEstimateND& e) {
    out["center"] = e.center;
    out["radius"] = e.radius;
    out["count"] = e.count;
    out["flags"] = flags_json(e.flags);
    if (e.center_index)
      out["center_index"] = *e.center_index;
  };
  auto point = [&](std::vector<double> c) {
    LocationEstimateND e;
    e.count = data.count_within(c, 0.0);
    e.center = std::move(c);
    emit(e);
  };
  if (o.estimator == "mean")
    point(sample_mean_nd(data));
  else if (o.estimator == "median")
    point(coordinatewise_median(data));
  else if (o.estimator == "modal")
    emit(modal_ball_efficient(data, o.r.value_or(std::sqrt(static_cast<double>(d)))));
  else if (o.estimator == "shorth")
    emit(shorth_efficient(data, o.k.value_or(default_shorth_k(n, d))));
  else if (o.estimator == "hybrid")
    emit(hybrid_nd(data, o.k1.value_or(default_median_k(n)), o.k2.value_or(default_shorth_k(n, d))));
  else if (o.estimator == "kmedian") {
    const Cuboid box = median_cuboid(data, o.k.value_or(default_median_k(n)));
    std::vector<double> mid(d);
    for (std::size_t j = 0; j < d; ++j)
      mid[j] = 0.5 * (box.lo[j] + box.hi[j]);
    point(mid);
    out["lo"] = box.lo;
    out["hi"] = box.hi;
  } else if (o.estimator == "lepski")
    throw DimensionError("lepski estimator is univariate");
  else
    throw InvalidParamError("unknown estimator '" + o.estimator + "'");
  return out;
}

// -- simulate -----------------------------------------------------------------

struct SimulateOptions
{
  std::string spec_path;
  std::string example = "iid";
  std::size_t d = 1;
  double sigma = 1.0, c = 1.0, alpha = 1.0, c_log = 10.0, sigma_good = 0.02, q_n_factor = 10.0;
  double sigma1 = 1.0, sigma2 = 1.0, p = 0.5;
  std::string axes;
  std::string n_grid = "4096,8192,16384";
  std::size_t trials = 200;
  std::uint64_t seed = 0;
  std::string estimators = "mean,median,modal,shorth,hybrid";
  std::optional<double> r;
  std::string output = "sweep.csv";
  bool timing = false;
  unsigned threads = 1;
};

entest::SweepSpec sweep_from_flags(const SimulateOptions& o)
{
  using namespace entest;
  SweepSpec s;
  GeneratorSpec& g = s.generator;
  g.example = example_from_string(o.example);
  g.d = o.d;
  g.sigma = o.sigma;
  g.c = o.c;
  g.alpha = o.alpha;
  g.c_log = o.c_log;
  g.sigma_good = o.sigma_good;
  g.q_n_factor = o.q_n_factor;
  g.sigma1 = o.sigma1;
  g.sigma2 = o.sigma2;
  g.p = o.p;
  for (const auto& a : split_list(o.axes))
    g.axes.push_back(std::stod(a));
  for (const auto& v : split_list(o.n_grid))
    s.n_grid.push_back(static_cast<std::size_t>(std::stoull(v)));
  s.trials = o.trials;
  s.master_seed = o.seed;
  for (const auto& name : split_list(o.estimators)) {
    EstimatorConfig e;
    e.name = name;
    if (name == "modal")
      e.r = o.r;
    s.estimators.push_back(e);
  }
  return s;
}

int run_simulate(const SimulateOptions& o, std::optional<std::uint64_t> env_seed)
{
  using namespace entest;
  SweepSpec spec;
  if (!o.spec_path.empty()) {
    const auto j = read_json_file(o.spec_path);
    try {
      spec = sweep_from_json(j);
    } catch (const nlohmann::json::exception& e) {
      throw InvalidParamError(std::string("sweep spec: ") + e.what());
    }
  } else {
    try {
      spec = sweep_from_flags(o);
    } catch (const std::logic_error& e) { // stod / stoull
      throw InvalidParamError(std::string("malformed number list: ") + e.what());
    }
  }
  if (env_seed)
    spec.master_seed = *env_seed;

  const SweepResult result = run_sweep(spec, o.threads);

  std::ostream* summary = &std::cout;
  if (o.output == "-") {
    write_csv(result, std::cout, o.timing);
    summary = &std::cerr;
  } else {
    std::ofstream out(o.output);
    if (!out)
      throw IoError("cannot write '" + o.output + "'");
    write_csv(result, out, o.timing);
  }
  for (const auto& cell : result.skipped)
    *summary << "skipped n=" << cell.n << " " << cell.estimator << ": " << cell.reason << '\n';
  for (const auto& e : spec.estimators) {
    *summary << "slope " << e.key() << ' ';
    try {
      const auto fit = fit_loglog_slope(result, e.key());
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.4f", fit.slope);
      *summary << buf << '\n';
    } catch (const InsufficientDataError& err) {
      *summary << "n/a (" << err.what() << ")\n";
    }
  }
  return kOk;
}

// -- regress ------------------------------------------------------------------

nlohmann::json run_regress(const std::string& input, std::optional<double> r)
{
  using namespace entest;
  const NumericTable table = read_table(input);
  if (table.cols < 2)
    throw IoError("regression input needs at least 2 columns (x..., y)");
  const std::size_t d = table.cols - 1;
  std::vector<double> xs, ys;
  xs.reserve(table.rows * d);
  for (std::size_t i = 0; i < table.rows; ++i) {
    for (std::size_t j = 0; j < d; ++j)
      xs.push_back(table.values[i * table.cols + j]);
    ys.push_back(table.values[i * table.cols + d]);
  }
  const RegressionDataset data(std::move(xs), std::move(ys), d);
  nlohmann::json out;
  const double radius = r ? *r : heuristic_band_radius(data);
  if (!r)
    out["r_heuristic"] = true;
  const auto est = modal_regression(data, radius);
  out["beta"] = est.beta;
  out["count"] = est.count;
  out["r"] = radius;
  out["candidate"] = est.candidate_id;
  out["flags"] = flags_json(est.flags);
  return out;
}

// -- check-oracle -------------------------------------------------------------

int run_check_oracle(const std::string& model_path, const std::string& grid_list)
{
  using namespace entest;
  MixtureModel model = [&] {
    const auto j = read_json_file(model_path);
    try {
      return mixture_from_json(j);
    } catch (const nlohmann::json::exception& e) {
      throw InvalidParamError(std::string("model: ") + e.what());
    }
  }();
  std::vector<double> grid;
  try {
    for (const auto& v : split_list(grid_list))
      grid.push_back(std::stod(v));
  } catch (const std::logic_error&) {
    throw InvalidParamError("malformed radius grid '" + grid_list + "'");
  }
  const auto report = check_lemma1_properties(model, grid);
  nlohmann::json out{ { "all_passed", report.all_passed() }, { "checks", nlohmann::json::array() } };
  for (const auto& c : report.checks)
    out["checks"].push_back({ { "name", c.name }, { "passed", c.passed }, { "witness", c.witness } });
  std::cout << out.dump() << '\n';
  return report.all_passed() ? kOk : 1;
}

std::optional<std::uint64_t> seed_from_env()
{
  const char* s = std::getenv("ENTEST_SEED");
  if (s == nullptr || *s == '\0')
    return std::nullopt;
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(s, &end, 10);
  if (*end != '\0' || errno == ERANGE)
    throw entest::InvalidParamError("ENTEST_SEED is not an unsigned integer");
  return static_cast<std::uint64_t>(v);
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{ "Location estimation for heteroscedastic samples" };
  app.require_subcommand(1);

  EstimateOptions est;
  auto* estimate = app.add_subcommand("estimate", "Estimate the common center of a data file");
  estimate->add_option("--input,-i", est.input, "CSV with one observation per row")->required();
  estimate->add_option("--estimator,-e", est.estimator, "mean|median|modal|shorth|kmedian|hybrid|lepski")
    ->capture_default_str();
  estimate->add_option("--r", est.r, "modal radius (default 1, sqrt(d) for d > 1)");
  estimate->add_option("--k", est.k, "shorth / k-median parameter");
  estimate->add_option("--k1", est.k1, "hybrid screening k (default ceil(sqrt(n) ln n))");
  estimate->add_option("--k2", est.k2, "hybrid shorth k (default ceil(5 d ln n))");
  estimate->add_option("--C", est.C, "Lepski grid constant")->capture_default_str();
  estimate->add_option("--tie-tol", est.tie_tol, "Lepski comparison slack")->capture_default_str();

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Run a Monte Carlo sweep and write a CSV table");
  simulate->add_option("--spec", sim.spec_path, "sweep spec JSON (overrides the generator flags)");
  simulate->add_option("--example", sim.example,
                       "iid|quadratic|alpha-mixture|modified-alpha|high-exp|two-scale|elliptical")
    ->capture_default_str();
  simulate->add_option("--d", sim.d, "dimension")->capture_default_str();
  simulate->add_option("--sigma", sim.sigma)->capture_default_str();
  simulate->add_option("--c", sim.c, "quadratic variance scale")->capture_default_str();
  simulate->add_option("--alpha", sim.alpha)->capture_default_str();
  simulate->add_option("--c-log", sim.c_log, "low-noise count factor")->capture_default_str();
  simulate->add_option("--sigma-good", sim.sigma_good)->capture_default_str();
  simulate->add_option("--q-factor", sim.q_n_factor, "high-exp support q_n / n")->capture_default_str();
  simulate->add_option("--sigma1", sim.sigma1)->capture_default_str();
  simulate->add_option("--sigma2", sim.sigma2)->capture_default_str();
  simulate->add_option("--p", sim.p)->capture_default_str();
  simulate->add_option("--axes", sim.axes, "comma separated, elliptical only");
  simulate->add_option("--n-grid", sim.n_grid, "comma separated, strictly ascending")->capture_default_str();
  simulate->add_option("--trials,-T", sim.trials)->capture_default_str();
  simulate->add_option("--seed", sim.seed, "master seed (ENTEST_SEED overrides)")->capture_default_str();
  simulate->add_option("--estimators", sim.estimators)->capture_default_str();
  simulate->add_option("--r", sim.r, "modal radius");
  simulate->add_option("--output,-o", sim.output, "CSV path, '-' for stdout")->capture_default_str();
  simulate->add_flag("--timing", sim.timing, "write wall times into elapsed_ms");
  simulate->add_option("--threads", sim.threads, "worker threads, 0 = all cores")->capture_default_str();

  std::string reg_input;
  std::optional<double> reg_r;
  auto* regress = app.add_subcommand("regress", "Modal interval regression on a CSV of x..., y");
  regress->add_option("--input,-i", reg_input)->required();
  regress->add_option("--r", reg_r, "band half-width (default: residual MAD heuristic)");

  std::string model_path, grid_list = "0.5,1,2,4";
  auto* oracle = app.add_subcommand("check-oracle", "Numerically check the population mass properties");
  oracle->add_option("--model", model_path, "mixture model JSON")->required();
  oracle->add_option("--grid", grid_list, "ascending radii")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kParamError;
  }

  try {
    if (*estimate) {
      std::cout << run_estimate(est).dump() << '\n';
      return kOk;
    }
    if (*simulate)
      return run_simulate(sim, seed_from_env());
    if (*regress) {
      std::cout << run_regress(reg_input, reg_r).dump() << '\n';
      return kOk;
    }
    if (*oracle)
      return run_check_oracle(model_path, grid_list);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const entest::ProblemTooLargeError& e) {
    std::cerr << "error: " << e.what()
              << "\nreduce the number of rows or regressors; the exact search enumerates C(2n, d) vertices\n";
    return kScaleGuard;
  } catch (const entest::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kParamError;
  }
  return kOk;
}
