#include "pucopula/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

#include "pucopula/closed_forms.hpp"
#include "pucopula/compensated.hpp"
#include "pucopula/copula.hpp"
#include "pucopula/errors.hpp"
#include "pucopula/fitting.hpp"
#include "pucopula/format.hpp"
#include "pucopula/sampling.hpp"

namespace pucopula::cli {
namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SpecOptions {
  std::string family = "negbin";
  double beta = 1.0;
  double gamma = 1.0;
  int m = 2;
  std::string weights = "diagonal";
  std::string family2;
  double beta2 = 0.0;
  double gamma2 = 0.0;
  int m2 = 0;
  std::size_t dim = 2;
  double tol = 1e-12;
};

struct DensityOptions {
  SpecOptions spec;
  std::size_t grid = 21;
  std::string out;
};

struct SampleOptions {
  SpecOptions spec;
  std::size_t count = 0;
  std::uint64_t seed = 1;
  std::string out;
};

struct FitOptions {
  std::string input;
  std::string family = "negbin";
  int m = 4;
  std::string method = "exact";
  std::size_t mc_budget = 1'000'000;
  std::uint64_t seed = 1;
  std::string ties = "average";
  std::string matrix_out;
  std::string out;
};

struct TablesOptions {
  double tolerance = 5e-5;
};

const std::vector<std::string> kFamilies = {"binomial", "negbin",   "poisson",
                                            "logseries", "example5", "example6"};
const std::vector<std::string> kAxisFamilies = {"binomial", "negbin", "poisson", "logseries"};

void add_spec_options(CLI::App* sub, SpecOptions& s) {
  sub->add_option("--family", s.family, "Copula family")->check(CLI::IsMember(kFamilies));
  sub->add_option("--beta", s.beta, "Negative binomial shape beta > 0");
  sub->add_option("--gamma", s.gamma, "Poisson intensity gamma > 0");
  sub->add_option("--m", s.m, "Binomial order m >= 2");
  sub->add_option("--weights", s.weights, "diagonal | matrix:<path> | banded");
  sub->add_option("--family2", s.family2, "Column family for banded weights")
      ->check(CLI::IsMember(kAxisFamilies));
  sub->add_option("--beta2", s.beta2, "Column beta (banded default: 2 beta)");
  sub->add_option("--gamma2", s.gamma2, "Column gamma for banded weights");
  sub->add_option("--m2", s.m2, "Column order for banded weights (default: 2 m)");
  sub->add_option("--dim", s.dim, "Dimension d >= 2 (diagonal weights only)");
  sub->add_option("--tol", s.tol, "Series relative tolerance");
}

PartitionFamily make_family(const std::string& kind, double beta, double gamma, int m) {
  if (kind == "binomial") return PartitionFamily::binomial(m);
  if (kind == "negbin") return PartitionFamily::negative_binomial(beta);
  if (kind == "poisson") return PartitionFamily::poisson(gamma);
  if (kind == "logseries") return PartitionFamily::log_series();
  throw UsageError("unknown family '" + kind + "'");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::optional<double> parse_double(const std::string& token) {
  const std::string t = trim(token);
  double value = 0.0;
  const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || end != t.data() + t.size() || t.empty()) return std::nullopt;
  return value;
}

FiniteMatrixWeights read_matrix_file(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string token;
  if (!(in >> token)) throw IoError("matrix file '" + path + "' is empty");
  std::size_t n = 0;
  const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), n);
  if (ec != std::errc() || end != token.data() + token.size()) {
    throw IoError("matrix file '" + path + "' must start with the order n");
  }
  FiniteMatrixWeights w;
  w.entries.assign(n + 1, std::vector<double>(n + 1));
  for (std::size_t i = 0; i <= n; ++i) {
    for (std::size_t j = 0; j <= n; ++j) {
      if (!(in >> token)) throw IoError("matrix file '" + path + "' has too few entries");
      const auto value = parse_double(token);
      if (!value) throw IoError("matrix file '" + path + "' has a non-numeric entry '" + token + "'");
      w.entries[i][j] = *value;
    }
  }
  if (in >> token) throw IoError("matrix file '" + path + "' has trailing entries");
  return w;
}

PuCopula build_copula(const SpecOptions& s) {
  SeriesPolicy policy = SeriesPolicy::from_environment();
  policy.rel_tolerance = s.tol;
  if (s.family == "example5" || s.family == "example6") {
    if (s.dim != 2) throw UsageError(s.family + " is bivariate; --dim must be 2");
    return s.family == "example5" ? example5_copula(policy) : example6_copula(policy);
  }
  const PartitionFamily family = make_family(s.family, s.beta, s.gamma, s.m);
  if (s.weights == "diagonal") return PuCopula::diagonal(family, s.dim, policy);
  if (s.dim != 2) throw UsageError("only diagonal weights support --dim other than 2");
  if (s.weights == "banded") {
    std::string kind = s.family2.empty() ? s.family : s.family2;
    double beta2 = s.beta2 > 0.0 ? s.beta2 : 2.0 * s.beta;
    int m2 = s.m2 > 0 ? s.m2 : 2 * s.m;
    double gamma2 = s.gamma2 > 0.0 ? s.gamma2 : s.gamma;
    return PuCopula({family, make_family(kind, beta2, gamma2, m2)}, Banded2to1Weights{}, policy);
  }
  if (s.weights.rfind("matrix:", 0) == 0) {
    return PuCopula({family, family}, read_matrix_file(s.weights.substr(7)), policy);
  }
  throw UsageError("--weights must be diagonal, banded or matrix:<path>");
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot write '" + path + "'");
  file << text;
  if (!file) throw IoError("failed writing '" + path + "'");
}

std::vector<std::vector<double>> read_csv_columns(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw IoError("CSV file '" + path + "' is empty");
  const std::size_t columns = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  if (columns < 2) throw UsageError("CSV input needs at least two columns");
  std::vector<std::vector<double>> data(columns);
  std::size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (trim(line).empty()) continue;
    std::istringstream fields(line);
    std::string field;
    std::size_t c = 0;
    while (std::getline(fields, field, ',')) {
      const auto value = parse_double(field);
      if (!value || c >= columns) {
        throw IoError("unreadable CSV line " + std::to_string(line_number) + " in '" + path + "'");
      }
      data[c++].push_back(*value);
    }
    if (c != columns) {
      throw IoError("CSV line " + std::to_string(line_number) + " has " + std::to_string(c) +
                    " fields, expected " + std::to_string(columns));
    }
  }
  if (data[0].size() < 10) throw UsageError("CSV input needs at least 10 data rows");
  return data;
}

int cmd_density(const DensityOptions& o, std::ostream& out) {
  const PuCopula copula = build_copula(o.spec);
  if (copula.dimension() != 2) throw UsageError("density grids are bivariate; use --dim 2");
  const DensityGrid grid = density_grid(copula, o.grid);
  std::string text = "u,v,c\n";
  for (std::size_t k = 0; k < grid.c.size(); ++k) {
    text += format_double(grid.u[k]) + "," + format_double(grid.v[k]) + "," +
            format_double(grid.c[k]) + "\n";
  }
  emit(o.out, text, out);
  return kExitOk;
}

int cmd_sample(const SampleOptions& o, std::ostream& out) {
  const PuCopula copula = build_copula(o.spec);
  RandomStream rng(o.seed);
  const SampleBatch batch = sample(copula, o.count, rng);
  std::string text;
  if (batch.dimension == 2) {
    text = "u,v\n";
  } else {
    for (std::size_t c = 0; c < batch.dimension; ++c) {
      text += (c ? ",u" : "u") + std::to_string(c + 1);
    }
    text += "\n";
  }
  for (std::size_t r = 0; r < batch.size(); ++r) {
    for (std::size_t c = 0; c < batch.dimension; ++c) {
      if (c) text += ",";
      text += format_double(batch(r, c));
    }
    text += "\n";
  }
  emit(o.out, text, out);
  return kExitOk;
}

void report_tails(std::ostringstream& report, const PseudoObservations& pobs,
                  const std::optional<PuCopula>& model, std::vector<std::string>& warnings) {
  for (double t : {0.95, 0.99}) {
    const std::string suffix = t == 0.95 ? "0.95" : "0.99";
    const TailEstimate e = lambda_hat(pobs, t);
    report << "empirical_lambda_upper_" << suffix << "=" << format_double(e.value) << "\n";
    report << "empirical_lambda_upper_" << suffix << "_se=" << format_double(e.standard_error)
           << "\n";
    if (e.low_count) {
      warnings.push_back("only " + std::to_string(e.exceedances) +
                         " joint exceedances at t=" + suffix);
    }
    if (model) {
      report << "model_lambda_upper_" << suffix << "="
             << format_double(lambda_hat(*model, t).value) << "\n";
    }
  }
}

std::string matrix_text(const std::vector<std::vector<double>>& P) {
  std::string text = std::to_string(P.size() - 1) + "\n";
  for (const auto& row : P) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) text += " ";
      text += format_double(row[j]);
    }
    text += "\n";
  }
  return text;
}

int cmd_fit(const FitOptions& o, std::ostream& out) {
  const auto data = read_csv_columns(o.input);
  const TiePolicy ties = o.ties == "first" ? TiePolicy::First : TiePolicy::Average;
  const PseudoObservations pobs = pseudo_observations({data[0], data[1]}, ties);
  const double rho = empirical_correlation(pobs);
  std::ostringstream report;
  std::vector<std::string> warnings;
  report << "rows=" << pobs.rows << "\n";
  report << "empirical_correlation=" << format_double(rho) << "\n";
  report << "family=" << o.family << "\n";
  std::optional<PuCopula> model;
  if (o.family == "negbin") {
    double beta = 0.0;
    if (rho < negbin_rho(kNegBinBetaMin)) {
      beta = kNegBinBetaMin;
      warnings.push_back("low dependence: empirical correlation is below rho(" +
                         format_double(kNegBinBetaMin) + "), beta clamped to the lower bracket");
    } else {
      beta = fit_negbin_beta(rho);
    }
    report << "beta=" << format_double(beta) << "\n";
    report << "model_correlation=" << format_double(negbin_rho(beta)) << "\n";
    model = PuCopula::diagonal(PartitionFamily::negative_binomial(beta));
  } else if (o.family == "poisson") {
    PoissonFit fit;
    if (rho < poisson_grade_correlation(kPoissonGammaMin)) {
      fit = {kPoissonGammaMin, poisson_grade_correlation(kPoissonGammaMin), 0.0, 0};
      warnings.push_back("low dependence: empirical correlation is below the Poisson range, "
                         "gamma clamped to the lower bracket");
    } else {
      PoissonFitOptions options;
      options.method = o.method == "mc" ? PoissonFitMethod::MonteCarlo : PoissonFitMethod::Exact;
      options.mc_budget = o.mc_budget;
      RandomStream rng(o.seed);
      fit = fit_poisson_gamma(rho, options, rng);
    }
    report << "gamma=" << format_double(fit.gamma) << "\n";
    report << "model_correlation=" << format_double(fit.achieved_rho) << "\n";
    report << "model_correlation_se=" << format_double(fit.standard_error) << "\n";
    model = PuCopula::diagonal(PartitionFamily::poisson(fit.gamma));
  } else {
    const BernsteinFit fit = bernstein_fit(pobs, o.m);
    CompensatedSum moment;
    const double scale = 1.0 / ((o.m + 1.0) * (o.m + 1.0));
    for (std::size_t i = 0; i < fit.P.size(); ++i) {
      for (std::size_t j = 0; j < fit.P.size(); ++j) {
        moment += fit.P[i][j] * static_cast<double>((i + 1) * (j + 1)) * scale;
      }
    }
    report << "m=" << o.m << "\n";
    report << "ipf_sweeps=" << fit.sweeps << "\n";
    report << "model_correlation=" << format_double(12.0 * moment.value() - 3.0) << "\n";
    if (o.matrix_out.empty()) {
      for (std::size_t i = 0; i < fit.P.size(); ++i) {
        report << "P_row_" << i << "=";
        for (std::size_t j = 0; j < fit.P[i].size(); ++j) {
          report << (j ? " " : "") << format_double(fit.P[i][j]);
        }
        report << "\n";
      }
    } else {
      emit(o.matrix_out, matrix_text(fit.P), out);
      report << "matrix_out=" << o.matrix_out << "\n";
    }
    model = fit.to_copula();
  }
  report_tails(report, pobs, model, warnings);
  for (const auto& w : warnings) report << "warning=" << w << "\n";
  emit(o.out, report.str(), out);
  return kExitOk;
}

int cmd_tables(const TablesOptions& o, std::ostream& out) {
  static const char* const kLambda[] = {"1/2",     "5/8",       "11/16",      "93/128",
                                        "193/256", "793/1024",  "1619/2048",  "26333/32768",
                                        "53381/65536", "215955/262144"};
  static const double kRho[] = {0.4784, 0.6529, 0.7410, 0.7937, 0.8288, 0.8537, 0.8723};
  bool all_pass = true;
  out << "lambda_U (exact)\n";
  for (int beta = 1; beta <= 10; ++beta) {
    const std::string value = negbin_lambda_u(beta).exact.to_string();
    const bool pass = value == kLambda[beta - 1];
    all_pass = all_pass && pass;
    out << "beta=" << beta << " lambda_U=" << value << " expected=" << kLambda[beta - 1] << " "
        << (pass ? "PASS" : "FAIL") << "\n";
  }
  out << "rho (tolerance " << format_double(o.tolerance) << ")\n";
  for (int beta = 1; beta <= 7; ++beta) {
    const double value = negbin_rho(beta);
    const double expected = kRho[beta - 1];
    const double diff = std::abs(value - expected);
    const bool pass = diff < o.tolerance;
    all_pass = all_pass && pass;
    char rounded[32];
    std::snprintf(rounded, sizeof rounded, "%.4f", value);
    out << "beta=" << beta << " rho=" << rounded << " value=" << format_double(value)
        << " expected=" << format_double(expected) << " diff=" << format_double(diff) << " "
        << (pass ? "PASS" : "FAIL") << "\n";
  }
  return all_pass ? kExitOk : kExitRuntimeError;
}

// Expands `--config <path>` into key=value flags placed ahead of the
// command-line flags, so explicit flags take precedence.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::vector<std::string> injected;
  for (std::size_t k = 0; k < args.size(); ++k) {
    std::string path;
    std::size_t consumed = 0;
    if (args[k] == "--config") {
      if (k + 1 >= args.size()) throw UsageError("--config needs a path");
      path = args[k + 1];
      consumed = 2;
    } else if (args[k].rfind("--config=", 0) == 0) {
      path = args[k].substr(9);
      consumed = 1;
    } else {
      continue;
    }
    std::istringstream lines(read_file(path));
    std::string line;
    while (std::getline(lines, line)) {
      line = trim(line);
      if (line.empty() || line[0] == '#') continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw UsageError("config line without '=': " + line);
      injected.push_back("--" + trim(line.substr(0, eq)) + "=" + trim(line.substr(eq + 1)));
    }
    args.erase(args.begin() + static_cast<std::ptrdiff_t>(k),
               args.begin() + static_cast<std::ptrdiff_t>(k + consumed));
    --k;
  }
  if (!injected.empty()) {
    if (args.empty()) throw UsageError("--config needs a subcommand");
    args.insert(args.begin() + 1, injected.begin(), injected.end());
  }
  return args;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Generalized partition-of-unity copulas: densities, samples, fits and tables",
               "pucopula"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");

  DensityOptions density_options;
  auto* density_cmd = app.add_subcommand("density", "Write the density on a k x k grid as CSV");
  add_spec_options(density_cmd, density_options.spec);
  density_cmd->add_option("--grid", density_options.grid, "Grid size k >= 2")
      ->check(CLI::Range(std::size_t{2}, std::size_t{100000}));
  density_cmd->add_option("--out", density_options.out, "Output path (default: stdout)");
  density_cmd->add_option("--config", "key=value configuration file");

  SampleOptions sample_options;
  auto* sample_cmd = app.add_subcommand("sample", "Write copula samples as CSV");
  add_spec_options(sample_cmd, sample_options.spec);
  sample_cmd->add_option("--count", sample_options.count, "Number of points")
      ->required()
      ->check(CLI::PositiveNumber);
  sample_cmd->add_option("--seed", sample_options.seed, "Random seed");
  sample_cmd->add_option("--out", sample_options.out, "Output path (default: stdout)");
  sample_cmd->add_option("--config", "key=value configuration file");

  FitOptions fit_options;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a copula to CSV data and print a report");
  fit_cmd->add_option("--input", fit_options.input, "CSV file with a header row")->required();
  fit_cmd->add_option("--family", fit_options.family, "negbin | poisson | bernstein")
      ->check(CLI::IsMember({"negbin", "poisson", "bernstein"}));
  fit_cmd->add_option("--m", fit_options.m, "Bernstein order m >= 2");
  fit_cmd->add_option("--method", fit_options.method, "Poisson fit: exact | mc")
      ->check(CLI::IsMember({"exact", "mc"}));
  fit_cmd->add_option("--mc-budget", fit_options.mc_budget, "Monte Carlo draws for --method mc");
  fit_cmd->add_option("--seed", fit_options.seed, "Random seed for --method mc");
  fit_cmd->add_option("--ties", fit_options.ties, "Rank ties: average | first")
      ->check(CLI::IsMember({"average", "first"}));
  fit_cmd->add_option("--matrix-out", fit_options.matrix_out, "Bernstein P matrix file");
  fit_cmd->add_option("--out", fit_options.out, "Report path (default: stdout)");
  fit_cmd->add_option("--config", "key=value configuration file");

  TablesOptions tables_options;
  auto* tables_cmd = app.add_subcommand("tables", "Reproduce the lambda_U and rho tables");
  tables_cmd->add_option("--tolerance", tables_options.tolerance, "Tolerance for rho rows")
      ->check(CLI::NonNegativeNumber);

  try {
    std::vector<std::string> args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());
    try {
      app.parse(args);
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return kExitOk;
    } catch (const CLI::ParseError& e) {
      err << "usage error: " << e.what() << "\n" << "run with --help for usage\n";
      return kExitUsageError;
    }
    if (density_cmd->parsed()) return cmd_density(density_options, out);
    if (sample_cmd->parsed()) return cmd_sample(sample_options, out);
    if (fit_cmd->parsed()) return cmd_fit(fit_options, out);
    if (tables_cmd->parsed()) return cmd_tables(tables_options, out);
    return kExitUsageError;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsageError;
  } catch (const ValidationError& e) {
    err << "validation error:\n" << e.report().to_string();
    return kExitValidationError;
  } catch (const ParameterError& e) {
    err << "invalid parameter: " << e.what() << "\n";
    return kExitValidationError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntimeError;
  }
}

}  // namespace pucopula::cli
