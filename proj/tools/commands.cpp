#include "commands.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pmle/catalog.hpp"
#include "pmle/em.hpp"
#include "pmle/errors.hpp"
#include "pmle/harness.hpp"
#include "pmle/io.hpp"

namespace pmle::cli {

namespace {

constexpr int kUsage = 1;
constexpr int kRuntime = 2;
constexpr int kNoRatifiedMle = 3;

std::string format_vector(const Vector& v) {
  std::ostringstream s;
  s << '(';
  for (std::size_t k = 0; k < v.size(); ++k) s << (k ? "," : "") << v[k];
  s << ')';
  return s.str();
}

std::string summary_line(const ModelSpec& spec) {
  const MixingDistribution g = resolve_model(spec);
  std::ostringstream s;
  s << spec.id() << "  p=" << spec.order() << " d=" << spec.dim() << " n=" << spec.sample_size() << "  weights=(";
  for (std::size_t j = 0; j < g.order(); ++j) s << (j ? "," : "") << g[j].weight;
  s << ")  means=";
  for (std::size_t j = 0; j < g.order(); ++j) s << (j ? ";" : "") << format_vector(g[j].mean);
  s << "  cov-diagonals=";
  for (std::size_t j = 0; j < g.order(); ++j) {
    Vector diag(g.dim());
    for (std::size_t k = 0; k < g.dim(); ++k) diag[k] = std::round(g[j].cov(k, k) * 100.0) / 100.0;
    s << (j ? ";" : "") << format_vector(diag);
  }
  return s.str();
}

std::vector<std::string> split_list(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const auto& item : items) {
    std::stringstream ss(item);
    std::string part;
    while (std::getline(ss, part, ',')) {
      if (!part.empty()) out.push_back(part);
    }
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path.string() + "' for writing");
  f << contents;
  if (!f) throw Error("failed writing '" + path.string() + "'");
}

struct CatalogOptions {
  bool list = false;
  std::string show;
};

struct GenOptions {
  std::string model;
  std::size_t n = 0;
  std::uint64_t seed = 1;
  std::string out;
  bool header = false;
};

struct FitOptions {
  std::string data;
  std::size_t p = 0;
  std::string method = "pmle";
  std::optional<double> an;
  std::uint64_t seed = 1;
  std::string out;
  bool header = false;
};

struct SimulateOptions {
  std::vector<std::string> models;
  std::vector<std::string> methods{"mle", "pmle1", "pmle2"};
  std::size_t reps = 1000;
  std::optional<std::size_t> n;
  std::uint64_t seed = 1;
  std::size_t threads = 0;
  std::string out;
  bool raw = false;
};

int cmd_catalog(const CatalogOptions& o, std::ostream& out) {
  if (!o.show.empty()) {
    const ModelSpec spec = ModelSpec::parse(o.show);
    out << summary_line(spec) << '\n' << io::dump(io::mixture_to_json(resolve_model(spec)));
    return 0;
  }
  for (const ModelSpec& spec : all_models()) out << summary_line(spec) << '\n';
  return 0;
}

int cmd_gen(const GenOptions& o, std::ostream& out, std::ostream& err) {
  const ModelSpec spec = ModelSpec::parse(o.model);
  const MixingDistribution truth = resolve_model(spec);
  const std::size_t n = o.n == 0 ? spec.sample_size() : o.n;
  const Dataset data = sample(truth, n, o.seed);
  const std::string truth_doc = io::dump(io::mixture_to_json(truth));
  if (o.out.empty()) {
    io::write_csv(out, data, o.header);
    err << truth_doc;
  } else {
    std::ostringstream csv;
    io::write_csv(csv, data, o.header);
    write_file(o.out, csv.str());
    out << truth_doc;
  }
  return 0;
}

int cmd_fit(const FitOptions& o, std::ostream& out, std::ostream& err) {
  std::ifstream in(o.data);
  if (!in) throw Error("cannot open '" + o.data + "'");
  const Dataset data = io::read_csv(in, o.header ? io::HeaderMode::Present : io::HeaderMode::Auto);

  const double n = static_cast<double>(data.size());
  double strength = 0.0;
  std::string method = o.method;
  if (method == "mle") {
    strength = 0.0;
  } else if (method == "pmle" || method == "pmle2") {
    strength = 1.0 / std::sqrt(n);
  } else if (method == "pmle1") {
    strength = 1.0 / n;
  }
  if (o.an) {
    if (!(*o.an >= 0.0) || !std::isfinite(*o.an)) {
      err << "--an must be a finite value >= 0\n";
      return kUsage;
    }
    strength = *o.an;
  }

  const PenaltySpec spec(strength, sample_covariance(data));
  const std::vector<MixingDistribution> starts = make_data_starts(data, o.p, o.seed, 10);
  try {
    const MultiStartResult fit = multi_start_fit(data, starts, spec, EmConfig{});
    const std::string doc = io::dump(io::fit_to_json(fit, method, strength));
    if (o.out.empty()) {
      out << doc;
    } else {
      write_file(o.out, doc);
    }
  } catch (const AllDegenerate& e) {
    err << "fit: " << e.what() << "; no ratified MLE exists for this sample\n";
    return kNoRatifiedMle;
  }
  return 0;
}

int cmd_simulate(const SimulateOptions& o, std::ostream& out) {
  std::vector<ModelSpec> models;
  for (const std::string& id : split_list(o.models)) {
    if (id == "all") {
      const auto all = all_models();
      models.insert(models.end(), all.begin(), all.end());
    } else {
      models.push_back(ModelSpec::parse(id));
    }
  }
  std::vector<MethodSpec> methods;
  for (const std::string& m : split_list(o.methods)) methods.push_back(MethodSpec::parse(m));
  if (models.empty() || methods.empty()) throw PreconditionViolated("simulate needs at least one model and method");

  StudyOptions study;
  study.replications = o.reps;
  study.base_seed = o.seed;
  study.parallelism = o.threads;
  study.keep_raw_errors = o.raw;
  study.sample_size = o.n;

  if (!o.out.empty()) std::filesystem::create_directories(o.out);
  for (const ModelSpec& model : models) {
    const SimulationReport report = run_study({model}, methods, study).front();
    if (!o.out.empty()) {
      write_file(std::filesystem::path(o.out) / (model.id() + ".json"), io::dump(io::report_to_json(report)));
    }
    out << io::format_report_table(report) << std::flush;
  }
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Penalized maximum likelihood for multivariate normal mixtures"};
  app.require_subcommand(1);

  CatalogOptions cat;
  auto* catalog = app.add_subcommand("catalog", "List or show the simulation model catalog");
  catalog->add_flag("--list", cat.list, "List all 72 models");
  catalog->add_option("--show", cat.show, "Show one model, e.g. I.2.1");

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a CSV dataset from a catalog model");
  gen_cmd->add_option("--model,--models", gen.model, "Model identifier")->required();
  gen_cmd->add_option("--n", gen.n, "Sample size (default: the model's n)")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--seed", gen.seed, "Random seed");
  gen_cmd->add_option("--out", gen.out, "Output CSV path (default: stdout)");
  gen_cmd->add_flag("--header", gen.header, "Write a header row x1..xd");

  FitOptions fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a p-component mixture to a CSV dataset");
  fit_cmd->add_option("data", fit.data, "Input CSV")->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("--p", fit.p, "Number of components")->required()->check(CLI::PositiveNumber);
  fit_cmd->add_option("--method", fit.method, "mle, pmle (= pmle2), pmle1 or pmle2")
      ->check(CLI::IsMember({"mle", "pmle", "pmle1", "pmle2"}));
  fit_cmd->add_option("--an", fit.an, "Explicit penalty strength a_n");
  fit_cmd->add_option("--seed", fit.seed, "Seed for start perturbations");
  fit_cmd->add_option("--out", fit.out, "Output fit document (default: stdout)");
  fit_cmd->add_flag("--header", fit.header, "Input has a header row");

  SimulateOptions sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Run the Monte-Carlo study on catalog models");
  sim_cmd->add_option("--models,--model", sim.models, "Model identifiers (comma separated, or 'all')")->required();
  sim_cmd->add_option("--methods,--method", sim.methods, "Methods among mle,pmle1,pmle2");
  sim_cmd->add_option("--reps", sim.reps, "Replications per model")->check(CLI::Range(2, 1000));
  sim_cmd->add_option("--n", sim.n, "Override the model sample size")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--seed", sim.seed, "Base seed");
  sim_cmd->add_option("--threads", sim.threads, "Worker threads (0 = machine width)");
  sim_cmd->add_option("--out", sim.out, "Directory for per-model report documents");
  sim_cmd->add_flag("--raw-errors", sim.raw, "Include per-replication error vectors in reports");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (catalog->parsed()) return cmd_catalog(cat, out);
    if (gen_cmd->parsed()) return cmd_gen(gen, out, err);
    if (fit_cmd->parsed()) return cmd_fit(fit, out, err);
    if (sim_cmd->parsed()) return cmd_simulate(sim, out);
  } catch (const UnknownModel& e) {
    err << e.what() << '\n';
    return kUsage;
  } catch (const ParseError& e) {
    err << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kUsage;
}

}  // namespace pmle::cli
