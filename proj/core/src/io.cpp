#include "pmle/io.hpp"

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "pmle/errors.hpp"

namespace pmle::io {

using nlohmann::json;

json mixture_to_json(const MixingDistribution& g) {
  json comps = json::array();
  for (const Component& c : g.components()) {
    comps.push_back({{"weight", c.weight}, {"mean", c.mean}, {"cov", c.cov.to_rows()}});
  }
  return {{"schema_version", kSchemaVersion}, {"dim", g.dim()}, {"order", g.order()}, {"components", comps}};
}

MixingDistribution mixture_from_json(const json& doc) {
  try {
    if (doc.at("schema_version").get<int>() != kSchemaVersion) {
      throw ParseError("unsupported mixture schema_version " + doc.at("schema_version").dump());
    }
    const auto dim = doc.at("dim").get<std::size_t>();
    const auto order = doc.at("order").get<std::size_t>();
    const json& arr = doc.at("components");
    if (!arr.is_array() || arr.size() != order) throw ParseError("mixture document: components/order mismatch");
    std::vector<Component> comps;
    for (const json& c : arr) {
      Component comp;
      comp.weight = c.at("weight").get<double>();
      comp.mean = c.at("mean").get<Vector>();
      comp.cov = SpdMatrix::from_rows(c.at("cov").get<std::vector<std::vector<double>>>());
      if (comp.mean.size() != dim) throw ParseError("mixture document: mean has wrong dimension");
      comps.push_back(std::move(comp));
    }
    return MixingDistribution(std::move(comps));
  } catch (const json::exception& e) {
    throw ParseError(std::string("mixture document: ") + e.what());
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(std::string("mixture document: ") + e.what());
  }
}

json fit_to_json(const MultiStartResult& fit, std::string_view method, double strength) {
  json runs = json::array();
  for (const FitResult& r : fit.all) {
    runs.push_back({{"log_likelihood", r.log_likelihood},
                    {"penalized_log_likelihood", r.penalized_log_likelihood},
                    {"iterations", r.iterations},
                    {"converged", r.converged},
                    {"degenerate", r.degenerate}});
  }
  return {{"schema_version", kSchemaVersion},
          {"method", method},
          {"a_n", strength},
          {"estimate", mixture_to_json(fit.best.estimate)},
          {"log_likelihood", fit.best.log_likelihood},
          {"penalized_log_likelihood", fit.best.penalized_log_likelihood},
          {"iterations", fit.best.iterations},
          {"converged", fit.best.converged},
          {"best_start", fit.best_index},
          {"degeneracy_count", fit.degeneracy_count},
          {"starts", runs}};
}

json report_to_json(const SimulationReport& report) {
  json methods = json::array();
  json degeneracy = json::object();
  json failures = json::object();
  for (const MethodReport& m : report.methods) {
    json params = json::array();
    for (const ParameterSummary& p : m.parameters) {
      params.push_back({{"name", p.name}, {"truth", p.truth}, {"bias", p.bias}, {"std", p.std}});
    }
    json block = {{"name", m.method.name()},
                  {"a_n", m.strength},
                  {"successes", m.successes},
                  {"parameters", params}};
    if (!m.raw_errors.empty()) block["raw_errors"] = m.raw_errors;
    methods.push_back(std::move(block));
    const std::string key(m.method.name());
    degeneracy[key] = {{"count", m.degeneracy_count}, {"runs", m.runs}};
    failures[key] = m.failures;
  }
  return {{"schema_version", kSchemaVersion},
          {"model_id", report.model.id()},
          {"n", report.n},
          {"replications", report.replications},
          {"seed", report.seed},
          {"methods", methods},
          {"degeneracy", degeneracy},
          {"failures", failures}};
}

std::string format_report_table(const SimulationReport& report) {
  std::ostringstream out;
  char buf[64];
  out << "Model " << report.model.id() << "  n=" << report.n << "  replications=" << report.replications
      << "  seed=" << report.seed << '\n';
  std::snprintf(buf, sizeof buf, "%-12s %8s", "parameter", "truth");
  out << buf;
  for (const MethodReport& m : report.methods) {
    std::snprintf(buf, sizeof buf, " %16s", std::string(m.method.name()).c_str());
    out << buf;
  }
  out << '\n';
  if (!report.methods.empty()) {
    const auto& params = report.methods.front().parameters;
    for (std::size_t k = 0; k < params.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%-12s %8.2f", params[k].name.c_str(), params[k].truth);
      out << buf;
      for (const MethodReport& m : report.methods) {
        std::snprintf(buf, sizeof buf, "   %6.2f (%5.2f)", m.parameters[k].bias, m.parameters[k].std);
        out << buf;
      }
      out << '\n';
    }
  }
  out << "degeneracies:";
  for (const MethodReport& m : report.methods) {
    out << ' ' << m.method.name() << '=' << m.degeneracy_count << '/' << m.runs;
  }
  out << "  failed replications:";
  for (const MethodReport& m : report.methods) out << ' ' << m.method.name() << '=' << m.failures;
  out << '\n';
  return out.str();
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

void write_csv(std::ostream& out, const Dataset& data, bool header) {
  const std::size_t d = data.dim();
  if (header) {
    for (std::size_t k = 0; k < d; ++k) out << (k ? "," : "") << 'x' << (k + 1);
    out << '\n';
  }
  char buf[40];
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto x = data.row(i);
    for (std::size_t k = 0; k < d; ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", x[k]);
      if (k) out << ',';
      out << buf;
    }
    out << '\n';
  }
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_fields(std::string_view line, std::vector<double>& out) {
  out.clear();
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    const std::string_view field = trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) return false;
    out.push_back(v);
    if (comma == std::string_view::npos) return true;
    start = comma + 1;
  }
}

}  // namespace

Dataset read_csv(std::istream& in, HeaderMode header) {
  std::string line;
  std::vector<double> values;
  std::vector<double> fields;
  std::size_t dim = 0;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    if (first) {
      first = false;
      if (header == HeaderMode::Present) continue;
      if (!parse_fields(view, fields)) {
        if (header == HeaderMode::Auto) continue;
        throw ParseError("csv line " + std::to_string(line_no) + ": non-numeric field");
      }
    } else if (!parse_fields(view, fields)) {
      throw ParseError("csv line " + std::to_string(line_no) + ": non-numeric field");
    }
    if (dim == 0) dim = fields.size();
    if (fields.size() != dim) {
      throw ParseError("csv line " + std::to_string(line_no) + ": expected " + std::to_string(dim) +
                       " columns, found " + std::to_string(fields.size()));
    }
    values.insert(values.end(), fields.begin(), fields.end());
  }
  if (values.empty()) throw ParseError("csv input has no observations");
  try {
    return Dataset(dim, std::move(values));
  } catch (const Error& e) {
    throw ParseError(std::string("csv input: ") + e.what());
  }
}

}  // namespace pmle::io
