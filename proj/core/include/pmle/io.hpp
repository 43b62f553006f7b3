#pragma once

#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "pmle/em.hpp"
#include "pmle/harness.hpp"
#include "pmle/mixture.hpp"

namespace pmle::io {

inline constexpr int kSchemaVersion = 1;

/// {"schema_version", "dim", "order", "components": [{"weight", "mean", "cov"}]}
/// with cov as the full symmetric matrix.
nlohmann::json mixture_to_json(const MixingDistribution& g);
/// Throws ParseError on malformed documents.
MixingDistribution mixture_from_json(const nlohmann::json& doc);

/// Fit document: estimate plus log-likelihood, penalized log-likelihood,
/// iteration count, convergence and per-start degeneracy information.
nlohmann::json fit_to_json(const MultiStartResult& fit, std::string_view method, double strength);

nlohmann::json report_to_json(const SimulationReport& report);

/// Compact bias (std) table, one row per parameter and one column per method.
std::string format_report_table(const SimulationReport& report);

/// Deterministic pretty-printed form used for every written document.
std::string dump(const nlohmann::json& doc);

/// One observation per line, %.17g, optional "x1,...,xd" header.
void write_csv(std::ostream& out, const Dataset& data, bool header = false);

enum class HeaderMode { Auto, Present, Absent };

/// Auto treats a first line containing a non-numeric field as a header.
Dataset read_csv(std::istream& in, HeaderMode header = HeaderMode::Auto);

}  // namespace pmle::io
