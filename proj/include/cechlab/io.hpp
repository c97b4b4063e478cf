#pragma once

#include <iosfwd>
#include <nlohmann/json.hpp>
#include <string>

#include "cechlab/harness.hpp"
#include "cechlab/homology.hpp"

namespace cechlab {

using json = nlohmann::json;

// All doubles are printed with %.17g so outputs are reproducible and
// round-trip exactly.

// --- point clouds -----------------------------------------------------------
// CSV: comment header with dim/count/seed/tag (plus optional resolved-config
// line), then one point per row.
void write_cloud_csv(std::ostream& out, const PointCloud& cloud, const std::string& config_line = "");
PointCloud read_cloud_csv(std::istream& in);

// Binary: magic "CLB1", u32 dim, u64 count, u64 seed, u8 tag, doubles.
void write_cloud_binary(std::ostream& out, const PointCloud& cloud);
PointCloud read_cloud_binary(std::istream& in);

// --- complexes --------------------------------------------------------------
// Line format `dim v0 v1 ... vk value`, sorted by (value, dim, lex vertices):
// the filtration order contract shared with the homology module.
void write_complex(std::ostream& out, const SimplicialComplex& complex);
SimplicialComplex read_complex(std::istream& in);

// --- homology artifacts -----------------------------------------------------
void write_pairs_csv(std::ostream& out, const PersistenceDiagram& diagram);
json betti_to_json(const BettiVector& bv);

// --- limit tables -----------------------------------------------------------
void write_limit_csv_header(std::ostream& out);
void write_limit_row(std::ostream& out, int m, int k, double lambda, double r,
                     const LimitEstimate& estimate);

// --- experiment results -----------------------------------------------------
// CSV rows: setting,n,r,k,stat,mean,stderr,trials,seed.
void write_results_csv(std::ostream& out, const std::string& setting,
                       const std::vector<ResultRecord>& records, int trials,
                       const std::string& header_comment = "");
json results_to_json(const std::string& setting, const std::vector<ResultRecord>& records);
// Plot-ready table: one row per r/n with mean and stderr columns per statistic.
void write_gnuplot_table(std::ostream& out, const std::vector<ResultRecord>& records);

void write_coupling_csv(std::ostream& out, const std::vector<CouplingRecord>& records,
                        const std::string& header_comment = "");

// --- declarative configs ----------------------------------------------------
// {"charts":[{"kind":"circle","radius":1.0}, ...],
//  "density":{"kind":"uniform"} | {"kind":"tilted","axis":0,"alpha":0.5}}
// Chart entries accept an optional "domain": [[lo,hi],...] effective domain.
ChartAtlas atlas_from_json(const json& spec);
// Shorthand names used by the CLI: circle, circle:R, torus:R:r, sphere.
ChartAtlas atlas_from_name(const std::string& name, AtlasDensity density = {});

json experiment_config_to_json(const ExperimentConfig& config);
ExperimentConfig experiment_config_from_json(const json& spec);

std::string format_double(double v);

}  // namespace cechlab
