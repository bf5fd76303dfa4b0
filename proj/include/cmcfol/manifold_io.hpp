#pragma once

#include <optional>
#include <string>

#include "cmcfol/ahseries.hpp"
#include "cmcfol/conformal.hpp"
#include "cmcfol/corpus.hpp"
#include "cmcfol/jsonout.hpp"

namespace cmcfol {

struct LoadedManifold {
  std::string name;
  int dim = 0;
  MetricField metric;
  SliceFunction slicing;
  std::vector<ProbeRay> probe_rays;  // defaults for builtins
  std::optional<CorpusEntry> corpus;
};

// spec is either "builtin:<corpus name>" or a path to a JSON manifold file.
// dim applies to builtins only (0 = entry default). The JSON format:
//   { "dimension": n, "domain": [[lo,hi],...], "variables": [... optional],
//     "metric": [n rows of n expression strings], "slicing": "expr",
//     "eps_df": 1e-8 }
// Expressions parse against the declared variables; the metric passes a
// positive-definiteness spot check at 10 deterministic sample points.
LoadedManifold load_manifold(const std::string& spec, int dim = 0,
                             MetricBackend backend = MetricBackend::Analytic,
                             double fd_step = 1e-4);

// spec is "builtin:hyperbolic-normal-form", "builtin:warped-normal-form" or a
// JSON file:
//   { "n": 3,
//     "boundary": {"shape":[...], "lo":[...], "hi":[...],
//                  "stencil": "periodic"|"clamped"},   // omit: homogeneous
//     "h": [ per power of r: (n-1)x(n-1) entries ],
//     "grr": [ per power of r ] }                      // optional
// Homogeneous entries are numbers; grid entries are expression strings in the
// boundary variables.
NormalFormMetric load_normal_form(const std::string& spec, int dim, int order);

// Collar configuration JSON:
//   { "t0": 0, "t_min": -0.8, "t_max": 0.8, "t_samples": 161,
//     "seeds": [[...], ...] |
//     "seed_segment": {"from": [...], "to": [...], "count": 5},
//     "rays": [ {"origin": [...], "dir": [...], "s": [lo, hi]} ] }
struct CollarConfig {
  CollarSpec collar;
  std::vector<ProbeRay> rays;
};
CollarConfig load_collar_config(const std::string& path);

JsonOut export_manifold(const CorpusEntry& entry);

std::string read_file(const std::string& path);  // Usage error when missing

}  // namespace cmcfol
