#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cmcfol/ahseries.hpp"
#include "cmcfol/foliation.hpp"

namespace cmcfol {

// Built-in manifolds and slicings with closed-form reference curvature,
// used as oracles throughout the test suite and addressable from the CLI.
struct CorpusEntry {
  std::string name;
  std::string note;  // geometric description
  int dim = 0;
  MetricField metric;  // analytic backend
  SliceFunction slicing;
  std::string excluded_locus;

  // H as a function of the leaf value, when the slicing is CMC.
  std::optional<Expression> closed_form_H;
  // H as a function of the point, when available in closed form.
  std::function<double(std::span<const double>)> closed_form_H_point;

  bool expect_cmc = false;
  std::vector<ProbeRay> probe_rays;

  // Admissible sampling region for randomized tests: a box plus an optional
  // predicate (e.g. a radial shell).
  Vec sample_lo, sample_hi;
  std::function<bool(std::span<const double>)> sample_predicate;

  // For the *-normal-form entries: collar data at the requested series order.
  std::function<NormalFormMetric(int order)> normal_form;

  double closed_H(double leaf_value) const;
  Vec sample_point(unsigned long long& rng_state) const;
};

std::vector<std::string> corpus_names();

// dim = 0 selects the entry's default dimension. Unknown names raise a usage
// error listing the available entries.
CorpusEntry corpus_get(const std::string& name, int dim = 0);

}  // namespace cmcfol
