#include "cmcfol/manifold_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace cmcfol {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_usage("file not found: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

json parse_json(const std::string& text, const std::string& what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw_usage("invalid JSON in " + what);
  return j;
}

Vec to_vec(const json& j, const std::string& what) {
  if (!j.is_array()) throw_usage(what + " must be an array of numbers");
  Vec v;
  for (const auto& x : j) {
    if (!x.is_number()) throw_usage(what + " must be an array of numbers");
    v.push_back(x.get<double>());
  }
  return v;
}

LoadedManifold from_corpus(const std::string& name, int dim,
                           MetricBackend backend, double fd_step) {
  CorpusEntry entry = corpus_get(name, dim);
  LoadedManifold m;
  m.name = entry.name;
  m.dim = entry.dim;
  m.metric = backend == MetricBackend::Analytic
                 ? entry.metric
                 : entry.metric.with_fd_backend(fd_step);
  m.slicing = entry.slicing;
  m.probe_rays = entry.probe_rays;
  m.corpus = std::move(entry);
  return m;
}

}  // namespace

LoadedManifold load_manifold(const std::string& spec, int dim,
                             MetricBackend backend, double fd_step) {
  if (spec.rfind("builtin:", 0) == 0)
    return from_corpus(spec.substr(8), dim, backend, fd_step);

  json j = parse_json(read_file(spec), spec);
  if (j.contains("builtin"))
    return from_corpus(j["builtin"].get<std::string>(), dim, backend, fd_step);

  LoadedManifold m;
  m.name = spec;
  if (!j.contains("dimension") || !j["dimension"].is_number_integer())
    throw_usage("manifold spec needs an integer 'dimension'");
  int n = j["dimension"].get<int>();
  if (n < 2) throw_usage("manifold dimension must be >= 2");
  m.dim = n;

  Chart chart;
  chart.dim = n;
  if (j.contains("domain")) {
    const auto& dom = j["domain"];
    if (!dom.is_array() || int(dom.size()) != n)
      throw_usage("'domain' must list one [lo, hi] pair per coordinate");
    for (const auto& pair : dom) {
      Vec b = to_vec(pair, "domain bound");
      if (b.size() != 2 || !(b[0] < b[1]))
        throw_usage("'domain' bounds must be ordered pairs");
      chart.lo.push_back(b[0]);
      chart.hi.push_back(b[1]);
    }
  } else {
    chart = Chart::unbounded(n);
  }
  if (j.contains("variables")) {
    for (const auto& v : j["variables"])
      chart.var_names.push_back(v.get<std::string>());
    if (int(chart.var_names.size()) != n)
      throw_usage("'variables' must name every coordinate");
  }
  if (j.contains("excluded")) chart.excluded_locus = j["excluded"].get<std::string>();

  if (!j.contains("metric")) throw_usage("manifold spec needs 'metric'");
  const auto& rows = j["metric"];
  if (!rows.is_array() || int(rows.size()) != n)
    throw_usage("'metric' must be an n x n array of expressions");
  std::vector<std::string> entries;
  for (const auto& row : rows) {
    if (!row.is_array() || int(row.size()) != n)
      throw_usage("'metric' must be an n x n array of expressions");
    for (const auto& cell : row)
      entries.push_back(cell.is_string() ? cell.get<std::string>()
                                         : cell.dump());
  }
  // textual symmetry check
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      if (entries[std::size_t(a) * n + b] != entries[std::size_t(b) * n + a])
        throw_usage("metric entries must be symmetric");

  m.metric = MetricField::from_expressions(chart, entries,
                                           MetricBackend::Analytic, fd_step);
  if (backend == MetricBackend::FiniteDifference)
    m.metric = m.metric.with_fd_backend(fd_step);

  if (!j.contains("slicing")) throw_usage("manifold spec needs 'slicing'");
  double eps = j.value("eps_df", 1e-8);
  m.slicing = SliceFunction{
      ScalarField(Expression::parse(j["slicing"].get<std::string>(), n,
                                    chart.var_names)),
      eps};

  // Spot check: positive definiteness at 10 deterministic points.
  unsigned long long state = 0x9e3779b97f4a7c15ull;
  auto next = [&state]() {
    state ^= state >> 12;
    state ^= state << 25;
    state ^= state >> 27;
    return double((state * 2685821657736338717ull) >> 11) / 9007199254740992.0;
  };
  for (int k = 0; k < 10; ++k) {
    Vec p(n);
    for (int i = 0; i < n; ++i) {
      double lo = std::isfinite(chart.lo[i]) ? chart.lo[i] : -1.0;
      double hi = std::isfinite(chart.hi[i]) ? chart.hi[i] : 1.0;
      p[i] = lo + (hi - lo) * (0.05 + 0.9 * next());
    }
    try {
      (void)m.metric.value(p);
    } catch (const Error& e) {
      if (e.kind() == Error::Kind::Domain)
        throw Error(Error::Kind::Domain,
                    std::string("metric spot check failed: ") + e.what());
      throw;
    }
  }

  if (j.contains("rays")) {
    for (const auto& r : j["rays"]) {
      ProbeRay ray;
      ray.origin = to_vec(r.at("origin"), "ray origin");
      ray.direction = to_vec(r.at("dir"), "ray dir");
      Vec s = to_vec(r.at("s"), "ray s range");
      if (s.size() != 2) throw_usage("ray 's' must be [lo, hi]");
      ray.s_min = s[0];
      ray.s_max = s[1];
      m.probe_rays.push_back(ray);
    }
  }
  return m;
}

NormalFormMetric load_normal_form(const std::string& spec, int dim, int order) {
  if (spec.rfind("builtin:", 0) == 0) {
    CorpusEntry entry = corpus_get(spec.substr(8), dim);
    if (!entry.normal_form)
      throw_usage("corpus entry '" + entry.name + "' has no normal-form data");
    return entry.normal_form(order);
  }

  json j = parse_json(read_file(spec), spec);
  if (!j.contains("n")) throw_usage("normal-form spec needs 'n'");
  int n = j["n"].get<int>();
  if (n < 2) throw_usage("normal-form spec needs n >= 2");
  int bd = n - 1;

  std::shared_ptr<const BoundaryChart> chart;
  std::vector<std::string> bvars;
  if (j.contains("boundary") && !j["boundary"].empty()) {
    auto bc = std::make_shared<BoundaryChart>();
    const auto& b = j["boundary"];
    for (const auto& s : b.at("shape")) bc->shape.push_back(s.get<int>());
    bc->lo = to_vec(b.at("lo"), "boundary lo");
    bc->hi = to_vec(b.at("hi"), "boundary hi");
    if (int(bc->shape.size()) != bd || bc->lo.size() != bc->shape.size() ||
        bc->hi.size() != bc->shape.size())
      throw_usage("boundary chart must have n-1 tangential directions");
    std::string st = b.value("stencil", "clamped");
    bc->stencil = st == "periodic" ? BoundaryChart::Stencil::Periodic
                                   : BoundaryChart::Stencil::Clamped;
    chart = bc;
    for (int i = 0; i < bd; ++i) bvars.push_back("x" + std::to_string(i + 1));
  } else {
    chart = BoundaryChart::homogeneous();
  }

  auto parse_field = [&](const json& cell) {
    if (chart->bdim() == 0) {
      if (!cell.is_number())
        throw_usage("homogeneous normal-form entries must be numbers");
      return BoundaryField(chart, cell.get<double>());
    }
    Expression e = Expression::parse(
        cell.is_string() ? cell.get<std::string>() : cell.dump(), bd);
    return BoundaryField::sampled(chart, [&e](std::span<const double> x) {
      return e.eval(x);
    });
  };

  if (!j.contains("h")) throw_usage("normal-form spec needs 'h'");
  const auto& powers = j["h"];
  if (!powers.is_array() || powers.empty())
    throw_usage("'h' must list coefficient matrices per power of r");
  NormalFormMetric g;
  g.n = n;
  g.chart = chart;
  g.h.assign(std::size_t(bd) * bd, BoundarySeries(chart, order));
  for (std::size_t p = 0; p < powers.size(); ++p) {
    if (int(p) > order)
      throw_usage("normal-form 'h' has more powers than the series order");
    const auto& mat = powers[p];
    if (!mat.is_array() || int(mat.size()) != bd)
      throw_usage("each 'h' power must be an (n-1) x (n-1) matrix");
    for (int i = 0; i < bd; ++i) {
      const auto& row = mat[i];
      if (!row.is_array() || int(row.size()) != bd)
        throw_usage("each 'h' power must be an (n-1) x (n-1) matrix");
      for (int k = 0; k < bd; ++k)
        g.h[std::size_t(i) * bd + k].coeff_ref(int(p)) = parse_field(row[k]);
    }
  }
  if (j.contains("grr")) {
    BoundarySeries grr(chart, order);
    const auto& list = j["grr"];
    for (std::size_t p = 0; p < list.size() && int(p) <= order; ++p)
      grr.coeff_ref(int(p)) = parse_field(list[p]);
    g.grr = grr;
  }
  g.validate_ah();
  return g;
}

CollarConfig load_collar_config(const std::string& path) {
  json j = parse_json(read_file(path), path);
  CollarConfig cfg;
  cfg.collar.t0 = j.value("t0", 0.0);
  if (!j.contains("t_min") || !j.contains("t_max"))
    throw_usage("collar config needs 't_min' and 't_max'");
  cfg.collar.t_min = j["t_min"].get<double>();
  cfg.collar.t_max = j["t_max"].get<double>();
  cfg.collar.t_samples = j.value("t_samples", 161);
  if (j.contains("seeds")) {
    for (const auto& s : j["seeds"])
      cfg.collar.seeds.push_back(to_vec(s, "seed"));
  } else if (j.contains("seed_segment")) {
    const auto& seg = j["seed_segment"];
    Vec from = to_vec(seg.at("from"), "seed_segment from");
    Vec to = to_vec(seg.at("to"), "seed_segment to");
    int count = seg.value("count", 5);
    if (count < 1 || from.size() != to.size())
      throw_usage("seed_segment needs matching endpoints and count >= 1");
    for (int k = 0; k < count; ++k) {
      double u = count == 1 ? 0.0 : double(k) / (count - 1);
      Vec p(from.size());
      for (std::size_t i = 0; i < p.size(); ++i)
        p[i] = from[i] + u * (to[i] - from[i]);
      cfg.collar.seeds.push_back(p);
    }
  }
  if (j.contains("rays")) {
    for (const auto& r : j["rays"]) {
      ProbeRay ray;
      ray.origin = to_vec(r.at("origin"), "ray origin");
      ray.direction = to_vec(r.at("dir"), "ray dir");
      Vec s = to_vec(r.at("s"), "ray s range");
      if (s.size() != 2) throw_usage("ray 's' must be [lo, hi]");
      ray.s_min = s[0];
      ray.s_max = s[1];
      cfg.rays.push_back(ray);
    }
  }
  return cfg;
}

JsonOut export_manifold(const CorpusEntry& entry) {
  JsonOut j = JsonOut::object();
  j["name"] = entry.name;
  j["note"] = entry.note;
  j["dimension"] = entry.dim;
  const Chart& chart = entry.metric.chart();
  JsonOut dom = JsonOut::array();
  for (int i = 0; i < chart.dim; ++i) {
    JsonOut pair = JsonOut::array();
    pair.push_back(chart.lo[i]);
    pair.push_back(chart.hi[i]);
    dom.push_back(std::move(pair));
  }
  j["domain"] = std::move(dom);
  j["excluded"] = chart.excluded_locus;

  JsonOut rows = JsonOut::array();
  int n = entry.dim;
  for (int a = 0; a < n; ++a) {
    JsonOut row = JsonOut::array();
    for (int b = 0; b < n; ++b) {
      const auto& e = entry.metric.entries()[std::size_t(a) * n + b];
      row.push_back(e.expression() ? e.expression()->print() : std::string("?"));
    }
    rows.push_back(std::move(row));
  }
  j["metric"] = std::move(rows);
  j["slicing"] = entry.slicing.f.expression()
                     ? entry.slicing.f.expression()->print()
                     : std::string("?");
  j["eps_df"] = entry.slicing.eps_df;
  if (entry.closed_form_H) j["closed_form_H"] = entry.closed_form_H->print();
  j["cmc"] = entry.expect_cmc;
  return j;
}

}  // namespace cmcfol
