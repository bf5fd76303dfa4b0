#include "cmcfol/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "cmcfol/manifold_io.hpp"

namespace cmcfol {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<Vec> parse_points(const std::string& text, int dim) {
  std::vector<Vec> pts;
  std::stringstream groups(text);
  std::string group;
  while (std::getline(groups, group, ';')) {
    if (group.empty()) continue;
    Vec p;
    std::stringstream cells(group);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      try {
        p.push_back(std::stod(cell));
      } catch (...) {
        throw_usage("bad coordinate '" + cell + "' in --points");
      }
    }
    if (int(p.size()) != dim)
      throw_usage("point '" + group + "' has " + std::to_string(p.size()) +
                  " coordinates, expected " + std::to_string(dim));
    pts.push_back(std::move(p));
  }
  if (pts.empty()) throw_usage("--points is empty");
  return pts;
}

void emit(std::ostream& out, const JsonOut& j, const std::string& format,
          const std::function<std::string()>& csv) {
  if (format == "csv") {
    out << csv();
  } else {
    out << j.dump(2) << "\n";
  }
}

struct CommonOpts {
  std::string manifold;
  int dim = 0;
  std::string backend = "analytic";
  double fd_step = 1e-4;
  std::string format = "json";
  std::string points;
  std::string config;
  std::string out_path;
};

MetricBackend backend_of(const CommonOpts& c) {
  if (c.backend == "analytic") return MetricBackend::Analytic;
  if (c.backend == "fd") return MetricBackend::FiniteDifference;
  throw_usage("--backend must be 'analytic' or 'fd'");
}

LoadedManifold load(const CommonOpts& c) {
  if (c.manifold.empty()) throw_usage("--manifold is required");
  return load_manifold(c.manifold, c.dim, backend_of(c), c.fd_step);
}

void add_common(CLI::App* cmd, CommonOpts& c, bool with_points) {
  cmd->add_option("--manifold", c.manifold,
                  "builtin:<name> or path to a manifold JSON file");
  cmd->add_option("--dim", c.dim, "dimension override for builtins");
  cmd->add_option("--backend", c.backend, "analytic|fd");
  cmd->add_option("--fd-step", c.fd_step, "finite-difference step");
  cmd->add_option("--format", c.format, "json|csv");
  cmd->add_option("--config", c.config, "collar/ray configuration JSON file");
  cmd->add_option("--out", c.out_path, "write output to a file instead of stdout");
  if (with_points)
    cmd->add_option("--points", c.points, "semicolon-separated points: x,y;x,y");
}

std::ostream& sink(std::ofstream& file, std::ostream& out, const CommonOpts& c) {
  if (c.out_path.empty()) return out;
  file.open(c.out_path, std::ios::binary);
  if (!file) throw_usage("cannot open output file " + c.out_path);
  return file;
}

// ---- subcommand bodies -------------------------------------------------------

int cmd_eval_h(const CommonOpts& c, std::ostream& out) {
  LoadedManifold m = load(c);
  auto pts = parse_points(c.points, m.dim);
  JsonOut j = JsonOut::object();
  j["manifold"] = m.name;
  j["backend"] = c.backend;
  JsonOut arr = JsonOut::array();
  std::string csv = "index";
  for (int i = 0; i < m.dim; ++i) csv += ",p" + std::to_string(i + 1);
  csv += ",H,df_norm\n";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CurvatureSample s = mean_curvature(m.metric, m.slicing, pts[i]);
    JsonOut rec = JsonOut::object();
    rec["point"] = JsonOut::number_array(s.point.begin(), s.point.end());
    rec["H"] = s.H;
    rec["df_norm"] = s.df_norm;
    rec["nu"] = JsonOut::number_array(s.nu.begin(), s.nu.end());
    arr.push_back(std::move(rec));
    csv += std::to_string(i);
    for (double x : s.point) csv += "," + fmt17(x);
    csv += "," + fmt17(s.H) + "," + fmt17(s.df_norm) + "\n";
  }
  j["samples"] = std::move(arr);
  emit(out, j, c.format, [&] { return csv; });
  return 0;
}

int cmd_residual(const CommonOpts& c, int lambda, const std::string& form,
                 std::ostream& out) {
  LoadedManifold m = load(c);
  auto pts = parse_points(c.points, m.dim);
  ResidualForm rf;
  if (form == "standard") rf = ResidualForm::Standard;
  else if (form == "rational") rf = ResidualForm::Rational;
  else throw_usage("--form must be 'standard' or 'rational'");
  JsonOut j = JsonOut::object();
  j["manifold"] = m.name;
  j["lambda"] = lambda;
  j["form"] = form;
  JsonOut arr = JsonOut::array();
  std::string csv = "index,residual\n";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double r = generic_cmc_residual(m.metric, m.slicing, lambda, pts[i], rf);
    JsonOut rec = JsonOut::object();
    rec["point"] = JsonOut::number_array(pts[i].begin(), pts[i].end());
    rec["residual"] = r;
    arr.push_back(std::move(rec));
    csv += std::to_string(i) + "," + fmt17(r) + "\n";
  }
  j["samples"] = std::move(arr);
  emit(out, j, c.format, [&] { return csv; });
  return 0;
}

int cmd_detect_cmc(const CommonOpts& c, const std::string& leaves, double tol,
                   int min_samples, std::ostream& out) {
  LoadedManifold m = load(c);
  std::vector<ProbeRay> rays = m.probe_rays;
  if (!c.config.empty()) {
    CollarConfig cfg = load_collar_config(c.config);
    if (!cfg.rays.empty()) rays = cfg.rays;
  }
  if (rays.empty())
    throw_usage("no probe rays: pass --config with a 'rays' list");
  Vec ts;
  std::stringstream ss(leaves);
  std::string cell;
  while (std::getline(ss, cell, ','))
    if (!cell.empty()) ts.push_back(std::stod(cell));
  if (ts.empty()) throw_usage("--leaves is empty");

  CmcReport rep = detect_cmc(m.metric, m.slicing, ts, rays, tol, min_samples);
  JsonOut j = JsonOut::object();
  j["manifold"] = m.name;
  j["is_cmc"] = rep.is_cmc;
  j["insufficient_samples"] = rep.insufficient_samples;
  JsonOut arr = JsonOut::array();
  std::string csv = "leaf_value,H_mean,spread,samples\n";
  for (const LeafStat& st : rep.leaves) {
    JsonOut rec = JsonOut::object();
    rec["leaf_value"] = st.leaf_value;
    rec["H_mean"] = st.h_mean;
    rec["spread"] = st.spread;
    rec["samples"] = st.samples;
    arr.push_back(std::move(rec));
    csv += fmt17(st.leaf_value) + "," + fmt17(st.h_mean) + "," +
           fmt17(st.spread) + "," + std::to_string(st.samples) + "\n";
  }
  j["leaves"] = std::move(arr);
  emit(out, j, c.format, [&] { return csv; });
  return 0;
}

int cmd_linearize(const CommonOpts& c, const std::string& direction,
                  std::ostream& out) {
  LoadedManifold m = load(c);
  if (direction.empty()) throw_usage("--direction is required");
  ScalarField u(Expression::parse(direction, m.dim,
                                  m.metric.chart().var_names));
  auto pts = parse_points(c.points, m.dim);
  JsonOut j = JsonOut::object();
  j["manifold"] = m.name;
  j["direction"] = direction;
  JsonOut arr = JsonOut::array();
  std::string csv = "index,dH\n";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double v = linearize_mean_curvature(m.metric, m.slicing, u, pts[i]);
    JsonOut rec = JsonOut::object();
    rec["point"] = JsonOut::number_array(pts[i].begin(), pts[i].end());
    rec["dH"] = v;
    arr.push_back(std::move(rec));
    csv += std::to_string(i) + "," + fmt17(v) + "\n";
  }
  j["samples"] = std::move(arr);
  emit(out, j, c.format, [&] { return csv; });
  return 0;
}

JsonOut factor_json(const ConformalFactor& fac, const std::string& kind) {
  JsonOut j = JsonOut::object();
  j["kind"] = kind;
  j["t0"] = fac.t0;
  j["seed_count"] = int(fac.seeds.size());
  if (fac.wrap_integral) j["C"] = fac.C;
  JsonOut rows = JsonOut::array();
  for (std::size_t s = 0; s < fac.seeds.size(); ++s) {
    for (double t : fac.additive.tgrid) {
      if (t < fac.t_lo - 1e-12 || t > fac.t_hi + 1e-12) continue;  // padding
      JsonOut rec = JsonOut::object();
      rec["seed"] = int(s);
      rec["t"] = t;
      rec["omega"] = fac.omega(t, int(s));
      rows.push_back(std::move(rec));
    }
  }
  j["omega_table"] = std::move(rows);
  return j;
}

std::string factor_csv(const ConformalFactor& fac) {
  std::string csv = "seed,t,omega\n";
  for (std::size_t s = 0; s < fac.seeds.size(); ++s)
    for (double t : fac.additive.tgrid) {
      if (t < fac.t_lo - 1e-12 || t > fac.t_hi + 1e-12) continue;  // padding
      csv += std::to_string(s) + "," + fmt17(t) + "," +
             fmt17(fac.omega(t, int(s))) + "\n";
    }
  return csv;
}

// Maximum deviation |H^ghat - target| over the tabulated collar nodes,
// recomputed independently under the rescaled metric.
double verify_factor(const LoadedManifold& m, const ConformalFactor& fac,
                     const std::function<double(std::span<const double>)>& target) {
  MetricField ghat = fac.rescaled_metric(m.metric, m.slicing);
  double worst = 0.0;
  for (std::size_t s = 0; s < fac.seeds.size(); ++s) {
    for (int dir = 0; dir < 2; ++dir) {
      Vec ts = {fac.t0};
      if (dir == 0) {
        for (double t : fac.additive.tgrid)
          if (t > fac.t0 + 1e-12 && t <= fac.t_hi + 1e-12) ts.push_back(t);
        std::sort(ts.begin() + 1, ts.end());
      } else {
        for (double t : fac.additive.tgrid)
          if (t < fac.t0 - 1e-12 && t >= fac.t_lo - 1e-12) ts.push_back(t);
        std::sort(ts.begin() + 1, ts.end(), std::greater<double>());
      }
      if (ts.size() == 1 && dir == 1) continue;
      FlowLine line = integrate_flow_line(m.metric, m.slicing, fac.seeds[s], ts);
      for (const FlowNode& node : line.nodes) {
        double h = mean_curvature(ghat, m.slicing, node.x).H;
        double want = target ? target(node.x) : 0.0;
        worst = std::max(worst, std::abs(h - want));
      }
    }
  }
  return worst;
}

int cmd_factor(const CommonOpts& c, const std::string& kind,
               const std::string& target_expr, const std::string& G_expr,
               int lambda, const std::string& C_text, bool verify,
               std::ostream& out) {
  LoadedManifold m = load(c);
  if (c.config.empty()) throw_usage("--config with collar data is required");
  CollarConfig cfg = load_collar_config(c.config);
  if (cfg.collar.seeds.empty())
    throw_usage("collar config needs 'seeds' or 'seed_segment'");

  std::optional<double> C;
  if (!C_text.empty() && C_text != "auto") C = std::stod(C_text);

  ConformalFactor fac;
  std::function<double(std::span<const double>)> target;
  if (kind == "minimalize") {
    fac = minimalizing_factor(m.metric, m.slicing, cfg.collar);
  } else if (kind == "prescribe") {
    if (target_expr.empty()) throw_usage("--target expression is required");
    Expression e = Expression::parse(target_expr, m.dim,
                                     m.metric.chart().var_names);
    auto shared = std::make_shared<Expression>(std::move(e));
    target = [shared](std::span<const double> p) { return shared->eval(p); };
    fac = prescribing_factor(m.metric, m.slicing, target, C, cfg.collar);
  } else {  // cmc-factor
    std::function<double(double)> G;
    if (!G_expr.empty()) {
      static const std::vector<std::string> tname = {"t"};
      Expression e = Expression::parse(G_expr, 1, tname);
      auto shared = std::make_shared<Expression>(std::move(e));
      G = [shared](double t) {
        Vec v = {t};
        return shared->eval(v);
      };
    } else {
      if (lambda != 1 && lambda != -1)
        throw_usage("pass --lambda +1|-1 or --G <expr in t>");
      G = [lambda](double t) { return lambda * t; };
    }
    fac = cmc_factor(m.metric, m.slicing, G, cfg.collar, C);
    SliceFunction f = m.slicing;
    target = [G, f](std::span<const double> p) { return G(f.f(p)); };
  }

  JsonOut j = factor_json(fac, kind);
  j["manifold"] = m.name;
  if (verify) j["max_abs_error"] = verify_factor(m, fac, target);
  emit(out, j, c.format, [&] { return factor_csv(fac); });
  return 0;
}

int cmd_ah_expand(const CommonOpts& c, const std::string& metric_spec,
                  const std::string& mode, int ell, int series_order,
                  std::ostream& out) {
  if (metric_spec.empty()) throw_usage("--metric is required");
  int order = series_order > 0 ? series_order : ell + 2;
  NormalFormMetric g = load_normal_form(metric_spec, c.dim, order);
  ExpansionState st;
  if (mode == "minimal") st = expand_minimal(g, ell, order);
  else if (mode == "cmc") st = expand_cmc(g, ell, order);
  else throw_usage("--mode must be 'minimal' or 'cmc'");

  int nodes = g.chart->nodes();
  auto coeffs = [&](const BoundarySeries& s, int through) {
    JsonOut per_node = JsonOut::array();
    for (int node = 0; node < nodes; ++node) {
      JsonOut arr = JsonOut::array();
      for (int p = 0; p <= through; ++p) arr.push_back(s.coeff(p)[node]);
      per_node.push_back(std::move(arr));
    }
    return per_node;
  };

  JsonOut j = JsonOut::object();
  j["mode"] = mode;
  j["ell"] = ell;
  j["series_order"] = order;
  j["boundary_nodes"] = nodes;
  j["omega_total"] = coeffs(st.omega_total, ell);
  j["rbar"] = coeffs(st.rbar, ell);
  j["defect"] = coeffs(st.defect, st.defect.order());
  JsonOut hist = JsonOut::array();
  for (const auto& step : st.history) {
    JsonOut rec = JsonOut::object();
    rec["k"] = step.k;
    rec["defect_low_orders"] = step.defect_low_orders;
    rec["ah_defect_const"] = step.ah_defect_const;
    rec["ratio_defect"] = step.ratio_defect;
    hist.push_back(std::move(rec));
  }
  j["steps"] = std::move(hist);

  std::string csv = "node,power,omega_total,rbar\n";
  for (int node = 0; node < nodes; ++node)
    for (int p = 0; p <= ell; ++p)
      csv += std::to_string(node) + "," + std::to_string(p) + "," +
             fmt17(st.omega_total.coeff(p)[node]) + "," +
             fmt17(st.rbar.coeff(p)[node]) + "\n";
  emit(out, j, c.format, [&] { return csv; });
  return 0;
}

int cmd_relate(const CommonOpts& c, double H, double drho, double rho,
               std::ostream& out) {
  double v = interior_mean_curvature_relation(H, drho, rho);
  JsonOut j = JsonOut::object();
  j["H_g"] = H;
  j["drho_norm"] = drho;
  j["rho"] = rho;
  j["H_interior"] = v;
  emit(out, j, c.format,
       [&] { return "H_interior\n" + fmt17(v) + "\n"; });
  return 0;
}

int cmd_corpus(const CommonOpts& c, const std::string& action,
               const std::string& name, std::ostream& out) {
  if (action == "list" || action.empty()) {
    JsonOut j = JsonOut::object();
    JsonOut arr = JsonOut::array();
    for (const auto& n : corpus_names()) {
      CorpusEntry e = corpus_get(n);
      JsonOut rec = JsonOut::object();
      rec["name"] = e.name;
      rec["default_dim"] = e.dim;
      rec["note"] = e.note;
      rec["cmc"] = e.expect_cmc;
      arr.push_back(std::move(rec));
    }
    j["entries"] = std::move(arr);
    emit(out, j, c.format, [&] {
      std::string csv = "name,default_dim,cmc\n";
      for (const auto& n : corpus_names()) {
        CorpusEntry e = corpus_get(n);
        csv += e.name + "," + std::to_string(e.dim) + "," +
               (e.expect_cmc ? "true" : "false") + "\n";
      }
      return csv;
    });
    return 0;
  }
  if (action == "show" || action == "export") {
    if (name.empty()) throw_usage("corpus " + action + " needs an entry name");
    CorpusEntry e = corpus_get(name, c.dim);
    JsonOut j = export_manifold(e);
    emit(out, j, "json", nullptr);
    return 0;
  }
  throw_usage("corpus action must be list, show or export");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"level-set mean curvature, conformal prescription and "
               "asymptotically hyperbolic boundary expansions"};
  app.require_subcommand(1);

  CommonOpts c;
  int lambda = 0;
  std::string form = "standard";
  std::string leaves, direction, target_expr, G_expr, C_text = "auto";
  std::string metric_spec, mode = "minimal", action, entry_name;
  double tol = 0.0, relate_H = 0.0, relate_drho = 1.0, relate_rho = 0.0;
  int min_samples = 2;
  int ell = 4, series_order = 0;
  bool verify = false;

  auto* evalh = app.add_subcommand("eval-h", "mean curvature at points");
  add_common(evalh, c, true);

  auto* resid = app.add_subcommand("residual", "generic CMC residual at points");
  add_common(resid, c, true);
  resid->add_option("--lambda", lambda, "+1 or -1")->required();
  resid->add_option("--form", form, "standard|rational");

  auto* detect = app.add_subcommand("detect-cmc", "per-leaf CMC check");
  add_common(detect, c, false);
  detect->add_option("--leaves", leaves, "comma-separated leaf values")->required();
  detect->add_option("--tol", tol, "per-leaf spread tolerance (0 = default)");
  detect->add_option("--min-samples", min_samples,
                     "points per leaf below which sampling is flagged");

  auto* lin = app.add_subcommand("linearize", "directional derivative of H");
  add_common(lin, c, true);
  lin->add_option("--direction", direction, "variation expression u")->required();

  auto* minim = app.add_subcommand("minimalize", "conformal factor making the slicing minimal");
  add_common(minim, c, false);
  minim->add_flag("--verify", verify, "recompute H under the rescaled metric");

  auto* presc = app.add_subcommand("prescribe", "conformal factor prescribing H = target");
  add_common(presc, c, false);
  presc->add_option("--target", target_expr, "target expression h")->required();
  presc->add_option("--C", C_text, "positivity constant (number or 'auto')");
  presc->add_flag("--verify", verify, "recompute H under the rescaled metric");

  auto* cmcf = app.add_subcommand("cmc-factor", "conformal factor with H = G(f)");
  add_common(cmcf, c, false);
  cmcf->add_option("--lambda", lambda, "+1 or -1 (G = lambda t)");
  cmcf->add_option("--G", G_expr, "expression in t");
  cmcf->add_option("--C", C_text, "positivity constant (number or 'auto')");
  cmcf->add_flag("--verify", verify, "recompute H under the rescaled metric");

  auto* ahx = app.add_subcommand("ah-expand", "boundary expansion solver");
  add_common(ahx, c, false);
  ahx->add_option("--metric", metric_spec, "builtin:<name> or normal-form JSON")->required();
  ahx->add_option("--mode", mode, "minimal|cmc");
  ahx->add_option("--order", ell, "target vanishing order ell")->required();
  ahx->add_option("--series-order", series_order, "series truncation (default ell+2)");

  auto* rel = app.add_subcommand("relate", "interior mean curvature from compactified data");
  add_common(rel, c, false);
  rel->add_option("--H", relate_H, "H^g of the leaf")->required();
  rel->add_option("--drho", relate_drho, "|d rho|_g")->required();
  rel->add_option("--rho", relate_rho, "defining-function value")->required();

  auto* corp = app.add_subcommand("corpus", "built-in manifolds");
  add_common(corp, c, false);
  corp->add_option("action", action, "list|show|export");
  corp->add_option("name", entry_name, "entry name");

  std::vector<const char*> argv;
  argv.push_back("cmcfol");
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    try {
      app.parse(int(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
      out << app.help() << std::flush;
      return 0;
    } catch (const CLI::ParseError& e) {
      throw_usage(std::string("argument error: ") + e.what());
    }

    std::ofstream file;
    std::ostream& o = sink(file, out, c);
    if (app.got_subcommand(evalh)) return cmd_eval_h(c, o);
    if (app.got_subcommand(resid)) return cmd_residual(c, lambda, form, o);
    if (app.got_subcommand(detect))
      return cmd_detect_cmc(c, leaves, tol, min_samples, o);
    if (app.got_subcommand(lin)) return cmd_linearize(c, direction, o);
    if (app.got_subcommand(minim))
      return cmd_factor(c, "minimalize", "", "", 0, "", verify, o);
    if (app.got_subcommand(presc))
      return cmd_factor(c, "prescribe", target_expr, "", 0, C_text, verify, o);
    if (app.got_subcommand(cmcf))
      return cmd_factor(c, "cmc-factor", "", G_expr, lambda, C_text, verify, o);
    if (app.got_subcommand(ahx))
      return cmd_ah_expand(c, metric_spec, mode, ell, series_order, o);
    if (app.got_subcommand(rel))
      return cmd_relate(c, relate_H, relate_drho, relate_rho, o);
    if (app.got_subcommand(corp)) return cmd_corpus(c, action, entry_name, o);
    throw_usage("no subcommand given");
  } catch (const Error& e) {
    JsonOut j = JsonOut::object();
    j["error"] = std::string(e.what());
    switch (e.kind()) {
      case Error::Kind::Usage: j["kind"] = "usage"; break;
      case Error::Kind::Parse: j["kind"] = "parse"; break;
      case Error::Kind::Domain: j["kind"] = "domain"; break;
      case Error::Kind::Precondition: j["kind"] = "precondition"; break;
    }
    out << j.dump() << "\n";
    return (e.kind() == Error::Kind::Usage || e.kind() == Error::Kind::Parse)
               ? 2 : 1;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace cmcfol
