#include "geoflow/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <optional>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "geoflow/decomposition.hpp"
#include "geoflow/errors.hpp"
#include "geoflow/flow.hpp"
#include "geoflow/parallel.hpp"
#include "geoflow/model_io.hpp"
#include "geoflow/periodic.hpp"
#include "geoflow/pressure.hpp"
#include "geoflow/riccati.hpp"

namespace geoflow {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Output tables

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;

  void add(std::vector<json> row) { rows.push_back(std::move(row)); }
};

std::string csv_cell(const json& v) {
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
  if (v.is_number()) return format_number(v.get<double>());
  const std::string s = v.is_string() ? v.get<std::string>() : v.dump();
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

void write_table(const Table& t, const std::string& format, std::ostream& out) {
  if (format == "json") {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : t.rows) {
      nlohmann::ordered_json obj = nlohmann::ordered_json::object();
      for (std::size_t i = 0; i < t.columns.size(); ++i) {
        const json& v = r[i];
        // Non-finite numbers have no JSON literal.
        obj[t.columns[i]] = v.is_number_float() && !std::isfinite(v.get<double>()) ? json(csv_cell(v)) : v;
      }
      arr.push_back(std::move(obj));
    }
    out << arr.dump(2) << "\n";
    return;
  }
  for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << csv_cell(t.columns[i]);
  out << "\n";
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << csv_cell(r[i]);
    out << "\n";
  }
}

// ---------------------------------------------------------------------------
// Parameters: command line flag, then --config file value, then default.

std::string normalise(std::string key) {
  for (auto& c : key)
    if (c == '-') c = '_';
  return key;
}

class Params {
 public:
  Params(CLI::App* app, json config) : app_(app), config_(std::move(config)) {}

  bool has(const std::string& name) const {
    const auto* opt = app_->get_option_no_throw("--" + name);
    return (opt && opt->count() > 0) || config_.contains(normalise(name));
  }

  std::string text(const std::string& name, const std::string& def = "") const {
    if (const auto* opt = app_->get_option_no_throw("--" + name); opt && opt->count() > 0)
      return opt->as<std::string>();
    const auto key = normalise(name);
    if (config_.contains(key)) return config_[key].is_string() ? config_[key].get<std::string>() : config_[key].dump();
    return def;
  }

  double number(const std::string& name, double def) const {
    const std::string s = text(name);
    if (s.empty()) return def;
    return parse_double(name, s);
  }

  long integer(const std::string& name, long def) const {
    const double x = number(name, static_cast<double>(def));
    if (x != std::floor(x)) throw Error(ErrorCode::InvalidArgument, "--" + name + " expects an integer");
    return static_cast<long>(x);
  }

  bool flag(const std::string& name) const {
    if (const auto* opt = app_->get_option_no_throw("--" + name); opt && opt->count() > 0) return true;
    const auto key = normalise(name);
    return config_.contains(key) && config_[key].is_boolean() && config_[key].get<bool>();
  }

  /// "a,b,c", "start:stop:step" or a JSON array in the config file.
  std::vector<double> grid(const std::string& name, const std::vector<double>& def) const {
    const std::string s = text(name);
    if (s.empty()) return def;
    std::vector<double> out;
    if (s.front() == '[') {
      for (const auto& x : json::parse(s)) out.push_back(x.get<double>());
    } else if (std::count(s.begin(), s.end(), ':') == 2) {
      const auto a = s.find(':'), b = s.rfind(':');
      const double lo = parse_double(name, s.substr(0, a)), hi = parse_double(name, s.substr(a + 1, b - a - 1));
      const double step = parse_double(name, s.substr(b + 1));
      if (!(step > 0.0)) throw Error(ErrorCode::InvalidArgument, "--" + name + ": step must be positive");
      for (long k = 0; lo + k * step <= hi + 1e-9 * step; ++k) out.push_back(lo + k * step);
    } else {
      std::stringstream in(s);
      std::string item;
      while (std::getline(in, item, ',')) out.push_back(parse_double(name, item));
    }
    for (std::size_t i = 1; i < out.size(); ++i)
      if (!(out[i] > out[i - 1])) throw Error(ErrorCode::InvalidArgument, "--" + name + " must be increasing");
    if (out.empty()) throw Error(ErrorCode::InvalidArgument, "--" + name + " is empty");
    return out;
  }

  json raw(const std::string& name) const {
    if (const auto* opt = app_->get_option_no_throw("--" + name); opt && opt->count() > 0) {
      const std::string s = opt->as<std::string>();
      try {
        return json::parse(s);
      } catch (const json::exception&) {
        return json(s);
      }
    }
    const auto key = normalise(name);
    return config_.contains(key) ? config_[key] : json();
  }

 private:
  static double parse_double(const std::string& name, const std::string& s) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || s.find_first_not_of(" \t", used) != std::string::npos)
      throw Error(ErrorCode::InvalidArgument, "--" + name + ": cannot read '" + s + "' as a number");
    return x;
  }

  CLI::App* app_;
  json config_;
};

double positive(double x, const char* what) {
  if (!(x > 0.0)) throw Error(ErrorCode::InvalidArgument, std::string(what) + " must be positive");
  return x;
}

// ---------------------------------------------------------------------------
// Commands

struct Context {
  const Params& p;
  std::ostream& out;
  std::ostream& err;
  std::string format;
};

RiccatiConfig riccati_config(const Params& p) {
  RiccatiConfig cfg;
  cfg.T_conv = positive(p.number("T-conv", cfg.T_conv), "--T-conv");
  cfg.tol = positive(p.number("riccati-tol", cfg.tol), "--riccati-tol");
  cfg.h = positive(p.number("riccati-h", cfg.h), "--riccati-h");
  return cfg;
}

MetricModel model_of(const Params& p) {
  const std::string path = p.text("model");
  if (path.empty()) throw Error(ErrorCode::InvalidArgument, "--model is required");
  return load_model(path);
}

UnitTangent start_of(const MetricModel& model, const Params& p) {
  if (p.has("start")) return parse_tangent(model, p.raw("start"));
  if (model.kind() == ModelKind::synthetic)
    return UnitTangent::synthetic(p.number("time", 0.0), p.flag("reversed"));
  const Complex z{p.number("x", 0.0), p.number("y", 0.0)};
  if (std::norm(z) >= 1.0) throw Error(ErrorCode::InvalidArgument, "start footpoint outside the unit disk");
  return model.wrap(UnitTangent::at(z, p.number("angle", 0.0)));
}

std::vector<Potential> potentials_of(const Params& p, const std::string& name, const char* def) {
  json doc = p.raw(name);
  if (doc.is_null()) doc = def;
  std::vector<Potential> out;
  if (doc.is_array()) {
    for (const auto& d : doc) out.push_back(parse_potential(d));
  } else if (doc.is_string()) {
    std::stringstream in(doc.get<std::string>());
    std::string item;
    while (std::getline(in, item, ';'))
      if (!item.empty()) out.push_back(parse_potential(item));
  } else {
    out.push_back(parse_potential(doc));
  }
  if (out.empty()) throw Error(ErrorCode::InvalidArgument, "--" + name + " is empty");
  return out;
}

int cmd_model_validate(const Context& c) {
  const MetricModel model = model_of(c.p);
  const auto& r = model.report();
  std::ostringstream summary;
  summary << "kind=" << kind_name(model.kind());
  double kmin = r.min_curvature, kmax = r.max_curvature;
  if (model.kind() == ModelKind::synthetic) {
    kmax = model.profile().max();
    kmin = kmax;
    for (const auto& [time, k] : model.profile().knots()) kmin = std::min(kmin, k);
  }
  if (model.kind() == ModelKind::fuchsian) summary << ", K=-1";
  else summary << ", K in [" << format_number(kmin) << ", " << format_number(kmax) << "]";
  summary << ", " << (r.ok ? "ok" : "unsupported");
  if (c.format == "json") {
    nlohmann::ordered_json doc{{"kind", kind_name(model.kind())}, {"ok", r.ok}, {"max_curvature", kmax},
             {"min_curvature", kmin}, {"declared_singular", model.declared_singular()}};
    if (model.kind() != ModelKind::synthetic) {
      doc["generator_det_error"] = r.max_det_error;
      doc["max_curvature_at"] = {r.max_curvature_location.real(), r.max_curvature_location.imag()};
      doc["injectivity_radius"] = r.injectivity_radius;
    }
    doc["summary"] = summary.str();
    c.out << doc.dump(2) << "\n";
  } else {
    c.out << summary.str() << "\n";
    if (model.kind() != ModelKind::synthetic) {
      c.out << "generator_det_error=" << format_number(r.max_det_error) << "\n";
      c.out << "max_curvature=" << format_number(kmax) << " at (" << format_number(r.max_curvature_location.real())
            << ", " << format_number(r.max_curvature_location.imag()) << ")\n";
      c.out << "injectivity_radius=" << format_number(r.injectivity_radius) << "\n";
    } else {
      c.out << "max_curvature=" << format_number(kmax) << "\n";
    }
  }
  return r.ok ? 0 : exit_code_for(ErrorCode::PositiveCurvature);
}

int cmd_flow(const Context& c) {
  const MetricModel model = model_of(c.p);
  const UnitTangent v = start_of(model, c.p);
  const double t = c.p.number("t", 1.0);
  if (!(t >= 0.0)) throw Error(ErrorCode::InvalidArgument, "--t must be non-negative");
  const double h = positive(c.p.number("dt", kDefaultFlowStep), "--dt");
  const double every = positive(c.p.number("sample-step", 1e-2), "--sample-step");
  const long stride = std::max(1L, std::lround(every / h));
  const auto seg = flow(model, v, t, h);
  const bool with_k = c.p.flag("curvatures");
  std::optional<HyperbolicityProfile> prof;
  if (with_k) {
    const RiccatiConfig cfg = riccati_config(c.p);
    const double step = h * static_cast<double>(stride);
    prof = hyperbolicity_profile(model, v, std::min(0.0, t), std::max(0.0, t), step, cfg);
  }
  Table table{{"t", "x", "y", "angle", "K", "ku", "ks"}, {}};
  for (std::size_t i = 0; i < seg.samples.size(); i += static_cast<std::size_t>(stride)) {
    const auto& s = seg.samples[i];
    const double time = (t < 0 ? -1.0 : 1.0) * h * static_cast<double>(i);
    json ku, ks;
    if (prof) {
      const auto j = static_cast<std::size_t>(std::lround((time - prof->t0) / prof->step));
      if (j < prof->size()) {
        ku = prof->ku[j];
        ks = prof->ks[j];
      }
    }
    table.add({time, s.v.z.real(), s.v.z.imag(), s.v.angle, s.K, ku, ks});
  }
  write_table(table, c.format, c.out);
  return 0;
}

int cmd_decompose(const Context& c) {
  const MetricModel model = model_of(c.p);
  const UnitTangent v = start_of(model, c.p);
  DecompositionParams params;
  params.T = positive(c.p.number("T", params.T), "--T");
  params.eta = positive(c.p.number("eta", params.eta), "--eta");
  params.h = positive(c.p.number("grid", params.h), "--grid");
  params.safety_margin = c.p.flag("safety-margin");
  const double t = c.p.number("t", 10.0);
  if (t < 0.0) throw Error(ErrorCode::InvalidArgument, "--t must be nonnegative");
  const auto split = decompose(model, v, t, params, riccati_config(c.p));
  Table table{{"t", "p", "g", "s"}, {}};
  table.add({t, split.p, split.g, split.s});
  write_table(table, c.format, c.out);
  return 0;
}

std::vector<ClassRecord> classes_of(const MetricModel& model, const Params& p) {
  EnumerationLimits limits;
  limits.max_length = p.number("max-length", 0.0);
  // Conformal lengths are at least e^{min u} times the hyperbolic ones.
  double u_min = 0.0;
  for (const auto& b : model.bumps()) u_min += std::min(0.0, b.amplitude);
  limits.max_length *= std::exp(-u_min);
  limits.max_word_len = static_cast<int>(p.integer("max-word-len", 0));
  limits.max_classes = static_cast<std::size_t>(p.integer("max-classes", static_cast<long>(limits.max_classes)));
  if (!(limits.max_length > 0.0) && limits.max_word_len <= 0)
    throw Error(ErrorCode::InvalidArgument, "give --max-length or --max-word-len");
  return enumerate_classes(model, limits);
}

int cmd_orbits(const Context& c) {
  const MetricModel model = model_of(c.p);
  if (model.kind() == ModelKind::synthetic)
    throw Error(ErrorCode::Unsupported, "orbit enumeration needs a surface model");
  const auto potentials = potentials_of(c.p, "potentials", "zero");
  const RiccatiConfig cfg = riccati_config(c.p);
  const double spacing = positive(c.p.number("node-spacing", 0.05), "--node-spacing");
  const auto classes = classes_of(model, c.p);
  std::vector<PeriodicOrbit> orbits(classes.size());
  parallel_for(classes.size(), [&](std::size_t i) {
    orbits[i] = close_geodesic(model, classes[i], spacing);
    orbits[i].regular = classify_regular(model, orbits[i], 1.0, kSingularThreshold, cfg);
    for (const auto& phi : potentials) orbit_potential(model, orbits[i], phi, cfg);
  });
  const double max_length = c.p.number("max-length", 0.0);
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < orbits.size(); ++i)
    if (!(max_length > 0.0) || orbits[i].length <= max_length) order.push_back(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return orbits[a].length < orbits[b].length; });
  Table table{{"word", "length", "regular"}, {}};
  for (const auto& phi : potentials) table.columns.push_back("Phi:" + phi.id);
  for (std::size_t i : order) {
    auto& o = orbits[i];
    std::vector<json> row{o.word.str(), o.length, o.regular};
    for (const auto& phi : potentials) row.push_back(orbit_potential(model, o, phi, cfg));
    table.add(std::move(row));
  }
  write_table(table, c.format, c.out);
  return 0;
}

const std::vector<double> kDefaultTGrid = [] {
  std::vector<double> g;
  for (int k = 0; k <= 16; ++k) g.push_back(4.0 + 0.5 * k);
  return g;
}();

OrbitTable table_of(const MetricModel& model, const Params& p, double needed, const RiccatiConfig& cfg) {
  const double max_length = p.number("max-length", needed);
  OrbitTable table = build_orbit_table(model, max_length, cfg);
  if (p.has("singular-profile"))
    add_synthetic_component(table, load_model(p.text("singular-profile")), cfg);
  return table;
}

void write_estimates(const Context& c, const std::vector<PressureEstimate>& estimates) {
  Table table{{"method", "value", "raw", "slope", "fit_residual", "t_min", "t_max", "scale"}, {}};
  for (const auto& e : estimates)
    table.add({method_name(e.method), e.value, e.raw, e.slope, e.fit_residual, e.t_min, e.t_max, e.scale});
  write_table(table, c.format, c.out);
}

void note_estimate(const Context& c, const PressureEstimate& e) {
  c.err << method_name(e.method) << "=" << format_number(e.value);
  if (e.method != PressureMethod::separated) c.err << " raw=" << format_number(e.raw);
  c.err << " slope=" << format_number(e.slope) << " residual=" << format_number(e.fit_residual)
        << " window=[" << format_number(e.t_min) << ", " << format_number(e.t_max) << "]\n";
}

int cmd_pressure_gurevich(const Context& c) {
  const MetricModel model = model_of(c.p);
  const RiccatiConfig cfg = riccati_config(c.p);
  const auto tg = c.p.grid("t-grid", kDefaultTGrid);
  const double Delta = positive(c.p.number("Delta", 1.0), "--Delta");
  const Potential phi = potentials_of(c.p, "potential", "zero").front();
  OrbitTable table = table_of(model, c.p, tg.back(), cfg);
  const auto g = gurevich_pressure(table, phi, Delta, tg, cfg);
  if (c.p.flag("estimates")) {
    write_estimates(c, {g.upper, g.lower});
    return 0;
  }
  Table out{{"t", "count", "log_sum", "log_sum_over_t", "corrected"}, {}};
  for (const auto& r : g.rows) out.add({r.t, r.count, r.log_sum, r.log_sum_over_t, r.corrected});
  write_table(out, c.format, c.out);
  note_estimate(c, g.upper);
  note_estimate(c, g.lower);
  return 0;
}

int cmd_pressure_scan(const Context& c) {
  const MetricModel model = model_of(c.p);
  const RiccatiConfig cfg = riccati_config(c.p);
  const auto tg = c.p.grid("t-grid", kDefaultTGrid);
  const auto qs = c.p.grid("q-grid", {-1.0, 0.0, 0.5, 1.0});
  const double Delta = positive(c.p.number("Delta", 1.0), "--Delta");
  OrbitTable table = table_of(model, c.p, tg.back(), cfg);
  Table out{{"q", "raw", "clamped", "residual", "t_min", "t_max", "lower"}, {}};
  for (const auto& s : pressure_scan(table, qs, Delta, tg, cfg))
    out.add({s.q, s.raw, s.clamped, s.estimate.upper.fit_residual, s.estimate.upper.t_min,
             s.estimate.upper.t_max, s.estimate.lower.value});
  write_table(out, c.format, c.out);
  return 0;
}

int cmd_pressure_separated(const Context& c) {
  const MetricModel model = model_of(c.p);
  const RiccatiConfig cfg = riccati_config(c.p);
  SeparatedOptions opt;
  opt.delta = positive(c.p.number("delta", opt.delta), "--delta");
  opt.n_candidates = static_cast<std::size_t>(c.p.integer("candidates", static_cast<long>(opt.n_candidates)));
  opt.n_arcs = static_cast<std::size_t>(c.p.integer("arcs", static_cast<long>(opt.n_arcs)));
  opt.arc_length = positive(c.p.number("arc-length", opt.arc_length), "--arc-length");
  opt.seed = static_cast<std::uint64_t>(c.p.integer("seed", static_cast<long>(opt.seed)));
  opt.grid = positive(c.p.number("grid", opt.grid), "--grid");
  const auto tg = c.p.grid("t-grid", {4.0, 5.0, 6.0, 7.0, 8.0});
  const Potential phi = potentials_of(c.p, "potential", "zero").front();
  std::vector<SeparatedRow> rows;
  const auto e = pressure_separated(model, phi, tg, opt, cfg, &rows);
  if (c.p.flag("estimates")) {
    write_estimates(c, {e});
    return 0;
  }
  Table out{{"t", "atoms", "log_lambda"}, {}};
  for (const auto& r : rows) out.add({r.t, r.atoms, r.log_lambda});
  write_table(out, c.format, c.out);
  note_estimate(c, e);
  return 0;
}

int cmd_measure_integrate(const Context& c) {
  const MetricModel model = model_of(c.p);
  const RiccatiConfig cfg = riccati_config(c.p);
  const double t = positive(c.p.number("t", 10.0), "--t");
  const double Delta = positive(c.p.number("Delta", 1.0), "--Delta");
  const double step = positive(c.p.number("step", 1e-2), "--step");
  const Potential phi = potentials_of(c.p, "potential", "zero").front();
  const auto psis = potentials_of(c.p, "psi", "constant:1");
  OrbitTable table = table_of(model, c.p, t, cfg);
  const auto m = weighted_orbit_measure(table, phi, t, Delta, cfg);

  Table out{{"word", "length", "weight"}, {}};
  for (const auto& psi : psis) out.columns.push_back("psi:" + psi.id);
  std::vector<double> totals(psis.size(), 0.0);
  for (const auto& a : m.atoms) {
    const auto& comp = table.components[a.component];
    const auto& o = comp.orbits[a.index];
    std::vector<json> row{o.word.str(), o.length, a.weight};
    for (std::size_t k = 0; k < psis.size(); ++k) {
      const auto& psi = psis[k];
      const double avg = orbit_average(
          comp.model, o, [&](const UnitTangent& v) { return psi.at(comp.model, v, cfg); }, step);
      totals[k] += a.weight * avg;
      row.push_back(avg);
    }
    out.add(std::move(row));
  }
  write_table(out, c.format, c.out);
  const long mc = c.p.integer("liouville", 0);
  const auto seed = static_cast<std::uint64_t>(c.p.integer("seed", 1));
  for (std::size_t k = 0; k < psis.size(); ++k) {
    c.err << "integral[" << psis[k].id << "]=" << format_number(totals[k]);
    if (mc > 0) {
      const auto& psi = psis[k];
      const double ref = liouville_average(
          model, [&](const UnitTangent& v) { return psi.at(model, v, cfg); }, static_cast<std::size_t>(mc), seed);
      c.err << " liouville=" << format_number(ref);
    }
    c.err << "\n";
  }
  return 0;
}

}  // namespace

namespace {

using Handler = int (*)(const Context&);

struct Leaf {
  CLI::App* app;
  Handler run;
};

Leaf leaf(CLI::App* parent, const std::string& name, const std::string& about,
          std::initializer_list<std::pair<const char*, const char*>> options,
          std::initializer_list<std::pair<const char*, const char*>> flags, Handler run) {
  CLI::App* app = parent->add_subcommand(name, about);
  app->add_option("--model", "model file (JSON)");
  app->add_option("--config", "JSON file of parameters; flags override it");
  app->add_option("--output", "output path (default stdout)");
  app->add_option("--format", "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app->add_option("--T-conv", "Riccati convergence horizon");
  app->add_option("--riccati-tol", "Riccati seed agreement tolerance");
  app->add_option("--riccati-h", "Riccati step");
  for (const auto& [n, d] : options) app->add_option(std::string("--") + n, d);
  for (const auto& [n, d] : flags) app->add_flag(std::string("--") + n, d);
  return {app, run};
}

std::vector<Leaf> build(CLI::App& app) {
  app.require_subcommand(1);
  std::vector<Leaf> leaves;
  CLI::App* model = app.add_subcommand("model", "model files");
  model->require_subcommand(1);
  leaves.push_back(leaf(model, "validate", "check a model file and report its curvature", {}, {}, cmd_model_validate));

  const std::initializer_list<std::pair<const char*, const char*>> start = {
      {"start", "start vector as JSON"}, {"x", "footpoint x"}, {"y", "footpoint y"},
      {"angle", "direction"}, {"time", "orbit time (synthetic models)"}};
  std::vector<std::pair<const char*, const char*>> flow_opts(start);
  flow_opts.insert(flow_opts.end(), {{"t", "flow time"}, {"dt", "RK4 step"}, {"sample-step", "output spacing"}});
  {
    Leaf l = leaf(&app, "flow", "integrate the geodesic flow", {},
                  {{"curvatures", "add k^u and k^s columns"}, {"reversed", "time-reversed synthetic start"}}, cmd_flow);
    for (const auto& [n, d] : flow_opts) l.app->add_option(std::string("--") + n, d);
    leaves.push_back(l);
  }
  {
    Leaf l = leaf(&app, "decompose", "bad/good/bad split of an orbit segment",
                  {{"t", "segment length"}, {"T", "lambda_T window"}, {"eta", "threshold"}, {"grid", "decomposition grid"}},
                  {{"safety-margin", "strict good inequalities"}, {"reversed", "time-reversed synthetic start"}}, cmd_decompose);
    for (const auto& [n, d] : start) l.app->add_option(std::string("--") + n, d);
    leaves.push_back(l);
  }

  CLI::App* orbits = app.add_subcommand("orbits", "closed geodesics");
  orbits->require_subcommand(1);
  leaves.push_back(leaf(orbits, "enumerate", "orbit table with lengths, regularity and potentials",
                        {{"max-length", "length bound"}, {"max-word-len", "word length bound"},
                         {"max-classes", "class budget"}, {"potentials", "potentials separated by ';'"},
                         {"node-spacing", "refinement node spacing"}},
                        {}, cmd_orbits));

  CLI::App* pressure = app.add_subcommand("pressure", "pressure estimates");
  pressure->require_subcommand(1);
  const std::initializer_list<std::pair<const char*, const char*>> table_opts = {
      {"max-length", "orbit table length"}, {"singular-profile", "synthetic model added as a singular component"},
      {"t-grid", "window ends: a,b,c or start:stop:step"}, {"Delta", "window width"}};
  {
    Leaf l = leaf(pressure, "gurevich", "Gurevich sums and upper/lower estimates", table_opts,
                  {{"estimates", "print the estimates instead of the windows"}}, cmd_pressure_gurevich);
    l.app->add_option("--potential", "potential");
    leaves.push_back(l);
  }
  {
    Leaf l = leaf(pressure, "scan", "q -> P(q phi^u)", table_opts, {}, cmd_pressure_scan);
    l.app->add_option("--q-grid", "q values");
    leaves.push_back(l);
  }
  leaves.push_back(leaf(pressure, "separated", "pressure from (t, delta)-separated sets",
                        {{"potential", "potential"}, {"delta", "separation scale"}, {"t-grid", "times"},
                         {"candidates", "candidate count"}, {"arcs", "unstable arcs"},
                         {"arc-length", "arc length"}, {"seed", "seed"}, {"grid", "time grid of the distance"}},
                        {{"estimates", "print the estimate instead of the rows"}}, cmd_pressure_separated));

  CLI::App* measure = app.add_subcommand("measure", "periodic-orbit measures");
  measure->require_subcommand(1);
  leaves.push_back(leaf(measure, "integrate", "weighted periodic-orbit measure of test functions",
                        {{"potential", "weighting potential"}, {"psi", "test functions separated by ';'"},
                         {"t", "window end"}, {"Delta", "window width"}, {"max-length", "orbit table length"},
                         {"singular-profile", "synthetic model added as a singular component"},
                         {"step", "loop sampling step"}, {"liouville", "Monte Carlo samples for comparison"},
                         {"seed", "Monte Carlo seed"}},
                        {}, cmd_measure_integrate));
  return leaves;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Geodesic flow and pressure toolkit for nonpositively curved surfaces", "geoflow"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  const auto leaves = build(app);
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      for (const auto& l : leaves)
        if (l.app->parsed()) {
          out << l.app->help();
          return 0;
        }
      out << app.help();
      return 0;
    }
    err << "error: " << e.what() << "\n";
    return exit_code_for(ErrorCode::InvalidArgument);
  }
  try {
    for (const auto& l : leaves) {
      if (!l.app->parsed()) continue;
      json config = json::object();
      if (const auto* opt = l.app->get_option_no_throw("--config"); opt && opt->count() > 0) {
        config = read_json_file(opt->as<std::string>());
        if (!config.is_object()) throw Error(ErrorCode::Schema, "config file must hold a JSON object");
      }
      const Params params(l.app, config);
      const std::string format = params.text("format", "csv");
      if (format != "csv" && format != "json") throw Error(ErrorCode::InvalidArgument, "--format must be csv or json");
      const std::string path = params.text("output", "-");
      if (path == "-") return l.run({params, out, err, format});
      std::ofstream file(path);
      if (!file) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
      return l.run({params, file, err, format});
    }
    err << app.help();
    return exit_code_for(ErrorCode::InvalidArgument);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace geoflow
