#include "crowdsim/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "crowdsim/errors.hpp"

namespace crowdsim {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>, std::less<>> kSchema = {
    {"domain", {"length", "width", "boundary_x", "obstacles"}},
    {"grid", {"nx", "ny", "samples_per_cell"}},
    {"kernels", {"F_opp", "F_own", "F_w", "R_r_opp", "R_r_own", "R_a_own", "R_w", "sigma", "max_radius_fraction"}},
    {"velocity",
     {"v_des_1", "v_des_2", "counterflow", "variant", "dt_pred", "dt_max", "weight_fn", "weight_rate",
      "quadrature_nodes", "fp_tol", "fp_max_iter", "speed_cap"}},
    {"step", {"dt", "cfl", "t_end", "macro_substeps"}},
    {"pop1", {"count", "theta", "placement", "region", "positions", "macro", "macro_mass", "macro_region",
              "macro_center", "macro_spread"}},
    {"pop2", {"count", "theta", "placement", "region", "positions", "macro", "macro_mass", "macro_region",
              "macro_center", "macro_spread"}},
    {"output", {"frame_interval", "lane_gap", "cluster_link", "snapshot_times"}},
};

std::vector<double> numbers_in(const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string token;
  while (in >> token) {
    std::size_t used = 0;
    out.push_back(std::stod(token, &used));
    if (used != token.size()) throw std::invalid_argument(token);
  }
  return out;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) {
    if (item.find_first_not_of(" \t") != std::string::npos) out.push_back(item);
  }
  return out;
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {
    for (const auto& [section, body] : tree_) {
      const auto it = kSchema.find(section);
      if (body.data().size() > 0 && body.empty()) {
        errors.push_back(fmt::format("unknown top-level key '{}'", section));
        continue;
      }
      if (it == kSchema.end()) {
        errors.push_back(fmt::format("unknown section [{}]", section));
        continue;
      }
      for (const auto& [key, value] : body) {
        if (!it->second.contains(key)) errors.push_back(fmt::format("{}: unknown key '{}'", section, key));
      }
    }
  }

  bool has_section(const std::string& section) const { return tree_.get_child_optional(section).has_value(); }

  std::optional<std::string> raw(const std::string& section, const std::string& key) const {
    const auto node = tree_.get_child_optional(pt::ptree::path_type(section + "." + key, '.'));
    if (!node) return std::nullopt;
    return node->data();
  }

  template <typename T>
  void read(const std::string& section, const std::string& key, T& target) {
    const auto text = raw(section, key);
    if (!text) return;
    try {
      if constexpr (std::is_same_v<T, double>) {
        const auto v = numbers_in(*text);
        if (v.size() != 1) throw std::invalid_argument(*text);
        target = v[0];
      } else if constexpr (std::is_same_v<T, std::size_t>) {
        std::size_t used = 0;
        const long long v = std::stoll(*text, &used);
        if (used != trimmed(*text).size() || v < 0) throw std::invalid_argument(*text);
        target = static_cast<std::size_t>(v);
      } else if constexpr (std::is_same_v<T, bool>) {
        if (trimmed(*text) == "true") target = true;
        else if (trimmed(*text) == "false") target = false;
        else throw std::invalid_argument(*text);
      } else if constexpr (std::is_same_v<T, Vec2>) {
        const auto v = numbers_in(*text);
        if (v.size() != 2) throw std::invalid_argument(*text);
        target = {v[0], v[1]};
      } else if constexpr (std::is_same_v<T, Rect>) {
        const auto v = numbers_in(*text);
        if (v.size() != 4) throw std::invalid_argument(*text);
        target = {v[0], v[1], v[2], v[3]};
      } else if constexpr (std::is_same_v<T, std::string>) {
        target = trimmed(*text);
      }
    } catch (const std::exception&) {
      errors.push_back(fmt::format("{}: cannot parse {} = '{}'", section, key, *text));
    }
  }

  /// Reads "auto" (or another keyword) as nullopt, anything else as a number.
  void read_optional(const std::string& section, const std::string& key, std::optional<double>& target,
                     std::string_view keyword = "auto") {
    const auto text = raw(section, key);
    if (!text) return;
    if (trimmed(*text) == keyword) {
      target.reset();
      return;
    }
    double v = 0.0;
    read(section, key, v);
    target = v;
  }

  static std::string trimmed(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
  }

  std::vector<std::string> errors;

 private:
  const pt::ptree& tree_;
};

std::optional<Variant> variant_from(std::string_view s) {
  if (s == "explicit") return Variant::explicit_;
  if (s == "actual_angle") return Variant::actual_angle;
  if (s == "predict_fixed") return Variant::predict_fixed;
  if (s == "predict_interval") return Variant::predict_interval;
  if (s == "predict_weighted") return Variant::predict_weighted;
  return std::nullopt;
}

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::explicit_: return "explicit";
    case Variant::actual_angle: return "actual_angle";
    case Variant::predict_fixed: return "predict_fixed";
    case Variant::predict_interval: return "predict_interval";
    case Variant::predict_weighted: return "predict_weighted";
  }
  return "explicit";
}

std::string_view weight_name(WeightFunction::Kind k) {
  switch (k) {
    case WeightFunction::Kind::constant: return "constant";
    case WeightFunction::Kind::linear_decay: return "linear_decay";
    case WeightFunction::Kind::exponential_decay: return "exponential_decay";
  }
  return "constant";
}

std::string_view placement_name(Placement p) {
  switch (p) {
    case Placement::uniform_random: return "uniform_random";
    case Placement::grid: return "grid";
    case Placement::explicit_list: return "explicit";
  }
  return "uniform_random";
}

std::string_view macro_name(MacroInit::Kind k) {
  switch (k) {
    case MacroInit::Kind::none: return "none";
    case MacroInit::Kind::constant: return "constant";
    case MacroInit::Kind::gaussian: return "gaussian";
  }
  return "none";
}

void read_obstacles(Reader& r, Domain& domain) {
  const auto text = r.raw("domain", "obstacles");
  if (!text) return;
  for (const auto& item : split(*text, ',')) {
    std::istringstream in(item);
    std::string kind;
    in >> kind;
    std::string rest;
    std::getline(in, rest);
    try {
      const auto v = numbers_in(rest);
      if (kind == "rect" && v.size() == 4) {
        domain.obstacles.emplace_back(Rect{v[0], v[1], v[2], v[3]});
      } else if (kind == "disc" && v.size() == 3) {
        domain.obstacles.emplace_back(Disc{{v[0], v[1]}, v[2]});
      } else {
        throw std::invalid_argument(item);
      }
    } catch (const std::exception&) {
      r.errors.push_back(fmt::format("domain: cannot parse obstacle '{}' (use 'rect x0 y0 x1 y1' or 'disc cx cy r')",
                                     Reader::trimmed(item)));
    }
  }
}

void read_population(Reader& r, const std::string& section, PopulationSpec& pop) {
  r.read(section, "count", pop.count);
  r.read_optional(section, "theta", pop.theta);
  if (const auto p = r.raw(section, "placement")) {
    const auto name = Reader::trimmed(*p);
    if (name == "uniform_random") pop.placement = Placement::uniform_random;
    else if (name == "grid") pop.placement = Placement::grid;
    else if (name == "explicit") pop.placement = Placement::explicit_list;
    else r.errors.push_back(fmt::format("{}: placement must be uniform_random, grid or explicit", section));
  }
  if (r.raw(section, "region")) {
    Rect region;
    r.read(section, "region", region);
    pop.region = region;
  }
  if (const auto text = r.raw(section, "positions")) {
    for (const auto& item : split(*text, ',')) {
      try {
        const auto v = numbers_in(item);
        if (v.size() != 2) throw std::invalid_argument(item);
        pop.positions.push_back({v[0], v[1]});
      } catch (const std::exception&) {
        r.errors.push_back(fmt::format("{}: cannot parse position '{}'", section, Reader::trimmed(item)));
      }
    }
  }
  if (const auto m = r.raw(section, "macro")) {
    const auto name = Reader::trimmed(*m);
    if (name == "none") pop.macro.kind = MacroInit::Kind::none;
    else if (name == "constant") pop.macro.kind = MacroInit::Kind::constant;
    else if (name == "gaussian") pop.macro.kind = MacroInit::Kind::gaussian;
    else r.errors.push_back(fmt::format("{}: macro must be none, constant or gaussian", section));
  }
  r.read(section, "macro_mass", pop.macro.mass);
  if (r.raw(section, "macro_region")) {
    Rect box;
    r.read(section, "macro_region", box);
    pop.macro.region = {box.x0, box.y0, box.x1, box.y1};
  }
  r.read(section, "macro_center", pop.macro.center);
  r.read(section, "macro_spread", pop.macro.spread);
}

void validate(const ScenarioConfig& c, std::vector<std::string>& errors) {
  try {
    c.domain.validate();
  } catch (const ValidationError& e) {
    errors.insert(errors.end(), e.problems().begin(), e.problems().end());
  }
  if (c.nx == 0 || c.ny == 0 || c.samples_per_cell == 0) {
    errors.emplace_back("grid: nx, ny and samples_per_cell must be >= 1");
  } else if (c.domain.length > 0.0 && c.domain.width > 0.0) {
    try {
      (void)build_porosity_grid(c.domain, c.nx, c.ny, c.samples_per_cell);
    } catch (const ValidationError& e) {
      errors.insert(errors.end(), e.problems().begin(), e.problems().end());
    }
  }
  const auto kernel_problems = c.velocity.kernels.check(c.domain.length, c.max_radius_fraction);
  errors.insert(errors.end(), kernel_problems.begin(), kernel_problems.end());

  const auto& v = c.velocity;
  if (c.counterflow && !(v.v_des[0] == -v.v_des[1])) {
    errors.emplace_back("velocity: counterflow requires v_des_1 = -v_des_2");
  }
  if (!(v.fp_tol > 0.0)) errors.emplace_back("velocity: fp_tol must be > 0");
  if (v.fp_max_iter == 0) errors.emplace_back("velocity: fp_max_iter must be >= 1");
  if (v.quadrature_nodes == 0) errors.emplace_back("velocity: quadrature_nodes must be >= 1");
  if (!(v.dt_pred >= 0.0)) errors.emplace_back("velocity: dt_pred must be >= 0");
  if ((v.variant == Variant::predict_interval || v.variant == Variant::predict_weighted) && !(v.dt_max > 0.0)) {
    errors.emplace_back("velocity: dt_max must be > 0 for interval prediction");
  }
  if (!(v.weight_fn.rate >= 0.0)) errors.emplace_back("velocity: weight_rate must be >= 0");
  if (!(v.speed_cap > 0.0)) errors.emplace_back("velocity: speed_cap must be > 0");

  try {
    c.step.validate();
  } catch (const ValidationError& e) {
    errors.insert(errors.end(), e.problems().begin(), e.problems().end());
  }

  for (std::size_t i = 0; i < 2; ++i) {
    const auto& p = c.pops[i];
    const auto name = fmt::format("pop{}", i + 1);
    if (p.theta && !(*p.theta >= 0.0 && *p.theta <= 1.0)) errors.push_back(name + ": theta must lie in [0,1]");
    if (p.placement == Placement::explicit_list) {
      if (p.positions.size() != p.count) {
        errors.push_back(fmt::format("{}: {} explicit positions given for count {}", name, p.positions.size(), p.count));
      }
      for (const auto& q : p.positions) {
        if (!c.domain.walkable(q)) errors.push_back(fmt::format("{}: position ({}, {}) is not walkable", name, q.x, q.y));
      }
    }
    if (p.region) {
      const auto& r = *p.region;
      if (!(r.x0 < r.x1 && r.y0 < r.y1 && r.x0 >= 0.0 && r.y0 >= 0.0 && r.x1 <= c.domain.length &&
            r.y1 <= c.domain.width)) {
        errors.push_back(name + ": region must be a non-empty box inside the corridor");
      }
    }
    if (!(p.macro.mass >= 0.0)) errors.push_back(name + ": macro_mass must be >= 0");
    if (p.macro.kind == MacroInit::Kind::gaussian && !(p.macro.spread > 0.0)) {
      errors.push_back(name + ": macro_spread must be > 0");
    }
  }
  if (!(c.output.frame_interval > 0.0)) errors.emplace_back("output: frame_interval must be > 0");
  if (!(c.output.lane_gap > 0.0)) errors.emplace_back("output: lane_gap must be > 0");
  if (c.output.cluster_link && !(*c.output.cluster_link > 0.0)) errors.emplace_back("output: cluster_link must be > 0");
}

}  // namespace

ScenarioConfig parse_config(std::string_view text) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ValidationError(fmt::format("config: {} (line {})", e.message(), e.line()));
  }
  Reader r(tree);
  ScenarioConfig c;

  r.read("domain", "length", c.domain.length);
  r.read("domain", "width", c.domain.width);
  if (const auto b = r.raw("domain", "boundary_x")) {
    const auto name = Reader::trimmed(*b);
    if (name == "periodic") c.domain.boundary_x = BoundaryX::periodic;
    else if (name == "open") c.domain.boundary_x = BoundaryX::open;
    else r.errors.emplace_back("domain: boundary_x must be periodic or open");
  }
  read_obstacles(r, c.domain);

  r.read("grid", "nx", c.nx);
  r.read("grid", "ny", c.ny);
  r.read("grid", "samples_per_cell", c.samples_per_cell);

  auto& k = c.velocity.kernels;
  r.read("kernels", "F_opp", k.F_opp);
  r.read("kernels", "F_own", k.F_own);
  r.read("kernels", "F_w", k.F_w);
  r.read("kernels", "R_r_opp", k.R_r_opp);
  r.read("kernels", "R_r_own", k.R_r_own);
  r.read("kernels", "R_a_own", k.R_a_own);
  r.read("kernels", "R_w", k.R_w);
  r.read("kernels", "sigma", k.sigma);
  r.read("kernels", "max_radius_fraction", c.max_radius_fraction);

  auto& v = c.velocity;
  r.read("velocity", "v_des_1", v.v_des[0]);
  r.read("velocity", "v_des_2", v.v_des[1]);
  r.read("velocity", "counterflow", c.counterflow);
  if (const auto s = r.raw("velocity", "variant")) {
    if (const auto parsed = variant_from(Reader::trimmed(*s))) v.variant = *parsed;
    else r.errors.emplace_back("velocity: variant must be explicit, actual_angle, predict_fixed, predict_interval or predict_weighted");
  }
  r.read("velocity", "dt_pred", v.dt_pred);
  r.read("velocity", "dt_max", v.dt_max);
  if (const auto s = r.raw("velocity", "weight_fn")) {
    const auto name = Reader::trimmed(*s);
    if (name == "constant") v.weight_fn.kind = WeightFunction::Kind::constant;
    else if (name == "linear_decay") v.weight_fn.kind = WeightFunction::Kind::linear_decay;
    else if (name == "exponential_decay") v.weight_fn.kind = WeightFunction::Kind::exponential_decay;
    else r.errors.emplace_back("velocity: weight_fn must be constant, linear_decay or exponential_decay");
  }
  r.read("velocity", "weight_rate", v.weight_fn.rate);
  r.read("velocity", "quadrature_nodes", v.quadrature_nodes);
  r.read("velocity", "fp_tol", v.fp_tol);
  r.read("velocity", "fp_max_iter", v.fp_max_iter);
  std::optional<double> cap;
  bool cap_auto = true;
  if (const auto s = r.raw("velocity", "speed_cap")) {
    const auto name = Reader::trimmed(*s);
    if (name == "none") {
      cap_auto = false;
      v.speed_cap = std::numeric_limits<double>::infinity();
    } else if (name != "auto") {
      cap_auto = false;
      r.read_optional("velocity", "speed_cap", cap);
      if (cap) v.speed_cap = *cap;
    }
  }
  if (cap_auto) {
    const double vmax = std::max(norm(v.v_des[0]), norm(v.v_des[1]));
    v.speed_cap = vmax > 0.0 ? 2.0 * vmax : std::numeric_limits<double>::infinity();
  }

  r.read("step", "dt", c.step.dt);
  r.read("step", "cfl", c.step.cfl);
  r.read("step", "t_end", c.step.t_end);
  if (const auto s = r.raw("step", "macro_substeps"); s && Reader::trimmed(*s) != "auto") {
    std::size_t n = 0;
    r.read("step", "macro_substeps", n);
    c.step.macro_substeps = n;
  }

  if (r.has_section("pop1")) read_population(r, "pop1", c.pops[0]);
  if (r.has_section("pop2")) read_population(r, "pop2", c.pops[1]);

  r.read("output", "frame_interval", c.output.frame_interval);
  r.read("output", "lane_gap", c.output.lane_gap);
  r.read_optional("output", "cluster_link", c.output.cluster_link);
  if (const auto s = r.raw("output", "snapshot_times")) {
    try {
      c.output.snapshot_times = numbers_in(*s);
    } catch (const std::exception&) {
      r.errors.emplace_back("output: cannot parse snapshot_times");
    }
  }

  validate(c, r.errors);
  if (!r.errors.empty()) throw ValidationError(std::move(r.errors));
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(fmt::format("cannot open config file '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string serialize_config(const ScenarioConfig& c) {
  auto num = [](double x) {
    if (std::isinf(x)) return std::string("none");
    return fmt::format("{}", x);
  };
  auto vec = [&](Vec2 p) { return num(p.x) + " " + num(p.y); };
  auto box = [&](double x0, double y0, double x1, double y1) {
    return fmt::format("{} {} {} {}", num(x0), num(y0), num(x1), num(y1));
  };
  std::string out;
  auto line = [&](std::string_view key, const std::string& value) { out += fmt::format("{} = {}\n", key, value); };

  out += "[domain]\n";
  line("length", num(c.domain.length));
  line("width", num(c.domain.width));
  line("boundary_x", c.domain.boundary_x == BoundaryX::periodic ? "periodic" : "open");
  if (!c.domain.obstacles.empty()) {
    std::vector<std::string> items;
    for (const auto& o : c.domain.obstacles) {
      if (const auto* r = std::get_if<Rect>(&o)) items.push_back("rect " + box(r->x0, r->y0, r->x1, r->y1));
      else {
        const auto& d = std::get<Disc>(o);
        items.push_back("disc " + vec(d.center) + " " + num(d.radius));
      }
    }
    line("obstacles", fmt::format("{}", fmt::join(items, ", ")));
  }

  out += "\n[grid]\n";
  line("nx", std::to_string(c.nx));
  line("ny", std::to_string(c.ny));
  line("samples_per_cell", std::to_string(c.samples_per_cell));

  const auto& k = c.velocity.kernels;
  out += "\n[kernels]\n";
  line("F_opp", num(k.F_opp));
  line("F_own", num(k.F_own));
  line("F_w", num(k.F_w));
  line("R_r_opp", num(k.R_r_opp));
  line("R_r_own", num(k.R_r_own));
  line("R_a_own", num(k.R_a_own));
  line("R_w", num(k.R_w));
  line("sigma", num(k.sigma));
  line("max_radius_fraction", num(c.max_radius_fraction));

  const auto& v = c.velocity;
  out += "\n[velocity]\n";
  line("v_des_1", vec(v.v_des[0]));
  line("v_des_2", vec(v.v_des[1]));
  line("counterflow", c.counterflow ? "true" : "false");
  line("variant", std::string(variant_name(v.variant)));
  line("dt_pred", num(v.dt_pred));
  line("dt_max", num(v.dt_max));
  line("weight_fn", std::string(weight_name(v.weight_fn.kind)));
  line("weight_rate", num(v.weight_fn.rate));
  line("quadrature_nodes", std::to_string(v.quadrature_nodes));
  line("fp_tol", num(v.fp_tol));
  line("fp_max_iter", std::to_string(v.fp_max_iter));
  line("speed_cap", num(v.speed_cap));

  out += "\n[step]\n";
  line("dt", num(c.step.dt));
  line("cfl", num(c.step.cfl));
  line("t_end", num(c.step.t_end));
  line("macro_substeps", c.step.macro_substeps ? std::to_string(*c.step.macro_substeps) : "auto");

  for (std::size_t i = 0; i < 2; ++i) {
    const auto& p = c.pops[i];
    out += fmt::format("\n[pop{}]\n", i + 1);
    line("count", std::to_string(p.count));
    line("theta", p.theta ? num(*p.theta) : "auto");
    line("placement", std::string(placement_name(p.placement)));
    if (p.region) line("region", box(p.region->x0, p.region->y0, p.region->x1, p.region->y1));
    if (!p.positions.empty()) {
      std::vector<std::string> items;
      for (const auto& q : p.positions) items.push_back(vec(q));
      line("positions", fmt::format("{}", fmt::join(items, ", ")));
    }
    line("macro", std::string(macro_name(p.macro.kind)));
    line("macro_mass", num(p.macro.mass));
    line("macro_region", box(p.macro.region.x0, p.macro.region.y0, p.macro.region.x1, p.macro.region.y1));
    line("macro_center", vec(p.macro.center));
    line("macro_spread", num(p.macro.spread));
  }

  out += "\n[output]\n";
  line("frame_interval", num(c.output.frame_interval));
  line("lane_gap", num(c.output.lane_gap));
  line("cluster_link", c.output.cluster_link ? num(*c.output.cluster_link) : "auto");
  std::vector<std::string> snaps;
  for (double t : c.output.snapshot_times) snaps.push_back(num(t));
  line("snapshot_times", fmt::format("{}", fmt::join(snaps, " ")));
  return out;
}

}  // namespace crowdsim
