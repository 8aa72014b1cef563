#include "flownet/scenario_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

namespace flownet {

ParseError::ParseError(const std::string& source, int line, const std::string& message)
    : Error(Errc::parse_error, fmt::format("{}:{}: {}", source, line, message)), source_(source), line_(line) {}

namespace {

int line_of(const YAML::Node& node) { return std::max(1, node.Mark().line + 1); }

/// Reads typed values out of one document, anchoring errors to its lines.
class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& message) const {
    throw ParseError(source_, line_of(node), message);
  }

  void expect_map(const YAML::Node& node, std::string_view what) const {
    if (!node.IsMap()) fail(node, fmt::format("'{}' must be a mapping", what));
  }

  void expect_sequence(const YAML::Node& node, std::string_view what) const {
    if (!node.IsSequence()) fail(node, fmt::format("'{}' must be a list", what));
  }

  void check_keys(const YAML::Node& map, std::string_view what, const std::vector<std::string_view>& allowed) const {
    expect_map(map, what);
    for (const auto& entry : map) {
      const std::string key = entry.first.Scalar();
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        fail(entry.first, fmt::format("unknown key '{}' in {}", key, what));
      }
    }
  }

  template <class T>
  T scalar(const YAML::Node& node, std::string_view what) const {
    if (!node.IsScalar()) fail(node, fmt::format("'{}' must be a scalar", what));
    try {
      return node.as<T>();
    } catch (const YAML::BadConversion&) {
      fail(node, fmt::format("invalid value '{}' for '{}'", node.Scalar(), what));
    }
  }

  double real(const YAML::Node& node, std::string_view what) const {
    const double value = scalar<double>(node, what);
    if (!std::isfinite(value)) fail(node, fmt::format("'{}' must be finite", what));
    return value;
  }

  double positive(const YAML::Node& node, std::string_view what) const {
    const double value = real(node, what);
    if (!(value > 0.0)) fail(node, fmt::format("'{}' must be positive", what));
    return value;
  }

  double nonnegative(const YAML::Node& node, std::string_view what) const {
    const double value = real(node, what);
    if (!(value >= 0.0)) fail(node, fmt::format("'{}' must be nonnegative", what));
    return value;
  }

  /// Scalar broadcast to `count` entries, or a list of exactly `count`.
  std::vector<double> per_link(const YAML::Node& node, std::string_view what, std::size_t count,
                               bool strictly_positive) const {
    auto read = [&](const YAML::Node& n) { return strictly_positive ? positive(n, what) : nonnegative(n, what); };
    if (node.IsScalar()) return std::vector<double>(count, read(node));
    expect_sequence(node, what);
    if (node.size() != count) fail(node, fmt::format("'{}' needs {} entries, got {}", what, count, node.size()));
    std::vector<double> values;
    for (const auto& item : node) values.push_back(read(item));
    return values;
  }

 private:
  std::string source_;
};

SpeedMode parse_mode(const Reader& r, const YAML::Node& node) {
  const auto text = r.scalar<std::string>(node, "mode");
  if (text == "max") return SpeedMode::max;
  if (text == "constant") return SpeedMode::constant;
  if (text == "feedback") return SpeedMode::feedback;
  if (text == "allocated") return SpeedMode::allocated;
  r.fail(node, fmt::format("unknown speed-limit mode '{}' (max, constant, feedback, allocated)", text));
}

YAML::Node load_document(const std::string& text, const std::string& source) {
  try {
    YAML::Node root = YAML::Load(text);
    if (!root.IsMap()) throw ParseError(source, line_of(root), "document must be a mapping");
    return root;
  } catch (const YAML::ParserException& e) {
    throw ParseError(source, e.mark.line + 1, e.msg);
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::parse_error, fmt::format("cannot open '{}'", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

const std::vector<std::string_view> kTopLevelKeys = {
    "name", "nodes", "links", "diagram", "inflows", "routing", "speed_limits", "initial_density", "simulation",
    "allocation"};

/// `sources` names the file each top-level key came from.
ScenarioSpec convert(const YAML::Node& root, const std::map<std::string, std::string>& sources,
                     const Defaults& defaults) {
  auto reader_for = [&](const std::string& key) {
    const auto it = sources.find(key);
    return Reader(it == sources.end() ? std::string("<scenario>") : it->second);
  };
  const Reader top = reader_for("nodes");
  top.check_keys(root, "scenario", kTopLevelKeys);

  ScenarioSpec spec;
  spec.free_flow_speed = defaults.free_flow_speed;
  spec.jam_density = defaults.jam_density;
  spec.routing = defaults.routing;
  spec.dt = defaults.dt;
  spec.horizon = defaults.horizon;
  spec.stride = defaults.stride;
  spec.epsilon = defaults.epsilon;

  if (const auto node = root["name"]) spec.name = reader_for("name").scalar<std::string>(node, "name");

  {
    const auto node = root["nodes"];
    if (!node) top.fail(root, "missing required key 'nodes'");
    top.expect_sequence(node, "nodes");
    std::set<std::int64_t> seen;
    for (const auto& item : node) {
      const auto id = top.scalar<std::int64_t>(item, "node id");
      if (!seen.insert(id).second) top.fail(item, fmt::format("node {} listed twice", id));
      spec.nodes.push_back(id);
    }
  }

  {
    const Reader r = reader_for("links");
    const auto node = root["links"];
    if (!node) top.fail(root, "missing required key 'links'");
    r.expect_sequence(node, "links");
    for (const auto& item : node) {
      r.check_keys(item, "link", {"tail", "head", "lanes", "max_speed"});
      if (!item["tail"] || !item["head"]) r.fail(item, "link needs 'tail' and 'head'");
      LinkEntry link;
      link.tail = r.scalar<std::int64_t>(item["tail"], "tail");
      link.head = r.scalar<std::int64_t>(item["head"], "head");
      if (const auto lanes = item["lanes"]) link.lanes = r.positive(lanes, "lanes");
      if (const auto speed = item["max_speed"]) link.max_speed = r.positive(speed, "max_speed");
      spec.links.push_back(link);
    }
  }
  const std::size_t link_count = spec.links.size();

  if (const auto node = root["diagram"]) {
    const Reader r = reader_for("diagram");
    r.check_keys(node, "diagram", {"free_flow_speed", "jam_density"});
    if (const auto v = node["free_flow_speed"]) spec.free_flow_speed = r.positive(v, "free_flow_speed");
    if (const auto v = node["jam_density"]) spec.jam_density = r.positive(v, "jam_density");
  }

  if (const auto node = root["inflows"]) {
    const Reader r = reader_for("inflows");
    if (!node.IsNull()) {
      r.expect_map(node, "inflows");
      for (const auto& entry : node) {
        const auto id = r.scalar<std::int64_t>(entry.first, "inflow node");
        spec.inflows[id] = r.nonnegative(entry.second, "inflow");
      }
    }
  }

  if (const auto node = root["routing"]) {
    const Reader r = reader_for("routing");
    if (node.IsScalar()) {
      spec.routing = r.scalar<std::string>(node, "routing");
    } else {
      r.check_keys(node, "routing", {"policy"});
      if (const auto p = node["policy"]) spec.routing = r.scalar<std::string>(p, "policy");
    }
    if (spec.routing != "proportional" && spec.routing != "broken_equal_split") {
      r.fail(node, fmt::format("unknown routing policy '{}'", spec.routing));
    }
  }

  if (const auto node = root["speed_limits"]) {
    const Reader r = reader_for("speed_limits");
    if (node.IsScalar()) {
      spec.speed_mode = parse_mode(r, node);
    } else {
      r.check_keys(node, "speed_limits", {"mode", "links"});
      if (const auto m = node["mode"]) spec.speed_mode = parse_mode(r, m);
      if (const auto list = node["links"]) {
        r.expect_sequence(list, "speed_limits.links");
        std::set<std::size_t> seen;
        for (const auto& item : list) {
          r.check_keys(item, "speed limit entry", {"link", "mode", "target"});
          if (!item["link"] || !item["mode"]) r.fail(item, "speed limit entry needs 'link' and 'mode'");
          SpeedOverride entry;
          entry.link = r.scalar<std::size_t>(item["link"], "link");
          if (entry.link >= link_count) r.fail(item["link"], fmt::format("link index {} out of range", entry.link));
          if (!seen.insert(entry.link).second) r.fail(item, fmt::format("link {} has two speed limits", entry.link));
          entry.mode = parse_mode(r, item["mode"]);
          if (const auto t = item["target"]) {
            if (entry.mode == SpeedMode::max) r.fail(t, "a 'max' speed limit takes no target");
            entry.target = r.nonnegative(t, "target");
          }
          spec.speed_overrides.push_back(entry);
        }
      }
    }
  }

  spec.initial_density.assign(link_count, 0.0);
  if (const auto node = root["initial_density"]) {
    spec.initial_density = reader_for("initial_density").per_link(node, "initial_density", link_count, false);
  }

  bool window_given = false;
  if (const auto node = root["simulation"]) {
    const Reader r = reader_for("simulation");
    r.check_keys(node, "simulation", {"dt", "horizon", "stride", "window", "epsilon"});
    if (const auto v = node["dt"]) spec.dt = r.positive(v, "dt");
    if (const auto v = node["horizon"]) spec.horizon = r.positive(v, "horizon");
    if (const auto v = node["stride"]) {
      spec.stride = r.scalar<std::size_t>(v, "stride");
      if (spec.stride == 0) r.fail(v, "'stride' must be at least 1");
    }
    if (const auto v = node["epsilon"]) spec.epsilon = r.nonnegative(v, "epsilon");
    if (const auto v = node["window"]) {
      spec.window = r.positive(v, "window");
      window_given = true;
      if (spec.window > spec.horizon) r.fail(v, "'window' cannot exceed the horizon");
    }
  }
  if (!window_given) spec.window = defaults.window_fraction * spec.horizon;

  spec.alpha.assign(link_count, defaults.alpha);
  if (const auto node = root["allocation"]) {
    const Reader r = reader_for("allocation");
    r.check_keys(node, "allocation", {"rho_star", "alpha"});
    if (const auto v = node["rho_star"]) {
      if (!(v.IsScalar() && v.Scalar() == "critical")) {
        if (!v.IsSequence()) r.fail(v, "'rho_star' must be 'critical' or a list with one density per link");
        spec.rho_star = r.per_link(v, "rho_star", link_count, false);
      }
    }
    if (const auto v = node["alpha"]) spec.alpha = r.per_link(v, "alpha", link_count, true);
  }
  return spec;
}

std::string num(double value) { return fmt::format("{}", value); }

}  // namespace

std::string_view to_string(SpeedMode mode) {
  switch (mode) {
    case SpeedMode::max: return "max";
    case SpeedMode::constant: return "constant";
    case SpeedMode::feedback: return "feedback";
    case SpeedMode::allocated: return "allocated";
  }
  return "max";
}

Defaults parse_defaults(const std::filesystem::path& path) {
  const std::string source = path.string();
  const YAML::Node root = load_document(read_file(path), source);
  const Reader r(source);
  r.check_keys(root, "defaults",
               {"dt", "horizon", "window_fraction", "epsilon", "alpha", "stride", "free_flow_speed", "jam_density",
                "routing"});
  Defaults d;
  if (const auto v = root["dt"]) d.dt = r.positive(v, "dt");
  if (const auto v = root["horizon"]) d.horizon = r.positive(v, "horizon");
  if (const auto v = root["window_fraction"]) {
    d.window_fraction = r.positive(v, "window_fraction");
    if (d.window_fraction > 1.0) r.fail(v, "'window_fraction' cannot exceed 1");
  }
  if (const auto v = root["epsilon"]) d.epsilon = r.nonnegative(v, "epsilon");
  if (const auto v = root["alpha"]) d.alpha = r.positive(v, "alpha");
  if (const auto v = root["stride"]) {
    d.stride = r.scalar<std::size_t>(v, "stride");
    if (d.stride == 0) r.fail(v, "'stride' must be at least 1");
  }
  if (const auto v = root["free_flow_speed"]) d.free_flow_speed = r.positive(v, "free_flow_speed");
  if (const auto v = root["jam_density"]) d.jam_density = r.positive(v, "jam_density");
  if (const auto v = root["routing"]) d.routing = r.scalar<std::string>(v, "routing");
  return d;
}

Defaults load_defaults() {
  if (const char* path = std::getenv("FLOWNET_DEFAULTS"); path != nullptr && *path != '\0') {
    return parse_defaults(path);
  }
  return Defaults{};
}

ScenarioSpec parse_scenario_text(const std::string& text, const Defaults& defaults, const std::string& source) {
  const YAML::Node root = load_document(text, source);
  std::map<std::string, std::string> sources;
  for (const std::string_view key : kTopLevelKeys) sources[std::string(key)] = source;
  return convert(root, sources, defaults);
}

ScenarioSpec parse_scenario_file(const std::filesystem::path& path, const std::vector<std::filesystem::path>& overlays,
                                 const Defaults& defaults) {
  const std::string base_source = path.string();
  YAML::Node root = load_document(read_file(path), base_source);
  std::map<std::string, std::string> sources;
  for (const std::string_view key : kTopLevelKeys) sources[std::string(key)] = base_source;

  for (const auto& overlay_path : overlays) {
    const std::string source = overlay_path.string();
    const YAML::Node overlay = load_document(read_file(overlay_path), source);
    Reader(source).check_keys(overlay, "overlay", kTopLevelKeys);
    for (const auto& entry : overlay) {
      const std::string key = entry.first.Scalar();
      root[key] = entry.second;
      sources[key] = source;
    }
  }
  return convert(root, sources, defaults);
}

std::string serialize_scenario(const ScenarioSpec& spec) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  if (!spec.name.empty()) out << YAML::Key << "name" << YAML::Value << spec.name;

  out << YAML::Key << "nodes" << YAML::Value << YAML::Flow << spec.nodes;

  out << YAML::Key << "links" << YAML::Value << YAML::BeginSeq;
  for (const LinkEntry& link : spec.links) {
    out << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "tail" << YAML::Value << link.tail;
    out << YAML::Key << "head" << YAML::Value << link.head;
    out << YAML::Key << "lanes" << YAML::Value << num(link.lanes);
    if (link.max_speed) out << YAML::Key << "max_speed" << YAML::Value << num(*link.max_speed);
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  out << YAML::Key << "diagram" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "free_flow_speed" << YAML::Value << num(spec.free_flow_speed);
  out << YAML::Key << "jam_density" << YAML::Value << num(spec.jam_density);
  out << YAML::EndMap;

  out << YAML::Key << "inflows" << YAML::Value << YAML::BeginMap;
  for (const auto& [node, value] : spec.inflows) out << YAML::Key << node << YAML::Value << num(value);
  out << YAML::EndMap;

  out << YAML::Key << "routing" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "policy" << YAML::Value << spec.routing << YAML::EndMap;

  out << YAML::Key << "speed_limits" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "mode" << YAML::Value << std::string(to_string(spec.speed_mode));
  if (!spec.speed_overrides.empty()) {
    out << YAML::Key << "links" << YAML::Value << YAML::BeginSeq;
    for (const SpeedOverride& entry : spec.speed_overrides) {
      out << YAML::Flow << YAML::BeginMap;
      out << YAML::Key << "link" << YAML::Value << entry.link;
      out << YAML::Key << "mode" << YAML::Value << std::string(to_string(entry.mode));
      if (entry.target) out << YAML::Key << "target" << YAML::Value << num(*entry.target);
      out << YAML::EndMap;
    }
    out << YAML::EndSeq;
  }
  out << YAML::EndMap;

  auto emit_list = [&](const std::vector<double>& values) {
    out << YAML::Flow << YAML::BeginSeq;
    for (const double v : values) out << num(v);
    out << YAML::EndSeq;
  };

  out << YAML::Key << "initial_density" << YAML::Value;
  emit_list(spec.initial_density);

  out << YAML::Key << "simulation" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "dt" << YAML::Value << num(spec.dt);
  out << YAML::Key << "horizon" << YAML::Value << num(spec.horizon);
  out << YAML::Key << "stride" << YAML::Value << spec.stride;
  out << YAML::Key << "window" << YAML::Value << num(spec.window);
  out << YAML::Key << "epsilon" << YAML::Value << num(spec.epsilon);
  out << YAML::EndMap;

  out << YAML::Key << "allocation" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "rho_star" << YAML::Value;
  if (spec.rho_star) {
    emit_list(*spec.rho_star);
  } else {
    out << "critical";
  }
  out << YAML::Key << "alpha" << YAML::Value;
  emit_list(spec.alpha);
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::string speed_limit_fragment(std::span<const SpeedLimitPolicy> policies) {
  YAML::Emitter out;
  out << YAML::BeginMap << YAML::Key << "speed_limits" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "mode" << YAML::Value << "max";
  out << YAML::Key << "links" << YAML::Value << YAML::BeginSeq;
  for (std::size_t e = 0; e < policies.size(); ++e) {
    out << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "link" << YAML::Value << e;
    out << YAML::Key << "mode" << YAML::Value << std::string(policy_name(policies[e]));
    if (const auto* c = std::get_if<ConstantCap>(&policies[e])) {
      out << YAML::Key << "target" << YAML::Value << num(c->target);
    } else if (const auto* f = std::get_if<FeedbackCap>(&policies[e])) {
      out << YAML::Key << "target" << YAML::Value << num(f->target);
    }
    out << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

CapacityAllocation allocate_for(const ScenarioSpec& spec, const Scenario& scenario, std::span<const double> rho_star) {
  const AllocationPolytope polytope =
      build_polytope(*scenario.network, scenario.physics, rho_star, scenario.inflow);
  return allocate(polytope, spec.alpha);
}

BuiltScenario build_scenario(const ScenarioSpec& spec) {
  std::vector<NodeId> nodes;
  for (const auto id : spec.nodes) nodes.push_back(NodeId{id});
  std::vector<LinkSpec> links;
  for (const LinkEntry& link : spec.links) {
    links.push_back({NodeId{link.tail}, NodeId{link.head}, link.lanes, link.max_speed.value_or(spec.free_flow_speed)});
  }

  BuiltScenario built;
  built.window = spec.window;
  built.epsilon = spec.epsilon;
  Scenario& s = built.scenario;
  s.network = std::make_shared<const FlowNetwork>(FlowNetwork::build(std::move(nodes), std::move(links)));
  const FlowNetwork& net = *s.network;
  s.physics = link_physics(net, std::make_shared<GreenshieldsDiagram>(spec.free_flow_speed, spec.jam_density));

  s.inflow.assign(net.node_count(), 0.0);
  for (const auto& [id, value] : spec.inflows) {
    if (!net.contains(NodeId{id})) {
      throw Error(Errc::invalid_scenario, fmt::format("inflow declared at unknown node {}", id));
    }
    const std::size_t v = net.index_of(NodeId{id});
    if (net.kind(v) != NodeKind::origin && value != 0.0) {
      throw Error(Errc::invalid_scenario, fmt::format("external inflow declared at non-origin node {}", id));
    }
    s.inflow[v] = value;
  }
  s.routing = make_routing_policy(spec.routing);
  s.initial_density = spec.initial_density;
  s.dt = spec.dt;
  s.horizon = spec.horizon;
  s.stride = spec.stride;

  built.rho_star = spec.rho_star ? *spec.rho_star : critical_profile(s.physics);
  for (std::size_t e = 0; e < built.rho_star.size(); ++e) {
    if (built.rho_star[e] > s.physics[e].jam_density()) {
      throw Error(Errc::invalid_scenario, fmt::format("rho_star of link {} exceeds its jam density", e));
    }
  }

  auto needs_allocation = [](SpeedMode mode) { return mode != SpeedMode::max; };
  bool need = needs_allocation(spec.speed_mode);
  for (const SpeedOverride& entry : spec.speed_overrides) {
    need = need || (needs_allocation(entry.mode) && !entry.target);
  }
  if (need) built.allocation = allocate_for(spec, s, built.rho_star);

  auto policy_for = [&](SpeedMode mode, std::size_t e, std::optional<double> target) -> SpeedLimitPolicy {
    if (mode == SpeedMode::max) return MaxSpeed{};
    const double value = target ? *target : built.allocation->target[e];
    if (mode == SpeedMode::constant) return ConstantCap{value};
    return FeedbackCap{value};
  };
  s.speed_limits.clear();
  for (std::size_t e = 0; e < net.link_count(); ++e) s.speed_limits.push_back(policy_for(spec.speed_mode, e, {}));
  for (const SpeedOverride& entry : spec.speed_overrides) {
    s.speed_limits[entry.link] = policy_for(entry.mode, entry.link, entry.target);
  }

  validate(s);
  return built;
}

}  // namespace flownet
