#include "timebin/config_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace timebin {

namespace {

using json = nlohmann::ordered_json;

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

/// Tracks which keys of a JSON object have been consumed so that anything
/// left over can be reported as unknown, with its full dotted path.
class ObjectReader {
 public:
  ObjectReader(const json& node, std::string path)
      : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) {
      throw ConfigError("expected an object", path_);
    }
  }

  const json* take(const std::string& key) {
    seen_.insert(key);
    const auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& item : node_.items()) {
      if (seen_.count(item.key()) == 0) {
        throw ConfigError("unknown key", join(path_, item.key()));
      }
    }
  }

  const std::string& path() const { return path_; }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

double as_double(const json& node, const std::string& path) {
  if (!node.is_number()) {
    throw ConfigError("expected a number", path);
  }
  return node.get<double>();
}

std::uint64_t as_u64(const json& node, const std::string& path) {
  if (node.is_number_unsigned()) {
    return node.get<std::uint64_t>();
  }
  if (node.is_number_integer() && node.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(node.get<std::int64_t>());
  }
  throw ConfigError("expected a non-negative integer", path);
}

bool as_bool(const json& node, const std::string& path) {
  if (!node.is_boolean()) {
    throw ConfigError("expected true or false", path);
  }
  return node.get<bool>();
}

std::string as_string(const json& node, const std::string& path) {
  if (!node.is_string()) {
    throw ConfigError("expected a string", path);
  }
  return node.get<std::string>();
}

void read_double(ObjectReader& obj, const std::string& key, double& out) {
  if (const json* node = obj.take(key)) {
    out = as_double(*node, join(obj.path(), key));
  }
}

void read_u64(ObjectReader& obj, const std::string& key, std::uint64_t& out) {
  if (const json* node = obj.take(key)) {
    out = as_u64(*node, join(obj.path(), key));
  }
}

void read_spectrum(const json& node, const std::string& path,
                   SpectrumConfig& out) {
  ObjectReader obj(node, path);
  read_double(obj, "center_nm", out.center_nm);
  read_double(obj, "fwhm_nm", out.fwhm_nm);
  read_double(obj, "correlation", out.correlation);
  obj.finish();
}

void read_source(const json& node, const std::string& path,
                 SourceConfig& out) {
  ObjectReader obj(node, path);
  if (const json* spectrum = obj.take("spectrum")) {
    read_spectrum(*spectrum, join(path, "spectrum"), out.spectrum);
  }
  read_double(obj, "pulse_width_ps", out.pulse_width_ps);
  obj.finish();
}

void read_units(const json& node, const std::string& path, Units& out) {
  ObjectReader obj(node, path);
  read_double(obj, "tick_resolution_ps", out.tick_resolution_ps);
  read_double(obj, "bin_period_ps", out.bin_period_ps);
  read_double(obj, "mzi_delay_ps", out.mzi_delay_ps);
  obj.finish();
}

void read_mzi(const json& node, const std::string& path, MziConfig& out) {
  ObjectReader obj(node, path);
  read_double(obj, "delay_ps", out.delay_ps);
  read_double(obj, "phase_delta_rad", out.phase_delta_rad);
  read_double(obj, "insertion_loss_db", out.insertion_loss_db);
  read_double(obj, "intrinsic_visibility", out.intrinsic_visibility);
  read_double(obj, "phase_per_heater_mw", out.phase_per_heater_mw);
  read_double(obj, "phase_offset_rad", out.phase_offset_rad);
  obj.finish();
}

void read_dcm(const json& node, const std::string& path, DcmConfig& out) {
  ObjectReader obj(node, path);
  if (const json* enabled = obj.take("enabled")) {
    out.enabled = as_bool(*enabled, join(path, "enabled"));
  }
  read_double(obj, "compensated_km", out.compensated_km);
  read_double(obj, "insertion_loss_db", out.insertion_loss_db);
  obj.finish();
}

void read_link(const json& node, const std::string& path, LinkConfig& out) {
  ObjectReader obj(node, path);
  read_double(obj, "length_km", out.length_km);
  read_double(obj, "loss_db", out.loss_db);
  read_double(obj, "dispersion_ps_per_nm_km", out.dispersion_ps_per_nm_km);
  if (const json* dcm = obj.take("dcm")) {
    read_dcm(*dcm, join(path, "dcm"), out.dcm);
  }
  read_double(obj, "background_rate_hz", out.background_rate_hz);
  obj.finish();
}

void read_detector(const json& node, const std::string& path,
                   DetectorConfig& out) {
  ObjectReader obj(node, path);
  if (const json* id = obj.take("id")) {
    out.id = as_string(*id, join(path, "id"));
  }
  read_double(obj, "efficiency", out.efficiency);
  read_double(obj, "jitter_fwhm_ps", out.jitter_fwhm_ps);
  read_double(obj, "dead_time_ns", out.dead_time_ns);
  read_double(obj, "dark_rate_hz", out.dark_rate_hz);
  obj.finish();
}

void read_detectors(const json& node, const std::string& path,
                    std::array<DetectorConfig, 2>& out) {
  if (!node.is_array() || node.size() != 2) {
    throw ConfigError("expected an array of exactly 2 detector objects",
                      path);
  }
  for (std::size_t i = 0; i < 2; ++i) {
    read_detector(node[i], path + "[" + std::to_string(i) + "]", out[i]);
  }
}

void read_run(const json& node, const std::string& path, RunConfig& out) {
  ObjectReader obj(node, path);
  read_u64(obj, "pulse_count", out.pulse_count);
  read_u64(obj, "seed", out.seed);
  read_double(obj, "mu", out.mu);
  read_double(obj, "pump_phase_step", out.pump_phase_step);
  if (const json* units = obj.take("units")) {
    read_units(*units, join(path, "units"), out.units);
  }
  if (const json* source = obj.take("source")) {
    read_source(*source, join(path, "source"), out.source);
  }
  if (const json* mzi = obj.take("mzi")) {
    read_mzi(*mzi, join(path, "mzi"), out.mzi);
  }
  if (const json* link = obj.take("link")) {
    read_link(*link, join(path, "link"), out.link);
  }
  if (const json* detectors = obj.take("detectors")) {
    read_detectors(*detectors, join(path, "detectors"), out.detectors);
  }
  obj.finish();
}

void read_analysis(const json& node, const std::string& path,
                   AnalysisConfig& out) {
  ObjectReader obj(node, path);
  read_double(obj, "bin_width_ps", out.bin_width_ps);
  read_double(obj, "max_delay_ps", out.max_delay_ps);
  read_double(obj, "coincidence_window_ps", out.coincidence_window_ps);
  if (const json* offsets = obj.take("accidental_offsets_ps")) {
    const std::string offsets_path = join(path, "accidental_offsets_ps");
    if (!offsets->is_array()) {
      throw ConfigError("expected an array of numbers", offsets_path);
    }
    out.accidental_offsets_ps.clear();
    for (std::size_t i = 0; i < offsets->size(); ++i) {
      out.accidental_offsets_ps.push_back(as_double(
          (*offsets)[i], offsets_path + "[" + std::to_string(i) + "]"));
    }
  }
  obj.finish();
}

void read_sweep_range(const json& node, const std::string& path,
                      SweepRange& out) {
  ObjectReader obj(node, path);
  read_double(obj, "start", out.start);
  read_double(obj, "stop", out.stop);
  if (const json* points = obj.take("points")) {
    out.points = static_cast<std::size_t>(
        as_u64(*points, join(path, "points")));
  }
  obj.finish();
}

void read_sweep(const json& node, const std::string& path, SweepConfig& out) {
  ObjectReader obj(node, path);
  if (const json* range = obj.take("heater_mw")) {
    read_sweep_range(*range, join(path, "heater_mw"), out.heater_mw);
  }
  read_double(obj, "per_point_duration_s", out.per_point_duration_s);
  obj.finish();
}

void read_receiver(const json& node, const std::string& path,
                   ReceiverConfig& out) {
  ObjectReader obj(node, path);
  if (const json* mzi = obj.take("mzi")) {
    read_mzi(*mzi, join(path, "mzi"), out.mzi);
  }
  if (const json* link = obj.take("link")) {
    read_link(*link, join(path, "link"), out.link);
  }
  if (const json* detectors = obj.take("detectors")) {
    read_detectors(*detectors, join(path, "detectors"), out.detectors);
  }
  obj.finish();
}

Topology topology_from_string(const std::string& text,
                              const std::string& path) {
  if (text == "single_receiver_bs") return Topology::single_receiver_bs;
  if (text == "single_receiver_pbs") return Topology::single_receiver_pbs;
  if (text == "two_receiver") return Topology::two_receiver;
  throw ConfigError(
      "unknown topology '" + text +
          "' (expected single_receiver_bs, single_receiver_pbs, or "
          "two_receiver)",
      path);
}

SplitterKind splitter_from_string(const std::string& text,
                                  const std::string& path) {
  if (text == "balanced_50_50") return SplitterKind::balanced_50_50;
  if (text == "polarizing") return SplitterKind::polarizing;
  throw ConfigError("unknown splitter '" + text +
                        "' (expected balanced_50_50 or polarizing)",
                    path);
}

const char* topology_to_string(Topology topology) {
  switch (topology) {
    case Topology::single_receiver_bs:
      return "single_receiver_bs";
    case Topology::single_receiver_pbs:
      return "single_receiver_pbs";
    case Topology::two_receiver:
      return "two_receiver";
  }
  return "single_receiver_bs";
}

const char* splitter_to_string(SplitterKind kind) {
  return kind == SplitterKind::balanced_50_50 ? "balanced_50_50"
                                              : "polarizing";
}

json spectrum_to_json(const SpectrumConfig& cfg) {
  return json{{"center_nm", cfg.center_nm},
              {"fwhm_nm", cfg.fwhm_nm},
              {"correlation", cfg.correlation}};
}

json source_to_json(const SourceConfig& cfg) {
  return json{{"spectrum", spectrum_to_json(cfg.spectrum)},
              {"pulse_width_ps", cfg.pulse_width_ps}};
}

json units_to_json(const Units& units) {
  return json{{"tick_resolution_ps", units.tick_resolution_ps},
              {"bin_period_ps", units.bin_period_ps},
              {"mzi_delay_ps", units.mzi_delay_ps}};
}

json mzi_to_json(const MziConfig& cfg) {
  return json{{"delay_ps", cfg.delay_ps},
              {"phase_delta_rad", cfg.phase_delta_rad},
              {"insertion_loss_db", cfg.insertion_loss_db},
              {"intrinsic_visibility", cfg.intrinsic_visibility},
              {"phase_per_heater_mw", cfg.phase_per_heater_mw},
              {"phase_offset_rad", cfg.phase_offset_rad}};
}

json link_to_json(const LinkConfig& cfg) {
  return json{{"length_km", cfg.length_km},
              {"loss_db", cfg.loss_db},
              {"dispersion_ps_per_nm_km", cfg.dispersion_ps_per_nm_km},
              {"dcm",
               json{{"enabled", cfg.dcm.enabled},
                    {"compensated_km", cfg.dcm.compensated_km},
                    {"insertion_loss_db", cfg.dcm.insertion_loss_db}}},
              {"background_rate_hz", cfg.background_rate_hz}};
}

json detector_to_json(const DetectorConfig& cfg) {
  return json{{"id", cfg.id},
              {"efficiency", cfg.efficiency},
              {"jitter_fwhm_ps", cfg.jitter_fwhm_ps},
              {"dead_time_ns", cfg.dead_time_ns},
              {"dark_rate_hz", cfg.dark_rate_hz}};
}

json detectors_to_json(const std::array<DetectorConfig, 2>& detectors) {
  return json::array(
      {detector_to_json(detectors[0]), detector_to_json(detectors[1])});
}

json receiver_to_json(const ReceiverConfig& cfg) {
  return json{{"mzi", mzi_to_json(cfg.mzi)},
              {"link", link_to_json(cfg.link)},
              {"detectors", detectors_to_json(cfg.detectors)}};
}

}  // namespace

Scenario scenario_from_json(const std::string& text,
                            const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& err) {
    throw ConfigError(origin + ": " + err.what(), "");
  }

  Scenario scenario;
  ObjectReader obj(root, "");
  if (const json* name = obj.take("name")) {
    scenario.name = as_string(*name, "name");
  }
  if (const json* topology = obj.take("topology")) {
    scenario.topology =
        topology_from_string(as_string(*topology, "topology"), "topology");
  }
  if (const json* splitter = obj.take("source_splitter")) {
    scenario.source_splitter = splitter_from_string(
        as_string(*splitter, "source_splitter"), "source_splitter");
  }
  if (const json* run = obj.take("run")) {
    read_run(*run, "run", scenario.run);
  }
  if (const json* receivers = obj.take("receivers")) {
    ObjectReader rec(*receivers, "receivers");
    std::array<ReceiverConfig, 2> pair;
    if (const json* alice = rec.take("alice")) {
      read_receiver(*alice, "receivers.alice", pair[0]);
    }
    if (const json* bob = rec.take("bob")) {
      read_receiver(*bob, "receivers.bob", pair[1]);
    }
    rec.finish();
    scenario.receivers = pair;
  }
  if (const json* analysis = obj.take("analysis")) {
    read_analysis(*analysis, "analysis", scenario.analysis);
  }
  if (const json* sweep = obj.take("sweep")) {
    read_sweep(*sweep, "sweep", scenario.sweep);
  }
  obj.finish();

  scenario.validate();
  return scenario;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot open config file '" + path + "'", "");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return scenario_from_json(buffer.str(), path);
}

std::string scenario_to_json(const Scenario& scenario) {
  json root;
  root["name"] = scenario.name;
  root["topology"] = topology_to_string(scenario.topology);
  root["source_splitter"] = splitter_to_string(scenario.source_splitter);
  root["run"] = json{{"pulse_count", scenario.run.pulse_count},
                     {"seed", scenario.run.seed},
                     {"mu", scenario.run.mu},
                     {"pump_phase_step", scenario.run.pump_phase_step},
                     {"units", units_to_json(scenario.run.units)},
                     {"source", source_to_json(scenario.run.source)},
                     {"mzi", mzi_to_json(scenario.run.mzi)},
                     {"link", link_to_json(scenario.run.link)},
                     {"detectors", detectors_to_json(scenario.run.detectors)}};
  if (scenario.receivers) {
    root["receivers"] =
        json{{"alice", receiver_to_json((*scenario.receivers)[0])},
             {"bob", receiver_to_json((*scenario.receivers)[1])}};
  }
  root["analysis"] =
      json{{"bin_width_ps", scenario.analysis.bin_width_ps},
           {"max_delay_ps", scenario.analysis.max_delay_ps},
           {"coincidence_window_ps", scenario.analysis.coincidence_window_ps},
           {"accidental_offsets_ps", scenario.analysis.accidental_offsets_ps}};
  root["sweep"] =
      json{{"heater_mw",
            json{{"start", scenario.sweep.heater_mw.start},
                 {"stop", scenario.sweep.heater_mw.stop},
                 {"points", scenario.sweep.heater_mw.points}}},
           {"per_point_duration_s", scenario.sweep.per_point_duration_s}};
  return root.dump(2) + "\n";
}

}  // namespace timebin
