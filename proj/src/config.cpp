#include "qoct/config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace qoct {

namespace {

using nlohmann::ordered_json;

constexpr double kTwoPi = 6.283185307179586476925286766559;

double mhz_to_rad_ns(double f_mhz) { return kTwoPi * f_mhz * 1e-3; }

// Strict object reader: every key must be known, every known key type-checked.
class ObjectReader {
 public:
  ObjectReader(const ordered_json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError("config: " + path_ + " must be an object");
  }

  ~ObjectReader() = default;

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.contains(it.key()))
        throw ConfigError("config: unknown key '" + path_ + "." + it.key() + "'");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    if (!has(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const ordered_json::exception&) {
      throw ConfigError("config: bad value for '" + path_ + "." + key + "'");
    }
  }

  const ordered_json* sub(const std::string& key) {
    if (!has(key)) return nullptr;
    return &j_.at(key);
  }

 private:
  const ordered_json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace

void ExperimentConfig::validate() const {
  if (device.d < 3) throw ConfigError("config: device.d must be at least 3");
  if (device.anharmonicity_mhz == 0.0) throw ConfigError("config: anharmonicity must be nonzero");
  if (!(device.sample_rate_gsps > 0.0)) throw ConfigError("config: sample rate must be positive");
  if (!(device.qubit_freq_mhz > 0.0)) throw ConfigError("config: qubit frequency must be positive");
  if (noise.t1_us < 0.0 || noise.t2_us < 0.0) throw ConfigError("config: negative decay time");
  if (noise.dephasing_k < 0.0) throw ConfigError("config: dephasing_k must be nonnegative");
  if (noise.t1_us > 0.0 && noise.t2_us > 2.0 * noise.t1_us)
    throw ConfigError("config: T2 must not exceed 2*T1");
  if (cost.m < 1 || cost.k < 1 || cost.shots < 1)
    throw ConfigError("config: cost.m, cost.K and cost.shots must be at least 1");
  if (drag.n_samples < 2) throw ConfigError("config: drag.n_samples must be at least 2");
  if (!(drag.sigma_fraction > 0.0)) throw ConfigError("config: drag.sigma_fraction must be positive");
  if (drag.initial_amplitude < 0.0)
    throw ConfigError("config: drag.initial_amplitude must be nonnegative");
  if (cmaes.lambda != 0 && cmaes.lambda < 4)
    throw ConfigError("config: cmaes.lambda must be 0 (auto) or at least 4");
  if (!(cmaes.sigma0.amplitude_frac > 0.0) || !(cmaes.sigma0.beta > 0.0) ||
      !(cmaes.sigma0.ssb_mhz > 0.0) || !(cmaes.sigma0.correction_frac > 0.0) ||
      !(cmaes.sigma0.stage2_shrink > 0.0))
    throw ConfigError("config: cmaes.sigma0 entries must be positive");
  if (!(cmaes.bounds.amplitude_frac > 0.0) || !(cmaes.bounds.beta > 0.0) ||
      !(cmaes.bounds.ssb_mhz > 0.0) || !(cmaes.bounds.correction_frac > 0.0))
    throw ConfigError("config: cmaes.bounds entries must be positive");
  if (cmaes.max_iter.drag < 1 || cmaes.max_iter.pwc < 1)
    throw ConfigError("config: cmaes.max_iter entries must be at least 1");
  if (cmaes.target < 0.0 || cmaes.target > 1.0)
    throw ConfigError("config: cmaes.target must lie in [0, 1]");
  if (rb.lengths.empty()) throw ConfigError("config: rb.lengths must not be empty");
  for (std::size_t i = 0; i < rb.lengths.size(); ++i) {
    if (rb.lengths[i] < 1) throw ConfigError("config: rb.lengths must be >= 1");
    if (i > 0 && rb.lengths[i] <= rb.lengths[i - 1])
      throw ConfigError("config: rb.lengths must be strictly increasing");
  }
  if (rb.k < 1 || rb.shots < 1) throw ConfigError("config: rb.K and rb.shots must be at least 1");
  if (filter.rise_time_ns < 0.0) throw ConfigError("config: filter.rise_time_ns must be >= 0");
}

DeviceConfig ExperimentConfig::device_config() const {
  DeviceConfig cfg;
  cfg.dim = device.d;
  cfg.anharmonicity = mhz_to_rad_ns(device.anharmonicity_mhz);
  cfg.detuning = 0.0;
  cfg.sample_period = 1.0 / device.sample_rate_gsps;
  return cfg;
}

NoiseModel ExperimentConfig::noise_model() const {
  NoiseModel nm;
  nm.amplitude_damping = noise.t1_us > 0.0;
  nm.pure_dephasing = noise.t2_us > 0.0;
  nm.t1 = noise.t1_us * 1000.0;
  nm.t2 = noise.t2_us * 1000.0;
  return nm;
}

CostConfig ExperimentConfig::cost_config() const {
  CostConfig cc;
  cc.sequence_length = cost.m;
  cc.sequences = cost.k;
  cc.shots = cost.shots;
  cc.seed = cost.seed;
  return cc;
}

double ExperimentConfig::ssb_nominal() const { return mhz_to_rad_ns(device.ssb_freq_mhz); }

double ExperimentConfig::drag_duration() const {
  return drag.n_samples / device.sample_rate_gsps;
}

double ExperimentConfig::drag_sigma() const { return drag.sigma_fraction * drag_duration(); }

PipelineSettings ExperimentConfig::pipeline_settings() const {
  PipelineSettings s;
  s.initial_amplitude = drag.initial_amplitude;
  s.sigma0_amplitude_frac = cmaes.sigma0.amplitude_frac;
  s.sigma0_beta = cmaes.sigma0.beta;
  s.sigma0_ssb = mhz_to_rad_ns(cmaes.sigma0.ssb_mhz);
  s.sigma0_correction_frac = cmaes.sigma0.correction_frac;
  s.stage2_shrink = cmaes.sigma0.stage2_shrink;
  s.bound_amplitude_frac = cmaes.bounds.amplitude_frac;
  s.bound_beta = cmaes.bounds.beta;
  s.bound_ssb = mhz_to_rad_ns(cmaes.bounds.ssb_mhz);
  s.bound_correction_frac = cmaes.bounds.correction_frac;
  s.lambda = cmaes.lambda;
  s.max_iterations_drag = cmaes.max_iter.drag;
  s.max_iterations_pwc = cmaes.max_iter.pwc;
  s.target_cost = cmaes.target;
  s.seed = cost.seed;
  return s;
}

ExperimentConfig ExperimentConfig::defaults() { return ExperimentConfig{}; }

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const ordered_json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }

  ExperimentConfig cfg;
  ObjectReader root(j, "");
  if (const auto* jd = root.sub("device")) {
    ObjectReader r(*jd, "device");
    r.read("d", cfg.device.d);
    r.read("anharmonicity_mhz", cfg.device.anharmonicity_mhz);
    r.read("qubit_freq_mhz", cfg.device.qubit_freq_mhz);
    r.read("sample_rate_gsps", cfg.device.sample_rate_gsps);
    r.read("ssb_freq_mhz", cfg.device.ssb_freq_mhz);
    r.finish();
  }
  if (const auto* jn = root.sub("noise")) {
    ObjectReader r(*jn, "noise");
    r.read("t1_us", cfg.noise.t1_us);
    r.read("t2_us", cfg.noise.t2_us);
    r.read("dephasing_k", cfg.noise.dephasing_k);
    r.finish();
  }
  if (const auto* jc = root.sub("cost")) {
    ObjectReader r(*jc, "cost");
    r.read("m", cfg.cost.m);
    r.read("K", cfg.cost.k);
    r.read("shots", cfg.cost.shots);
    r.read("seed", cfg.cost.seed);
    r.finish();
  }
  if (const auto* jd = root.sub("drag")) {
    ObjectReader r(*jd, "drag");
    r.read("n_samples", cfg.drag.n_samples);
    r.read("sigma_fraction", cfg.drag.sigma_fraction);
    r.read("initial_amplitude", cfg.drag.initial_amplitude);
    r.finish();
  }
  if (const auto* jm = root.sub("cmaes")) {
    ObjectReader r(*jm, "cmaes");
    r.read("lambda", cfg.cmaes.lambda);
    if (const auto* js = r.sub("sigma0")) {
      ObjectReader rs(*js, "cmaes.sigma0");
      rs.read("amplitude_frac", cfg.cmaes.sigma0.amplitude_frac);
      rs.read("beta", cfg.cmaes.sigma0.beta);
      rs.read("ssb_mhz", cfg.cmaes.sigma0.ssb_mhz);
      rs.read("correction_frac", cfg.cmaes.sigma0.correction_frac);
      rs.read("stage2_shrink", cfg.cmaes.sigma0.stage2_shrink);
      rs.finish();
    }
    if (const auto* jb = r.sub("bounds")) {
      ObjectReader rb_(*jb, "cmaes.bounds");
      rb_.read("amplitude_frac", cfg.cmaes.bounds.amplitude_frac);
      rb_.read("beta", cfg.cmaes.bounds.beta);
      rb_.read("ssb_mhz", cfg.cmaes.bounds.ssb_mhz);
      rb_.read("correction_frac", cfg.cmaes.bounds.correction_frac);
      rb_.finish();
    }
    if (const auto* ji = r.sub("max_iter")) {
      ObjectReader ri(*ji, "cmaes.max_iter");
      ri.read("drag", cfg.cmaes.max_iter.drag);
      ri.read("pwc", cfg.cmaes.max_iter.pwc);
      ri.finish();
    }
    r.read("target", cfg.cmaes.target);
    r.finish();
  }
  if (const auto* jr = root.sub("rb")) {
    ObjectReader r(*jr, "rb");
    r.read("lengths", cfg.rb.lengths);
    r.read("K", cfg.rb.k);
    r.read("shots", cfg.rb.shots);
    r.finish();
  }
  if (const auto* jf = root.sub("filter")) {
    ObjectReader r(*jf, "filter");
    r.read("rise_time_ns", cfg.filter.rise_time_ns);
    r.finish();
  }
  root.finish();

  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

std::string ExperimentConfig::to_json_text() const {
  ordered_json j;
  j["device"] = {{"d", device.d},
                 {"anharmonicity_mhz", device.anharmonicity_mhz},
                 {"qubit_freq_mhz", device.qubit_freq_mhz},
                 {"sample_rate_gsps", device.sample_rate_gsps},
                 {"ssb_freq_mhz", device.ssb_freq_mhz}};
  j["noise"] = {{"t1_us", noise.t1_us},
                {"t2_us", noise.t2_us},
                {"dephasing_k", noise.dephasing_k}};
  j["cost"] = {{"m", cost.m}, {"K", cost.k}, {"shots", cost.shots}, {"seed", cost.seed}};
  j["drag"] = {{"n_samples", drag.n_samples},
               {"sigma_fraction", drag.sigma_fraction},
               {"initial_amplitude", drag.initial_amplitude}};
  j["cmaes"] = {{"lambda", cmaes.lambda},
                {"sigma0",
                 {{"amplitude_frac", cmaes.sigma0.amplitude_frac},
                  {"beta", cmaes.sigma0.beta},
                  {"ssb_mhz", cmaes.sigma0.ssb_mhz},
                  {"correction_frac", cmaes.sigma0.correction_frac},
                  {"stage2_shrink", cmaes.sigma0.stage2_shrink}}},
                {"bounds",
                 {{"amplitude_frac", cmaes.bounds.amplitude_frac},
                  {"beta", cmaes.bounds.beta},
                  {"ssb_mhz", cmaes.bounds.ssb_mhz},
                  {"correction_frac", cmaes.bounds.correction_frac}}},
                {"max_iter", {{"drag", cmaes.max_iter.drag}, {"pwc", cmaes.max_iter.pwc}}},
                {"target", cmaes.target}};
  j["rb"] = {{"lengths", rb.lengths}, {"K", rb.k}, {"shots", rb.shots}};
  j["filter"] = {{"rise_time_ns", filter.rise_time_ns}};
  return j.dump(2) + "\n";
}

}  // namespace qoct
