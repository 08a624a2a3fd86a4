#include "aqua/config.hpp"

#include <fstream>
#include <map>
#include <set>

namespace aqua {

namespace {

struct RawEntry {
  std::string value;
  int line = 0;
};

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::map<std::string, RawEntry> parse_kv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw BadConfig("config: cannot open " + path.string());
  std::map<std::string, RawEntry> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw BadConfig(path.string() + ":" + std::to_string(lineno) +
                      ": expected key = value");
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    if (key.empty())
      throw BadConfig(path.string() + ":" + std::to_string(lineno) + ": empty key");
    if (kv.count(key))
      throw BadConfig(path.string() + ":" + std::to_string(lineno) +
                      ": duplicate key '" + key + "'");
    kv[key] = {value, lineno};
  }
  return kv;
}

class Reader {
 public:
  Reader(std::map<std::string, RawEntry> kv, std::string file)
      : kv_(std::move(kv)), file_(std::move(file)) {}

  template <typename T, typename Parse>
  T get(const std::string& key, T def, Parse parse) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return def;
    used_.insert(key);
    try {
      return parse(it->second.value);
    } catch (const std::exception&) {
      throw BadConfig(file_ + ":" + std::to_string(it->second.line) +
                      ": bad value for '" + key + "': " + it->second.value);
    }
  }

  double get_double(const std::string& key, double def) {
    return get<double>(key, def, [](const std::string& v) {
      size_t pos = 0;
      double d = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return d;
    });
  }
  long get_int(const std::string& key, long def) {
    return get<long>(key, def, [](const std::string& v) {
      size_t pos = 0;
      long d = std::stol(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return d;
    });
  }
  std::string get_string(const std::string& key, std::string def) {
    return get<std::string>(key, std::move(def), [](const std::string& v) { return v; });
  }
  bool get_bool(const std::string& key, bool def) {
    return get<bool>(key, def, [](const std::string& v) {
      if (v == "true" || v == "1") return true;
      if (v == "false" || v == "0") return false;
      throw std::invalid_argument(v);
    });
  }

  // Consume every key under a prefix as float coefficients.
  std::map<std::string, float> get_prefixed(const std::string& prefix) {
    std::map<std::string, float> out;
    for (const auto& [key, e] : kv_) {
      if (key.rfind(prefix, 0) != 0) continue;
      used_.insert(key);
      try {
        out[key.substr(prefix.size())] = std::stof(e.value);
      } catch (const std::exception&) {
        throw BadConfig(file_ + ":" + std::to_string(e.line) + ": bad value for '" +
                        key + "': " + e.value);
      }
    }
    return out;
  }

  void check_all_used() const {
    for (const auto& [key, e] : kv_)
      if (!used_.count(key))
        throw BadConfig(file_ + ":" + std::to_string(e.line) + ": unknown key '" +
                        key + "'");
  }

 private:
  std::map<std::string, RawEntry> kv_;
  std::string file_;
  std::set<std::string> used_;
};

void read_class_stats(Reader& r, const std::string& prefix, ClassStats& s) {
  s.green_mean = static_cast<float>(r.get_double(prefix + ".green", s.green_mean));
  s.nir_mean = static_cast<float>(r.get_double(prefix + ".nir", s.nir_mean));
  s.optical_sigma = static_cast<float>(r.get_double(prefix + ".sigma", s.optical_sigma));
  s.sar_mean = static_cast<float>(r.get_double(prefix + ".sar", s.sar_mean));
}

}  // namespace

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  Reader r(parse_kv(path), path.string());
  PipelineConfig c;

  c.data_root = r.get_string("data_root", c.data_root.string());
  c.checkpoint_dir = r.get_string("checkpoint_dir", c.checkpoint_dir.string());
  c.report_dir = r.get_string("report_dir", c.report_dir.string());
  c.seed = static_cast<uint64_t>(r.get_int("seed", static_cast<long>(c.seed)));
  c.threads = static_cast<int>(r.get_int("threads", c.threads));
  c.tile_size = static_cast<int>(r.get_int("tile_size", c.tile_size));
  c.train_fraction = r.get_double("train_fraction", c.train_fraction);

  c.scene_count = static_cast<int>(r.get_int("scene.count", c.scene_count));
  c.test_scene_count = static_cast<int>(r.get_int("scene.test_count", c.test_scene_count));
  c.scene_width = static_cast<int>(r.get_int("scene.width", c.scene_width));
  c.scene_height = static_cast<int>(r.get_int("scene.height", c.scene_height));
  c.water_cover = r.get_double("scene.water_cover", c.water_cover);
  c.vegetated_fraction = r.get_double("scene.vegetated_fraction", c.vegetated_fraction);
  c.speckle_looks = static_cast<int>(r.get_int("scene.speckle_looks", c.speckle_looks));
  c.cloud_fraction = r.get_double("scene.cloud_fraction", c.cloud_fraction);
  c.site_count = static_cast<int>(r.get_int("scene.site_count", c.site_count));
  c.start_date = r.get_string("scene.start_date", c.start_date);
  read_class_stats(r, "scene.stats.open_water", c.stats.open_water);
  read_class_stats(r, "scene.stats.vegetated_water", c.stats.vegetated_water);
  read_class_stats(r, "scene.stats.soil", c.stats.soil);
  read_class_stats(r, "scene.stats.vegetation", c.stats.vegetation);

  c.index.name = index_from_string(r.get_string("index.name", "NDWI"));
  c.index.threshold = static_cast<float>(r.get_double("index.threshold", 0.0));
  c.index.coefficients = r.get_prefixed("index.coef.");

  c.unet.input_channels = static_cast<int>(r.get_int("unet.input_channels", 1));
  c.unet.depth = static_cast<int>(r.get_int("unet.depth", c.unet.depth));
  c.unet.base_channels = static_cast<int>(r.get_int("unet.base_channels", c.unet.base_channels));
  c.unet.tile_size = c.tile_size;

  c.train_cfg.learning_rate = r.get_double("train.learning_rate", c.train_cfg.learning_rate);
  c.train_cfg.batch_size = static_cast<int>(r.get_int("train.batch_size", c.train_cfg.batch_size));
  c.train_cfg.epochs = static_cast<int>(r.get_int("train.epochs", c.train_cfg.epochs));
  c.train_cfg.epsilon = r.get_double("train.epsilon", c.train_cfg.epsilon);
  c.train_cfg.seed = c.seed;
  c.train_cfg.threads = c.threads;
  c.train_cfg.index_spec = c.index;

  c.baseline.use_filter = r.get_bool("baseline.use_filter", true);
  c.baseline.kernel_size = static_cast<int>(r.get_int("baseline.kernel", 5));
  c.baseline.sigma = static_cast<float>(r.get_double("baseline.sigma", 1.0));
  c.binarize_cut = static_cast<float>(r.get_double("predict.binarize_cut", 0.5));

  r.check_all_used();

  if (c.tile_size < 1) throw BadConfig("config: tile_size must be positive");
  if (!(c.train_fraction > 0.0 && c.train_fraction < 1.0))
    throw BadConfig("config: train_fraction must be in (0,1)");
  validate_config(c.unet);
  return c;
}

std::string default_config_text() {
  return R"(# pipeline configuration
# paths
data_root = data
checkpoint_dir = checkpoints
report_dir = reports

seed = 42
threads = 1
tile_size = 64
train_fraction = 0.8

# synthetic scenes (desk-scale stand-in for the satellite archive)
scene.count = 100
scene.test_count = 20
scene.width = 256
scene.height = 256
scene.water_cover = 0.3
scene.vegetated_fraction = 0.2
scene.speckle_looks = 4
scene.cloud_fraction = 0.0
scene.site_count = 3
scene.start_date = 2020-06-01

# per-class band statistics (reflectance means, shared optical sigma, SAR mean)
scene.stats.open_water.green = 0.10
scene.stats.open_water.nir = 0.04
scene.stats.open_water.sigma = 0.015
scene.stats.open_water.sar = 0.05
scene.stats.vegetated_water.green = 0.07
scene.stats.vegetated_water.nir = 0.30
scene.stats.vegetated_water.sigma = 0.015
scene.stats.vegetated_water.sar = 0.05
scene.stats.soil.green = 0.12
scene.stats.soil.nir = 0.22
scene.stats.soil.sigma = 0.015
scene.stats.soil.sar = 0.35
scene.stats.vegetation.green = 0.06
scene.stats.vegetation.nir = 0.36
scene.stats.vegetation.sigma = 0.015
scene.stats.vegetation.sar = 0.45

# teacher water index; coefficient presets for the linear/rational variants
# AWEI(nsh) after Feyisa et al. 2014: 4*(green - swir1) - 0.25*nir - 2.75*swir2
# HRWI after Yao et al. 2015: (6*green - nir - 6.5*red) / (green + nir + 6.5*red + 0.2)
index.name = NDWI
index.threshold = 0.0

# student
unet.input_channels = 1
unet.depth = 4
unet.base_channels = 32

# training
train.learning_rate = 5e-5
train.batch_size = 32
train.epochs = 20
train.epsilon = 1e-6

# otsu baseline
baseline.use_filter = true
baseline.kernel = 5
baseline.sigma = 1.0

predict.binarize_cut = 0.5
)";
}

}  // namespace aqua
