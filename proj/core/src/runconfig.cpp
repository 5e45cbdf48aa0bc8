#include "wgdf/runconfig.hpp"

#include <fstream>
#include <sstream>

namespace wgdf {

void RunConfig::validate() const {
  model.validate();
  opt.validate();
  if (loss.lambda1 < 0.0 || loss.lambda2 < 0.0)
    throw ConfigError("loss weights must be nonnegative");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (dataset_dir.empty()) {
    synth.validate();
    if (synth_count < 1)
      throw ConfigError("data.synthetic.count must be >= 1");
  }
  if (output_dir.empty()) throw ConfigError("output_dir must be set");
}

std::map<std::string, std::string> parse_kv_file(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                        ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                        ": empty key");
    kv[key] = val;
  }
  return kv;
}

namespace {

int to_int(const std::string& k, const std::string& v) {
  try {
    return std::stoi(v);
  } catch (...) {
    throw ConfigError("config key " + k + ": expected integer, got '" + v + "'");
  }
}

double to_double(const std::string& k, const std::string& v) {
  try {
    return std::stod(v);
  } catch (...) {
    throw ConfigError("config key " + k + ": expected number, got '" + v + "'");
  }
}

uint64_t to_u64(const std::string& k, const std::string& v) {
  try {
    return std::stoull(v);
  } catch (...) {
    throw ConfigError("config key " + k + ": expected integer, got '" + v + "'");
  }
}

bool to_bool(const std::string& k, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config key " + k + ": expected true/false, got '" + v + "'");
}

}  // namespace

RunConfig RunConfig::from_kv(const std::map<std::string, std::string>& kv) {
  RunConfig c;
  bool synth_touched = false;
  for (const auto& [k, v] : kv) {
    if (k == "model.c_img") c.model.c_img = to_int(k, v);
    else if (k == "model.c_hf") c.model.c_hf = to_int(k, v);
    else if (k == "model.c_lf") c.model.c_lf = to_int(k, v);
    else if (k == "model.heads") c.model.heads = to_int(k, v);
    else if (k == "model.stages") c.model.stages = to_int(k, v);
    else if (k == "model.fdid_shared") c.model.fdid_shared = to_bool(k, v);
    else if (k == "model.eq2_combine") {
      if (v == "concat") c.model.eq2_combine = Eq2Combine::kConcat;
      else if (v == "sum") c.model.eq2_combine = Eq2Combine::kSum;
      else throw ConfigError("model.eq2_combine must be concat|sum");
    } else if (k == "model.pcdm_combine") {
      if (v == "gate") c.model.pcdm_combine = PcdmCombine::kGate;
      else if (v == "add") c.model.pcdm_combine = PcdmCombine::kAdd;
      else throw ConfigError("model.pcdm_combine must be gate|add");
    } else if (k == "model.positional_encoding")
      c.model.positional_encoding = to_bool(k, v);
    else if (k == "model.classifier_threshold")
      c.model.classifier_threshold = to_double(k, v);
    else if (k == "model.seed") c.model.seed = to_u64(k, v);
    else if (k == "loss.lambda1") c.loss.lambda1 = to_double(k, v);
    else if (k == "loss.lambda2") c.loss.lambda2 = to_double(k, v);
    else if (k == "opt.lr") c.opt.lr = to_double(k, v);
    else if (k == "opt.beta1") c.opt.beta1 = to_double(k, v);
    else if (k == "opt.beta2") c.opt.beta2 = to_double(k, v);
    else if (k == "opt.weight_decay") c.opt.weight_decay = to_double(k, v);
    else if (k == "opt.eps") c.opt.eps = to_double(k, v);
    else if (k == "opt.grad_clip") c.opt.grad_clip = to_double(k, v);
    else if (k == "data.synthetic.size") { c.synth.size = to_int(k, v); synth_touched = true; }
    else if (k == "data.synthetic.count") { c.synth_count = to_int(k, v); synth_touched = true; }
    else if (k == "data.synthetic.n_objects_min") { c.synth.n_objects_min = to_int(k, v); synth_touched = true; }
    else if (k == "data.synthetic.n_objects_max") { c.synth.n_objects_max = to_int(k, v); synth_touched = true; }
    else if (k == "data.synthetic.change_fraction") { c.synth.change_fraction = to_double(k, v); synth_touched = true; }
    else if (k == "data.synthetic.noise_sigma") { c.synth.noise_sigma = to_double(k, v); synth_touched = true; }
    else if (k == "data.synthetic.texture_scale") { c.synth.texture_scale = to_double(k, v); synth_touched = true; }
    else if (k == "data.synthetic.seed") { c.synth.seed = to_u64(k, v); synth_touched = true; }
    else if (k == "data.dataset_dir") c.dataset_dir = v;
    else if (k == "data.augment") c.augment = to_bool(k, v);
    else if (k == "epochs") c.epochs = to_int(k, v);
    else if (k == "batch_size") c.batch_size = to_int(k, v);
    else if (k == "seed") c.seed = to_u64(k, v);
    else if (k == "output_dir") c.output_dir = v;
    else if (k == "precision") {
      if (v == "f32") c.precision = Precision::kF32;
      else if (v == "f64") c.precision = Precision::kF64;
      else throw ConfigError("precision must be f32|f64");
    } else {
      throw ConfigError("unknown config key: " + k);
    }
  }
  if (!c.dataset_dir.empty() && synth_touched)
    throw ConfigError(
        "exactly one data source: set either data.dataset_dir or "
        "data.synthetic.*, not both");
  return c;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  return from_kv(parse_kv_file(path));
}

std::string RunConfig::to_text() const {
  std::ostringstream os;
  os.precision(17);
  os << "model.c_img = " << model.c_img << "\n";
  os << "model.c_hf = " << model.c_hf << "\n";
  os << "model.c_lf = " << model.c_lf << "\n";
  os << "model.heads = " << model.heads << "\n";
  os << "model.stages = " << model.stages << "\n";
  os << "model.fdid_shared = " << (model.fdid_shared ? "true" : "false") << "\n";
  os << "model.eq2_combine = "
     << (model.eq2_combine == Eq2Combine::kConcat ? "concat" : "sum") << "\n";
  os << "model.pcdm_combine = "
     << (model.pcdm_combine == PcdmCombine::kGate ? "gate" : "add") << "\n";
  os << "model.positional_encoding = "
     << (model.positional_encoding ? "true" : "false") << "\n";
  os << "model.classifier_threshold = " << model.classifier_threshold << "\n";
  os << "model.seed = " << model.seed << "\n";
  os << "loss.lambda1 = " << loss.lambda1 << "\n";
  os << "loss.lambda2 = " << loss.lambda2 << "\n";
  os << "opt.lr = " << opt.lr << "\n";
  os << "opt.beta1 = " << opt.beta1 << "\n";
  os << "opt.beta2 = " << opt.beta2 << "\n";
  os << "opt.weight_decay = " << opt.weight_decay << "\n";
  os << "opt.eps = " << opt.eps << "\n";
  os << "opt.grad_clip = " << opt.grad_clip << "\n";
  if (dataset_dir.empty()) {
    os << "data.synthetic.size = " << synth.size << "\n";
    os << "data.synthetic.count = " << synth_count << "\n";
    os << "data.synthetic.n_objects_min = " << synth.n_objects_min << "\n";
    os << "data.synthetic.n_objects_max = " << synth.n_objects_max << "\n";
    os << "data.synthetic.change_fraction = " << synth.change_fraction << "\n";
    os << "data.synthetic.noise_sigma = " << synth.noise_sigma << "\n";
    os << "data.synthetic.texture_scale = " << synth.texture_scale << "\n";
    os << "data.synthetic.seed = " << synth.seed << "\n";
  } else {
    os << "data.dataset_dir = " << dataset_dir << "\n";
  }
  os << "data.augment = " << (augment ? "true" : "false") << "\n";
  os << "epochs = " << epochs << "\n";
  os << "batch_size = " << batch_size << "\n";
  os << "seed = " << seed << "\n";
  os << "output_dir = " << output_dir << "\n";
  os << "precision = " << (precision == Precision::kF32 ? "f32" : "f64") << "\n";
  return os.str();
}

}  // namespace wgdf
