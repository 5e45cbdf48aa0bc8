#include "wgdf/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>

#include "json.hpp"

namespace wgdf {

static_assert(std::endian::native == std::endian::little,
              "checkpoint payload assumes a little-endian host");

using json = nlohmann::ordered_json;

namespace {

template <class S>
constexpr const char* dtype_name() {
  return sizeof(S) == 4 ? "f32" : "f64";
}

json model_to_json(const ModelConfig& m) {
  json j;
  j["c_img"] = m.c_img;
  j["c_hf"] = m.c_hf;
  j["c_lf"] = m.c_lf;
  j["heads"] = m.heads;
  j["stages"] = m.stages;
  j["fdid_shared"] = m.fdid_shared;
  j["eq2_combine"] = m.eq2_combine == Eq2Combine::kConcat ? "concat" : "sum";
  j["pcdm_combine"] = m.pcdm_combine == PcdmCombine::kGate ? "gate" : "add";
  j["positional_encoding"] = m.positional_encoding;
  j["classifier_threshold"] = m.classifier_threshold;
  j["seed"] = m.seed;
  return j;
}

ModelConfig model_from_json(const json& j) {
  ModelConfig m;
  m.c_img = j.at("c_img").get<int>();
  m.c_hf = j.at("c_hf").get<int>();
  m.c_lf = j.at("c_lf").get<int>();
  m.heads = j.at("heads").get<int>();
  m.stages = j.at("stages").get<int>();
  m.fdid_shared = j.at("fdid_shared").get<bool>();
  m.eq2_combine = j.at("eq2_combine").get<std::string>() == "sum"
                      ? Eq2Combine::kSum
                      : Eq2Combine::kConcat;
  m.pcdm_combine = j.at("pcdm_combine").get<std::string>() == "add"
                       ? PcdmCombine::kAdd
                       : PcdmCombine::kGate;
  m.positional_encoding = j.at("positional_encoding").get<bool>();
  m.classifier_threshold = j.at("classifier_threshold").get<double>();
  m.seed = j.at("seed").get<uint64_t>();
  return m;
}

struct RawFile {
  json manifest;
  std::vector<char> payload;
};

RawFile read_container(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  const int64_t file_size = int64_t(in.tellg());
  in.seekg(0);
  char magic[8];
  if (file_size < 16 || !in.read(magic, 8) ||
      std::memcmp(magic, kCheckpointMagic, 8) != 0)
    throw IoError("not a checkpoint file: " + path.string());
  uint64_t mlen = 0;
  in.read(reinterpret_cast<char*>(&mlen), 8);
  if (16 + int64_t(mlen) > file_size)
    throw IoError("truncated checkpoint manifest: " + path.string());
  std::string mtext(mlen, '\0');
  in.read(mtext.data(), std::streamsize(mlen));
  RawFile raw;
  try {
    raw.manifest = json::parse(mtext);
  } catch (const json::exception& e) {
    throw IoError("malformed checkpoint manifest in " + path.string() + ": " +
                  e.what());
  }
  const int version = raw.manifest.value("format_version", -1);
  if (version != kCheckpointVersion)
    throw IoError("unsupported checkpoint format version " +
                  std::to_string(version) + " in " + path.string());
  int64_t payload_size = 0;
  for (const auto& e : raw.manifest.at("entries"))
    payload_size = std::max(payload_size, e.at("offset").get<int64_t>() +
                                              e.at("nbytes").get<int64_t>());
  if (16 + int64_t(mlen) + payload_size > file_size)
    throw IoError("truncated checkpoint payload: " + path.string());
  raw.payload.resize(size_t(payload_size));
  in.read(raw.payload.data(), std::streamsize(payload_size));
  if (in.gcount() != std::streamsize(payload_size))
    throw IoError("truncated checkpoint payload: " + path.string());
  return raw;
}

}  // namespace

CheckpointInfo checkpoint_peek(const std::filesystem::path& path) {
  RawFile raw = read_container(path);
  CheckpointInfo info;
  info.precision = raw.manifest.at("precision").get<std::string>();
  info.model = model_from_json(raw.manifest.at("model"));
  info.has_opt_state = !raw.manifest.at("opt").is_null();
  return info;
}

template <class S>
void checkpoint_save(const std::filesystem::path& path,
                     const WgdfParams<S>& params, const ModelConfig& cfg,
                     const OptState<S>* opt) {
  json manifest;
  manifest["format_version"] = kCheckpointVersion;
  manifest["creator"] = "wgdf";
  manifest["precision"] = dtype_name<S>();
  manifest["model"] = model_to_json(cfg);
  if (opt) {
    json oj;
    oj["lr"] = opt->cfg.lr;
    oj["beta1"] = opt->cfg.beta1;
    oj["beta2"] = opt->cfg.beta2;
    oj["weight_decay"] = opt->cfg.weight_decay;
    oj["eps"] = opt->cfg.eps;
    oj["grad_clip"] = opt->cfg.grad_clip;
    oj["step_count"] = opt->step_count;
    manifest["opt"] = oj;
  } else {
    manifest["opt"] = nullptr;
  }

  json entries = json::array();
  int64_t offset = 0;
  auto add_entry = [&](const std::string& name, const Shape& shape,
                       int64_t count) {
    json e;
    e["name"] = name;
    e["shape"] = shape;
    e["dtype"] = dtype_name<S>();
    e["offset"] = offset;
    e["nbytes"] = count * int64_t(sizeof(S));
    entries.push_back(e);
    offset += count * int64_t(sizeof(S));
  };
  for (const auto& [name, t] : params.named)
    add_entry("param/" + name, t.shape(), t.numel());
  if (opt) {
    for (size_t i = 0; i < params.named.size(); ++i)
      add_entry("opt/m/" + params.named[i].first,
                params.named[i].second.shape(),
                params.named[i].second.numel());
    for (size_t i = 0; i < params.named.size(); ++i)
      add_entry("opt/v/" + params.named[i].first,
                params.named[i].second.shape(),
                params.named[i].second.numel());
  }
  manifest["entries"] = entries;

  const std::string mtext = manifest.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out.write(kCheckpointMagic, 8);
  const uint64_t mlen = mtext.size();
  out.write(reinterpret_cast<const char*>(&mlen), 8);
  out.write(mtext.data(), std::streamsize(mtext.size()));
  auto write_vec = [&](const S* data, int64_t count) {
    out.write(reinterpret_cast<const char*>(data),
              std::streamsize(count * int64_t(sizeof(S))));
  };
  for (const auto& [name, t] : params.named)
    write_vec(t.data().data(), t.numel());
  if (opt) {
    for (const auto& m : opt->m) write_vec(m.data(), int64_t(m.size()));
    for (const auto& v : opt->v) write_vec(v.data(), int64_t(v.size()));
  }
  if (!out) throw IoError("failed writing checkpoint " + path.string());
}

template <class S>
LoadedCheckpoint<S> checkpoint_load(const std::filesystem::path& path) {
  RawFile raw = read_container(path);
  const std::string prec = raw.manifest.at("precision").get<std::string>();
  if (prec != dtype_name<S>())
    throw IoError("checkpoint precision is " + prec + ", expected " +
                  dtype_name<S>() + ": " + path.string());

  LoadedCheckpoint<S> out;
  out.model = model_from_json(raw.manifest.at("model"));
  out.params = init_params<S>(out.model);

  // Index the manifest entries by name; all lookups and shape validation
  // happen before any payload is interpreted.
  struct Entry {
    Shape shape;
    int64_t offset = 0, nbytes = 0;
  };
  std::map<std::string, Entry> index;
  for (const auto& e : raw.manifest.at("entries")) {
    Entry ent;
    ent.shape = e.at("shape").get<Shape>();
    ent.offset = e.at("offset").get<int64_t>();
    ent.nbytes = e.at("nbytes").get<int64_t>();
    const std::string dt = e.at("dtype").get<std::string>();
    if (dt != prec)
      throw IoError("checkpoint entry dtype mismatch for " +
                    e.at("name").get<std::string>());
    index.emplace(e.at("name").get<std::string>(), std::move(ent));
  }

  auto fetch = [&](const std::string& name, const Shape& want, S* dst) {
    auto it = index.find(name);
    if (it == index.end())
      throw IoError("checkpoint is missing tensor " + name);
    if (!shape_eq(it->second.shape, want))
      throw IoError("checkpoint shape mismatch for tensor " + name +
                    ": file has " + shape_str(it->second.shape) +
                    ", model expects " + shape_str(want));
    if (it->second.nbytes != shape_numel(want) * int64_t(sizeof(S)))
      throw IoError("checkpoint byte count mismatch for tensor " + name);
    std::memcpy(dst, raw.payload.data() + it->second.offset,
                size_t(it->second.nbytes));
  };

  for (auto& [name, t] : out.params.named)
    fetch("param/" + name, t.shape(), t.mutable_data().data());

  if (!raw.manifest.at("opt").is_null()) {
    const auto& oj = raw.manifest.at("opt");
    AdamWConfig oc;
    oc.lr = oj.at("lr").get<double>();
    oc.beta1 = oj.at("beta1").get<double>();
    oc.beta2 = oj.at("beta2").get<double>();
    oc.weight_decay = oj.at("weight_decay").get<double>();
    oc.eps = oj.at("eps").get<double>();
    oc.grad_clip = oj.at("grad_clip").get<double>();
    OptState<S> st = OptState<S>::init(oc, out.params);
    st.step_count = oj.at("step_count").get<int64_t>();
    for (size_t i = 0; i < out.params.named.size(); ++i) {
      fetch("opt/m/" + out.params.named[i].first,
            out.params.named[i].second.shape(), st.m[i].data());
      fetch("opt/v/" + out.params.named[i].first,
            out.params.named[i].second.shape(), st.v[i].data());
    }
    out.opt = std::move(st);
  }
  return out;
}

template void checkpoint_save<float>(const std::filesystem::path&,
                                     const WgdfParams<float>&,
                                     const ModelConfig&,
                                     const OptState<float>*);
template void checkpoint_save<double>(const std::filesystem::path&,
                                      const WgdfParams<double>&,
                                      const ModelConfig&,
                                      const OptState<double>*);
template LoadedCheckpoint<float> checkpoint_load<float>(
    const std::filesystem::path&);
template LoadedCheckpoint<double> checkpoint_load<double>(
    const std::filesystem::path&);

}  // namespace wgdf
