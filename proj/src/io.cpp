#include "brl/io.hpp"

#include <cstring>
#include <fstream>
#include <functional>

#include "json.hpp"

namespace brl {
namespace {

// This code assumes a little-endian host, which covers x86-64 and the
// usual aarch64 configurations.

void write_u32(std::ostream& out, std::uint32_t x) {
  out.write(reinterpret_cast<const char*>(&x), 4);
}

std::uint32_t read_u32(std::istream& in) {
  std::uint32_t x = 0;
  in.read(reinterpret_cast<char*>(&x), 4);
  if (!in) throw std::runtime_error("container: truncated header length");
  return x;
}

void write_payload(std::ostream& out, const std::vector<double>& data,
                   bool as_f32) {
  if (as_f32) {
    std::vector<float> f(data.begin(), data.end());
    out.write(reinterpret_cast<const char*>(f.data()),
              static_cast<std::streamsize>(f.size() * sizeof(float)));
  } else {
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size() * sizeof(double)));
  }
}

std::vector<double> read_payload(std::istream& in, std::size_t count,
                                 const std::string& dtype) {
  std::vector<double> data(count);
  if (dtype == "f32") {
    std::vector<float> f(count);
    in.read(reinterpret_cast<char*>(f.data()),
            static_cast<std::streamsize>(count * sizeof(float)));
    for (std::size_t i = 0; i < count; ++i) data[i] = f[i];
  } else if (dtype == "f64") {
    in.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
  } else {
    throw std::runtime_error("container: unknown dtype " + dtype);
  }
  if (!in) throw std::runtime_error("container: truncated payload");
  return data;
}

void write_container(const std::string& path, const nlohmann::json& header,
                     const char* magic,
                     const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  const std::string h = header.dump();
  out.write(magic, 4);
  write_u32(out, static_cast<std::uint32_t>(h.size()));
  out.write(h.data(), static_cast<std::streamsize>(h.size()));
  body(out);
  if (!out) throw std::runtime_error("write failed: " + path);
}

nlohmann::json read_header(std::istream& in, const char* magic,
                           std::size_t magic_len, const std::string& path) {
  std::vector<char> m(magic_len);
  in.read(m.data(), static_cast<std::streamsize>(magic_len));
  if (!in || std::memcmp(m.data(), magic, magic_len) != 0)
    throw std::runtime_error("bad magic in " + path);
  const std::uint32_t hlen = read_u32(in);
  std::string h(hlen, '\0');
  in.read(h.data(), hlen);
  if (!in) throw std::runtime_error("truncated header in " + path);
  return nlohmann::json::parse(h);
}

}  // namespace

void save_sequence(const std::string& path, const SkeletonSequence& seq,
                   bool as_f32) {
  nlohmann::json h;
  h["dtype"] = as_f32 ? "f32" : "f64";
  h["shape"] = {seq.persons, seq.frames, seq.joints, seq.channels};
  h["label"] = seq.label;
  h["person_mask"] = seq.person_mask;
  write_container(path, h, "SKL1",
                  [&](std::ostream& out) { write_payload(out, seq.data, as_f32); });
}

SkeletonSequence load_sequence(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  const auto h = read_header(in, "SKL1", 4, path);
  const auto shape = h.at("shape").get<std::vector<std::size_t>>();
  if (shape.size() != 4)
    throw std::runtime_error("sequence container must be rank 4: " + path);
  SkeletonSequence seq(shape[0], shape[1], shape[2], shape[3],
                       h.at("label").get<int>());
  if (h.contains("person_mask"))
    seq.person_mask = h.at("person_mask").get<std::vector<std::uint8_t>>();
  seq.data = read_payload(in, seq.size(), h.at("dtype").get<std::string>());
  return seq;
}

void save_matrix(const std::string& path, const std::vector<double>& data,
                 std::size_t rows, std::size_t cols, bool as_f32) {
  if (data.size() != rows * cols)
    throw ShapeError("save_matrix: data size does not match shape");
  nlohmann::json h;
  h["dtype"] = as_f32 ? "f32" : "f64";
  h["shape"] = {rows, cols};
  h["label"] = -1;
  write_container(path, h, "SKL1",
                  [&](std::ostream& out) { write_payload(out, data, as_f32); });
}

Matrix load_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  const auto h = read_header(in, "SKL1", 4, path);
  const auto shape = h.at("shape").get<std::vector<std::size_t>>();
  if (shape.size() != 2)
    throw std::runtime_error("matrix container must be rank 2: " + path);
  Matrix m;
  m.rows = shape[0];
  m.cols = shape[1];
  m.data = read_payload(in, m.rows * m.cols, h.at("dtype").get<std::string>());
  return m;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  nlohmann::json h;
  h["config"] = {{"input_channels", ckpt.config.input_channels},
                 {"joints", ckpt.config.joints},
                 {"frames", ckpt.config.frames},
                 {"num_classes", ckpt.config.num_classes},
                 {"block_channels", ckpt.config.block_channels},
                 {"temporal_kernel", ckpt.config.temporal_kernel},
                 {"temporal_strides", ckpt.config.temporal_strides},
                 {"init_seed", ckpt.config.init_seed}};
  h["graph"] = nlohmann::json::parse(ckpt.graph.to_json_text());
  h["train_counts"] = ckpt.train_counts;
  h["modality"] = ckpt.modality;
  h["epoch"] = ckpt.epoch;
  h["rng_state"] = ckpt.rng_state;
  h["metric_log"] = ckpt.metric_log;
  h["dtype"] = ckpt.as_f32 ? "f32" : "f64";
  h["params"] = nlohmann::json::array();
  for (const auto& t : ckpt.params.values)
    h["params"].push_back({{"name", t.name}, {"shape", t.shape}});
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  const std::string htext = h.dump();
  out.write("BRLCKPT1", 8);
  write_u32(out, static_cast<std::uint32_t>(htext.size()));
  out.write(htext.data(), static_cast<std::streamsize>(htext.size()));
  for (const auto& t : ckpt.params.values) write_payload(out, t.v, ckpt.as_f32);
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  const auto h = read_header(in, "BRLCKPT1", 8, path);
  Checkpoint ckpt;
  const auto& c = h.at("config");
  ckpt.config.input_channels = c.at("input_channels").get<std::size_t>();
  ckpt.config.joints = c.at("joints").get<std::size_t>();
  ckpt.config.frames = c.at("frames").get<std::size_t>();
  ckpt.config.num_classes = c.at("num_classes").get<std::size_t>();
  ckpt.config.block_channels = c.at("block_channels").get<std::vector<std::size_t>>();
  ckpt.config.temporal_kernel = c.at("temporal_kernel").get<std::size_t>();
  ckpt.config.temporal_strides =
      c.at("temporal_strides").get<std::vector<std::size_t>>();
  ckpt.config.init_seed = c.at("init_seed").get<std::uint64_t>();
  ckpt.graph = SkeletonGraph::from_json_text(h.at("graph").dump());
  ckpt.train_counts = h.at("train_counts").get<std::vector<std::size_t>>();
  ckpt.modality = h.at("modality").get<std::string>();
  ckpt.epoch = h.at("epoch").get<std::size_t>();
  ckpt.rng_state = h.at("rng_state").get<std::uint64_t>();
  ckpt.metric_log = h.at("metric_log").get<std::vector<std::string>>();
  ckpt.as_f32 = h.at("dtype").get<std::string>() == "f32";
  for (const auto& pj : h.at("params")) {
    Tensor t(pj.at("name").get<std::string>(),
             pj.at("shape").get<std::vector<std::size_t>>());
    t.v = read_payload(in, t.size(), h.at("dtype").get<std::string>());
    ckpt.params.add(std::move(t));
  }
  return ckpt;
}

}  // namespace brl
