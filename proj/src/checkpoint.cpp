#include "tabsynth/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "tabsynth/errors.hpp"

namespace tabsynth {
namespace {

class Writer {
 public:
  template <typename T>
  void uint(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out_.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xFF));
  }
  void f32(float v) { uint(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { uint(std::bit_cast<std::uint64_t>(v)); }
  void u32(std::size_t v) {
    if (v > 0xFFFFFFFFu) throw DataError("checkpoint field exceeds 32 bits");
    uint(static_cast<std::uint32_t>(v));
  }
  void str(std::string_view s) {
    u32(s.size());
    out_.append(s);
  }
  void raw(std::string_view s) { out_.append(s); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}

  template <typename T>
  T uint() {
    need(sizeof(T));
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }
  float f32() { return std::bit_cast<float>(uint<std::uint32_t>()); }
  double f64() { return std::bit_cast<double>(uint<std::uint64_t>()); }
  std::size_t u32() { return uint<std::uint32_t>(); }
  std::string str() {
    const std::size_t n = u32();
    need(n);
    std::string s(in_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  std::string_view raw(std::size_t n) {
    need(n);
    const auto s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw DataError("checkpoint is truncated");
  }
  std::string_view in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ck) {
  Writer w;
  w.raw("TBDD");
  w.uint(kCheckpointVersion);

  w.u32(ck.schedule.num_timesteps());
  w.f64(ck.schedule.offset());
  w.f64(ck.schedule.max_beta());

  const DenoiserConfig& dc = ck.model.config();
  w.u32(dc.input_dim);
  w.u32(dc.num_layers);
  w.u32(dc.layer_width);
  w.u32(dc.num_classes);
  w.u32(dc.embed_dim);
  w.f64(dc.dropout);

  w.f64(ck.config.learning_rate);
  w.u32(ck.config.batch_size);
  w.u32(ck.config.iterations);
  w.f64(ck.config.sample_proportion);
  w.uint(ck.config.seed);

  const auto params = ck.model.parameters();
  w.u32(params.size());
  for (const MatrixF* p : params) {
    w.u32(static_cast<std::size_t>(p->rows()));
    w.u32(static_cast<std::size_t>(p->cols()));
    for (Eigen::Index i = 0; i < p->size(); ++i) w.f32(p->data()[i]);
  }

  const Schema& schema = ck.preprocess.schema();
  w.uint(static_cast<std::uint8_t>(schema.task));
  w.u32(schema.columns.size());
  for (const auto& c : schema.columns) {
    w.str(c.name);
    w.uint(static_cast<std::uint8_t>(c.kind));
  }
  w.u32(schema.categorical.size());
  for (const auto& c : schema.categorical) {
    w.str(c.name);
    w.u32(c.vocabulary.size());
    for (const auto& v : c.vocabulary) w.str(v);
  }
  w.str(schema.target);
  w.u32(schema.target_vocabulary.size());
  for (const auto& v : schema.target_vocabulary) w.str(v);

  w.u32(ck.preprocess.transforms().size());
  for (const auto& qt : ck.preprocess.transforms()) {
    w.u32(qt.landmarks().size());
    for (double v : qt.landmarks()) w.f64(v);
  }

  w.uint(static_cast<std::uint64_t>(ck.train_rows));
  w.u32(ck.train_class_counts.size());
  for (std::size_t c : ck.train_class_counts) w.uint(static_cast<std::uint64_t>(c));
  return w.take();
}

Checkpoint deserialize_checkpoint(std::string_view bytes) {
  Reader r(bytes);
  if (bytes.size() < 4 || r.raw(4) != "TBDD") throw DataError("not a checkpoint file (bad magic)");
  const auto version = r.uint<std::uint16_t>();
  if (version != kCheckpointVersion) {
    throw DataError("checkpoint format version " + std::to_string(version) + " is not supported (expected " +
                    std::to_string(kCheckpointVersion) + ")");
  }
  Checkpoint ck;
  const std::size_t T = r.u32();
  const double offset = r.f64();
  const double max_beta = r.f64();
  ck.schedule = NoiseSchedule::cosine(T, offset, max_beta);

  DenoiserConfig dc;
  dc.input_dim = r.u32();
  dc.num_layers = r.u32();
  dc.layer_width = r.u32();
  dc.num_classes = r.u32();
  dc.embed_dim = r.u32();
  dc.dropout = r.f64();

  ck.config.learning_rate = r.f64();
  ck.config.batch_size = r.u32();
  ck.config.iterations = r.u32();
  ck.config.sample_proportion = r.f64();
  ck.config.seed = r.uint<std::uint64_t>();
  ck.config.num_timesteps = T;
  ck.config.num_layers = dc.num_layers;
  ck.config.layer_width = dc.layer_width;

  try {
    ck.model = DenoiserModel<float>(dc, 0);
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("checkpoint holds an invalid denoiser config: ") + e.what());
  }
  const auto params = ck.model.parameters();
  if (r.u32() != params.size()) throw DataError("checkpoint tensor count does not match the denoiser config");
  for (MatrixF* p : params) {
    const std::size_t rows = r.u32();
    const std::size_t cols = r.u32();
    if (rows != static_cast<std::size_t>(p->rows()) || cols != static_cast<std::size_t>(p->cols())) {
      throw DataError("checkpoint tensor shape does not match the denoiser config");
    }
    for (Eigen::Index i = 0; i < p->size(); ++i) p->data()[i] = r.f32();
  }

  Schema schema;
  const auto task = r.uint<std::uint8_t>();
  if (task > 2) throw DataError("checkpoint has an unknown task kind");
  schema.task = static_cast<TaskKind>(task);
  const std::size_t ncols = r.u32();
  for (std::size_t i = 0; i < ncols; ++i) {
    ColumnSpec c;
    c.name = r.str();
    const auto kind = r.uint<std::uint8_t>();
    if (kind > 2) throw DataError("checkpoint has an unknown column kind");
    c.kind = static_cast<ColumnKind>(kind);
    if (c.kind == ColumnKind::kNumerical) schema.numerical.push_back(c.name);
    schema.columns.push_back(std::move(c));
  }
  const std::size_t ncat = r.u32();
  for (std::size_t i = 0; i < ncat; ++i) {
    CategoricalSpec c;
    c.name = r.str();
    const std::size_t k = r.u32();
    for (std::size_t j = 0; j < k; ++j) c.vocabulary.push_back(r.str());
    schema.categorical.push_back(std::move(c));
  }
  schema.target = r.str();
  const std::size_t nlabels = r.u32();
  for (std::size_t j = 0; j < nlabels; ++j) schema.target_vocabulary.push_back(r.str());

  std::vector<QuantileTransform> transforms;
  const std::size_t nt = r.u32();
  for (std::size_t i = 0; i < nt; ++i) {
    std::vector<double> landmarks(r.u32());
    for (double& v : landmarks) v = r.f64();
    try {
      transforms.push_back(QuantileTransform::from_landmarks(std::move(landmarks)));
    } catch (const std::invalid_argument& e) {
      throw DataError(std::string("checkpoint quantile state is invalid: ") + e.what());
    }
  }
  ck.preprocess = Preprocessor::from_parts(std::move(schema), std::move(transforms));

  ck.train_rows = static_cast<std::size_t>(r.uint<std::uint64_t>());
  const std::size_t nclasses = r.u32();
  for (std::size_t i = 0; i < nclasses; ++i) ck.train_class_counts.push_back(static_cast<std::size_t>(r.uint<std::uint64_t>()));
  if (!r.done()) throw DataError("checkpoint has trailing bytes");
  if (ck.preprocess.encoded_width() != dc.input_dim) throw DataError("checkpoint preprocessing does not match the model width");
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  const std::string bytes = serialize_checkpoint(checkpoint);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_checkpoint(ss.str());
}

}  // namespace tabsynth
