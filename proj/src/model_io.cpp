#include <cstring>
#include <fstream>
#include <sstream>

#include "vcml/classifiers.hpp"

namespace vcml {

namespace {

constexpr char kMagic[8] = {'V', 'C', 'M', 'L', 'M', 'D', 'L', '1'};
constexpr std::uint32_t kFormatVersion = 1;

class Writer {
 public:
  void u8(std::uint8_t v) { buffer_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) { raw(&v, sizeof(v)); }
  void u64(std::uint64_t v) { raw(&v, sizeof(v)); }
  void f64(double v) { raw(&v, sizeof(v)); }
  void f64s(const double* data, std::size_t n) { raw(data, n * sizeof(double)); }
  void raw(const void* data, std::size_t n) {
    const char* p = static_cast<const char*>(data);
    buffer_.append(p, n);
  }
  const std::string& buffer() const { return buffer_; }

 private:
  std::string buffer_;
};

class Reader {
 public:
  explicit Reader(std::string data) : data_(std::move(data)) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(data_.at(take(1))); }
  std::uint32_t u32() {
    std::uint32_t v;
    std::memcpy(&v, data_.data() + take(sizeof(v)), sizeof(v));
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v;
    std::memcpy(&v, data_.data() + take(sizeof(v)), sizeof(v));
    return v;
  }
  double f64() {
    double v;
    std::memcpy(&v, data_.data() + take(sizeof(v)), sizeof(v));
    return v;
  }
  void f64s(double* out, std::size_t n) {
    std::memcpy(out, data_.data() + take(n * sizeof(double)), n * sizeof(double));
  }

 private:
  std::size_t take(std::size_t n) {
    if (pos_ + n > data_.size()) throw Error("model file truncated");
    const std::size_t at = pos_;
    pos_ += n;
    return at;
  }
  std::string data_;
  std::size_t pos_ = 0;
};

void write_payload(const TrainedClassifier& model, Writer& w) {
  switch (model.family()) {
    case Family::logistic:
    case Family::elastic_net: {
      const auto& linear = static_cast<const LinearModel&>(model);
      w.u64(linear.weights().size());
      w.f64s(linear.weights().data(), linear.weights().size());
      w.f64(linear.intercept());
      break;
    }
    case Family::random_forest: {
      const auto& forest = static_cast<const ForestModel&>(model);
      w.u64(forest.trees().size());
      for (const auto& tree : forest.trees()) {
        w.u64(tree.nodes.size());
        for (const auto& node : tree.nodes) {
          w.u32(static_cast<std::uint32_t>(node.feature));
          w.f64(node.threshold);
          w.u32(static_cast<std::uint32_t>(node.left));
          w.u32(static_cast<std::uint32_t>(node.right));
          w.f64(node.p_positive);
        }
      }
      break;
    }
    case Family::neural_net: {
      const auto& mlp = static_cast<const MlpModel&>(model);
      w.u64(mlp.net().layers.size());
      for (const auto& layer : mlp.net().layers) {
        w.u64(layer.weights.rows());
        w.u64(layer.weights.cols());
        w.f64s(layer.weights.data(), layer.weights.rows() * layer.weights.cols());
        w.f64s(layer.bias.data(), layer.bias.size());
      }
      break;
    }
    case Family::majority:
      w.f64(static_cast<const MajorityModel&>(model).constant_probability());
      break;
    case Family::random_vote:
      w.f64(static_cast<const RandomVoteModel&>(model).prevalence());
      break;
  }
}

std::unique_ptr<TrainedClassifier> read_payload(Family family, std::size_t input_dim,
                                                std::uint64_t fingerprint, std::uint64_t seed,
                                                Reader& r) {
  switch (family) {
    case Family::logistic:
    case Family::elastic_net: {
      std::vector<double> weights(r.u64());
      r.f64s(weights.data(), weights.size());
      const double intercept = r.f64();
      return std::make_unique<LinearModel>(family, std::move(weights), intercept, fingerprint, seed);
    }
    case Family::random_forest: {
      std::vector<DecisionTree> trees(r.u64());
      for (auto& tree : trees) {
        tree.nodes.resize(r.u64());
        for (auto& node : tree.nodes) {
          node.feature = static_cast<std::int32_t>(r.u32());
          node.threshold = r.f64();
          node.left = static_cast<std::int32_t>(r.u32());
          node.right = static_cast<std::int32_t>(r.u32());
          node.p_positive = r.f64();
        }
      }
      return std::make_unique<ForestModel>(std::move(trees), input_dim, fingerprint, seed);
    }
    case Family::neural_net: {
      Mlp net;
      net.layers.resize(r.u64());
      for (auto& layer : net.layers) {
        const std::size_t rows = r.u64();
        const std::size_t cols = r.u64();
        layer.weights = Matrix(rows, cols);
        r.f64s(layer.weights.data(), rows * cols);
        layer.bias.resize(rows);
        r.f64s(layer.bias.data(), rows);
      }
      return std::make_unique<MlpModel>(std::move(net), fingerprint, seed);
    }
    case Family::majority:
      return std::make_unique<MajorityModel>(r.f64(), seed);
    case Family::random_vote:
      return std::make_unique<RandomVoteModel>(r.f64(), seed);
  }
  throw Error("model file: unknown family tag");
}

}  // namespace

void save_model(const TrainedClassifier& model, std::ostream& sink) {
  Writer w;
  w.raw(kMagic, sizeof(kMagic));
  w.u32(kFormatVersion);
  w.u8(static_cast<std::uint8_t>(model.family()));
  w.u64(model.input_dim());
  w.u64(model.layout_fingerprint());
  w.u64(model.seed());
  write_payload(model, w);
  const std::uint64_t checksum = fnv1a64(w.buffer());
  sink.write(w.buffer().data(), static_cast<std::streamsize>(w.buffer().size()));
  sink.write(reinterpret_cast<const char*>(&checksum), sizeof(checksum));
  if (!sink) throw Error("save_model: write failed");
}

std::unique_ptr<TrainedClassifier> load_model(std::istream& source) {
  std::ostringstream ss;
  ss << source.rdbuf();
  std::string data = ss.str();
  if (data.size() < sizeof(kMagic) + sizeof(std::uint64_t)) throw Error("model file truncated");

  std::uint64_t stored_checksum;
  std::memcpy(&stored_checksum, data.data() + data.size() - sizeof(stored_checksum),
              sizeof(stored_checksum));
  data.resize(data.size() - sizeof(stored_checksum));
  if (fnv1a64(data) != stored_checksum) throw Error("model file checksum mismatch");

  if (std::memcmp(data.data(), kMagic, sizeof(kMagic)) != 0) throw Error("model file: bad magic");
  Reader r(std::move(data));
  char magic[sizeof(kMagic)];
  for (auto& c : magic) c = static_cast<char>(r.u8());
  const std::uint32_t version = r.u32();
  if (version != kFormatVersion)
    throw Error("model file version " + std::to_string(version) + " unsupported (expected " +
                std::to_string(kFormatVersion) + ")");
  const auto family = static_cast<Family>(r.u8());
  const std::size_t input_dim = r.u64();
  const std::uint64_t fingerprint = r.u64();
  const std::uint64_t seed = r.u64();
  return read_payload(family, input_dim, fingerprint, seed, r);
}

void save_model_file(const TrainedClassifier& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  save_model(model, out);
}

std::unique_ptr<TrainedClassifier> load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model file '" + path + "'");
  return load_model(in);
}

}  // namespace vcml
