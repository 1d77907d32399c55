#include "rpvfield/field/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "rpvfield/common/error.hpp"

namespace rpvfield::field {

namespace {

constexpr char kMagic[4] = {'R', 'F', 'L', 'D'};
constexpr std::uint32_t kMaxRank = 8;
constexpr std::uint32_t kMaxName = 4096;

template <typename T>
void put(std::ostream& out, T value) {
  static_assert(std::is_integral_v<T>);
  using U = std::make_unsigned_t<T>;
  U u = static_cast<U>(value);
  char bytes[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<char>((u >> (8 * i)) & 0xff);
  out.write(bytes, sizeof(T));
}

void put_double(std::ostream& out, double v) { put(out, std::bit_cast<std::uint64_t>(v)); }

class Reader {
 public:
  Reader(std::istream& in, const std::string& source) : in_(in), source_(source) {}

  void bytes(char* dst, std::size_t n, const char* what) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw ParseError(source_, offset_ + static_cast<std::size_t>(in_.gcount()),
                       std::string("truncated while reading ") + what);
    }
    offset_ += n;
  }

  template <typename T>
  T get(const char* what) {
    unsigned char b[sizeof(T)];
    bytes(reinterpret_cast<char*>(b), sizeof(T), what);
    std::make_unsigned_t<T> u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) u |= static_cast<std::make_unsigned_t<T>>(b[i]) << (8 * i);
    return static_cast<T>(u);
  }

  double get_double(const char* what) { return std::bit_cast<double>(get<std::uint64_t>(what)); }

  std::size_t offset() const { return offset_; }
  [[noreturn]] void fail(std::size_t at, const std::string& what) const { throw ParseError(source_, at, what); }

 private:
  std::istream& in_;
  const std::string& source_;
  std::size_t offset_ = 0;
};

}  // namespace

const diff::Tensor* Checkpoint::find(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return &tensors[i];
  }
  return nullptr;
}

Checkpoint to_checkpoint(const RadianceField& field, std::uint64_t step) {
  return Checkpoint{field.config(), step, field.names(), field.weights()};
}

RadianceField field_from(const Checkpoint& checkpoint) {
  return RadianceField(checkpoint.config, checkpoint.names, checkpoint.tensors);
}

void write_checkpoint(std::ostream& out, const Checkpoint& c) {
  if (c.names.size() != c.tensors.size()) throw std::invalid_argument("checkpoint: names and tensors differ in count");
  out.write(kMagic, 4);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::int32_t>(out, c.config.trunk_layers);
  put<std::int32_t>(out, c.config.trunk_width);
  put<std::int32_t>(out, c.config.pe_frequencies);
  put<std::int32_t>(out, c.config.skip_at);
  put<std::uint64_t>(out, c.config.seed);
  put<std::uint64_t>(out, c.step);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(c.tensors.size()));
  for (std::size_t i = 0; i < c.tensors.size(); ++i) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(c.names[i].size()));
    out.write(c.names[i].data(), static_cast<std::streamsize>(c.names[i].size()));
    const diff::Shape& s = c.tensors[i].shape();
    put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    for (std::size_t d : s) put<std::uint64_t>(out, d);
    for (double v : c.tensors[i].values()) put_double(out, v);
  }
}

Checkpoint read_checkpoint(std::istream& in, const std::string& source) {
  Reader r(in, source);
  char magic[4];
  r.bytes(magic, 4, "magic");
  if (std::memcmp(magic, kMagic, 4) != 0) r.fail(0, "not a field checkpoint (bad magic)");
  const std::size_t version_at = r.offset();
  const auto version = r.get<std::uint32_t>("version");
  if (version != kCheckpointVersion) r.fail(version_at, "unsupported version " + std::to_string(version));

  Checkpoint c;
  c.config.trunk_layers = r.get<std::int32_t>("trunk_layers");
  c.config.trunk_width = r.get<std::int32_t>("trunk_width");
  c.config.pe_frequencies = r.get<std::int32_t>("pe_frequencies");
  c.config.skip_at = r.get<std::int32_t>("skip_at");
  c.config.seed = r.get<std::uint64_t>("seed");
  c.step = r.get<std::uint64_t>("step");
  const auto count = r.get<std::uint32_t>("tensor count");
  for (std::uint32_t t = 0; t < count; ++t) {
    const std::size_t name_at = r.offset();
    const auto len = r.get<std::uint32_t>("name length");
    if (len == 0 || len > kMaxName) r.fail(name_at, "bad tensor name length");
    std::string name(len, '\0');
    r.bytes(name.data(), len, "tensor name");
    const std::size_t rank_at = r.offset();
    const auto rank = r.get<std::uint32_t>("rank");
    if (rank == 0 || rank > kMaxRank) r.fail(rank_at, "bad rank for " + name);
    diff::Shape shape(rank);
    for (auto& d : shape) {
      const std::size_t dim_at = r.offset();
      d = r.get<std::uint64_t>("dims");
      if (d == 0 || d > (std::uint64_t{1} << 32)) r.fail(dim_at, "bad dimension for " + name);
    }
    std::vector<double> values(diff::shape_size(shape));
    for (double& v : values) v = r.get_double("tensor payload");
    c.names.push_back(std::move(name));
    c.tensors.emplace_back(std::move(shape), std::move(values));
  }
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_checkpoint(out, checkpoint);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_checkpoint(in, path.string());
}

}  // namespace rpvfield::field
