#include "dlsa/envelope.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <iterator>
#include <string>

#include "dlsa/errors.hpp"

namespace dlsa::wire {
namespace {

class Writer {
 public:
  explicit Writer(std::size_t capacity) { out_.reserve(capacity); }

  template <class T>
  void put(T value) {
    using U = std::make_unsigned_t<T>;
    auto v = static_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      out_.push_back(static_cast<std::uint8_t>(v & 0xFF));
      v = static_cast<U>(v >> 8);
    }
  }
  void put_double(double d) { put(std::bit_cast<std::uint64_t>(d)); }
  void put_bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
  Bytes take() { return std::move(out_); }
  std::span<const std::uint8_t> view() const { return out_; }

 private:
  Bytes out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  template <class T>
  T get() {
    if (pos_ + sizeof(T) > in_.size()) throw InputError("envelope truncated");
    std::make_unsigned_t<T> v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<std::make_unsigned_t<T>>(in_[pos_ + i]) << (8 * i);
    }
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }
  double get_double() { return std::bit_cast<double>(get<std::uint64_t>()); }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Bytes encode(const LocalSummary& summary) {
  const auto q = static_cast<std::size_t>(summary.q());
  Writer w(encoded_size(q));
  w.put_bytes(kMagic);
  w.put<std::uint32_t>(kSchemaVersion);
  w.put<std::uint16_t>(static_cast<std::uint16_t>(summary.family().kind()));
  w.put<std::uint16_t>(static_cast<std::uint16_t>(summary.family().num_cutpoints()));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(q));
  w.put<std::uint64_t>(summary.partition_id());
  w.put<std::uint64_t>(summary.n());
  const Eigen::VectorXd theta = summary.theta_hat().stacked();
  for (Eigen::Index i = 0; i < theta.size(); ++i) w.put_double(theta(i));
  const auto& prec = summary.precision();
  for (Eigen::Index r = 0; r < prec.rows(); ++r) {
    for (Eigen::Index c = 0; c < prec.cols(); ++c) w.put_double(prec(r, c));
  }
  w.put<std::uint64_t>(fnv1a64(w.view()));
  return w.take();
}

LocalSummary decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < encoded_size(0)) throw InputError("envelope truncated");
  if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw InputError("not a summary envelope (bad magic)");
  }
  Reader r(bytes.subspan(kMagic.size()));
  const auto version = r.get<std::uint32_t>();
  if (version != kSchemaVersion) {
    throw InputError("unsupported envelope schema version " + std::to_string(version));
  }
  const auto kind = r.get<std::uint16_t>();
  const auto ncut = r.get<std::uint16_t>();
  const auto q = r.get<std::uint32_t>();
  if (bytes.size() != encoded_size(q)) {
    throw InputError("envelope size " + std::to_string(bytes.size()) + " does not match q = " +
                     std::to_string(q));
  }
  const auto body = bytes.first(bytes.size() - 8);
  Reader tail(bytes.last(8));
  if (tail.get<std::uint64_t>() != fnv1a64(body)) {
    throw ChecksumMismatch("envelope checksum mismatch");
  }
  const auto family = ModelFamily::from_tag(kind, ncut);
  if (ncut > q) throw InputError("cutpoint count exceeds q");
  const auto partition_id = r.get<std::uint64_t>();
  const auto n = r.get<std::uint64_t>();
  Eigen::VectorXd theta(q);
  for (std::uint32_t i = 0; i < q; ++i) theta(i) = r.get_double();
  Eigen::MatrixXd prec(q, q);
  for (std::uint32_t i = 0; i < q; ++i) {
    for (std::uint32_t j = 0; j < q; ++j) prec(i, j) = r.get_double();
  }
  return LocalSummary(family, partition_id, n, ParamVector::from_stacked(theta, ncut), prec);
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InputError("failed writing " + path.string());
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace dlsa::wire
