#include "graspq/tensornet/serialize.hpp"

#include <bit>
#include <cstring>
#include <stdexcept>
#include <string>

namespace graspq::tensornet {

namespace {

constexpr char kMagic[4] = {'G', 'Q', 'N', '1'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  bool done() const { return pos_ == bytes_.size(); }

  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }

  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(bytes_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }

  std::string str(std::size_t n) {
    need(n, "name");
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw std::runtime_error(std::string("parameter payload truncated while reading ") + what + " at byte " +
                               std::to_string(pos_));
    }
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize_params(const ParamSet& params) {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  for (const ParamEntry& e : params.entries()) {
    put_u32(out, static_cast<std::uint32_t>(e.name.size()));
    out.insert(out.end(), e.name.begin(), e.name.end());
    put_u32(out, static_cast<std::uint32_t>(e.value.rank()));
    for (std::size_t d : e.value.shape()) put_u32(out, static_cast<std::uint32_t>(d));
    for (double v : e.value.data()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

ParamSet deserialize_params(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw std::runtime_error("parameter payload does not start with GQN1 magic");
  }
  Reader in(bytes.subspan(4));
  ParamSet params;
  while (!in.done()) {
    const std::uint32_t name_len = in.u32("name length");
    std::string name = in.str(name_len);
    const std::uint32_t rank = in.u32("rank");
    Shape shape;
    for (std::uint32_t i = 0; i < rank; ++i) {
      const std::uint32_t d = in.u32("dimension");
      if (d == 0) throw std::runtime_error("parameter '" + name + "' has a zero dimension");
      shape.push_back(d);
    }
    Tensor value(shape);
    in.need(value.size() * 8, "values");
    for (double& v : value.data()) v = std::bit_cast<double>(in.u64("values"));
    const ParamKind kind = kind_from_name(name);
    params.add(std::move(name), std::move(value), kind);
  }
  return params;
}

}  // namespace graspq::tensornet
