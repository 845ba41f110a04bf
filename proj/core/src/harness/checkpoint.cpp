#include "graspq/harness/checkpoint.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>

#include "graspq/tensornet/serialize.hpp"

namespace graspq::harness {

namespace {

constexpr char kMagic[4] = {'G', 'Q', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;
constexpr const char* kQTableEntry = "qtable.rows";

template <class T>
void put(std::vector<std::uint8_t>& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::span<const std::uint8_t> take(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) {
      throw std::runtime_error(std::string("checkpoint truncated while reading ") + what + " at byte " +
                               std::to_string(pos_));
    }
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  template <class T>
  T get(const char* what) {
    const auto s = take(sizeof(T), what);
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(s[i]) << (8 * i);
    return v;
  }

  bool done() const { return pos_ == bytes_.size(); }
  std::size_t pos() const { return pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const tensornet::ParamSet& params, const CheckpointMeta& meta) {
  const auto payload = tensornet::serialize_params(params);
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put<std::uint32_t>(out, kVersion);
  put<std::uint64_t>(out, meta.config_hash);
  put<std::uint64_t>(out, meta.episodes);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(meta.config_text.size()));
  out.insert(out.end(), meta.config_text.begin(), meta.config_text.end());
  put<std::uint64_t>(out, payload.size());
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  const auto magic = r.take(4, "magic");
  if (!std::equal(magic.begin(), magic.end(), std::begin(kMagic))) {
    throw std::runtime_error("not a checkpoint: bad magic");
  }
  const auto version = r.get<std::uint32_t>("version");
  if (version != kVersion) throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  Checkpoint ck;
  ck.meta.config_hash = r.get<std::uint64_t>("config hash");
  ck.meta.episodes = r.get<std::uint64_t>("episode count");
  const auto text_len = r.get<std::uint32_t>("config length");
  const auto text = r.take(text_len, "config text");
  ck.meta.config_text.assign(text.begin(), text.end());
  const auto payload_len = r.get<std::uint64_t>("payload length");
  ck.params = tensornet::deserialize_params(r.take(payload_len, "parameters"));
  if (!r.done()) throw std::runtime_error("checkpoint has trailing bytes at byte " + std::to_string(r.pos()));
  return ck;
}

void save_checkpoint(const tensornet::ParamSet& params, const CheckpointMeta& meta,
                     const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(params, meta);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

tensornet::ParamSet qtable_to_params(const agent::QTable& table) {
  tensornet::ParamSet params;
  if (table.size() == 0) return params;
  std::vector<std::pair<agent::StateCode, agent::QRow>> rows(table.rows().begin(), table.rows().end());
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  constexpr std::size_t width = 1 + world::kActionCount;
  tensornet::Tensor t({rows.size(), width});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    t[i * width] = static_cast<double>(rows[i].first);
    std::copy(rows[i].second.begin(), rows[i].second.end(), t.raw() + i * width + 1);
  }
  params.add(kQTableEntry, std::move(t));
  return params;
}

agent::QTable qtable_from_params(const tensornet::ParamSet& params) {
  agent::QTable table;
  if (params.empty()) return table;
  constexpr std::size_t width = 1 + world::kActionCount;
  if (params.size() != 1 || params.entry(0).name != kQTableEntry ||
      params.entry(0).value.rank() != 2 || params.entry(0).value.dim(1) != width) {
    throw std::invalid_argument("checkpoint does not hold a Q-table");
  }
  const tensornet::Tensor& t = params.entry(0).value;
  for (std::size_t i = 0; i < t.dim(0); ++i) {
    const auto code = static_cast<agent::StateCode>(t[i * width]);
    for (std::size_t a = 0; a < world::kActionCount; ++a) table.set(code, a, t[i * width + 1 + a]);
  }
  return table;
}

}  // namespace graspq::harness
