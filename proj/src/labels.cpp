#include "swarm/labels.hpp"

#include <cctype>
#include <charconv>
#include <stdexcept>

namespace swarm {

void check_chunk_count(int n) {
  if (n < 1 || n > kMaxChunks) {
    throw std::out_of_range("chunk count " + std::to_string(n) +
                            " outside [1, " + std::to_string(kMaxChunks) + "]");
  }
}

ChunkLabel::ChunkLabel(int n, Mask bits) : n_(n), bits_(bits) {
  check_chunk_count(n);
  if ((bits & ~full_mask(n)) != 0) {
    throw std::out_of_range("label mask has chunks beyond n=" + std::to_string(n));
  }
}

ChunkLabel ChunkLabel::of(int n, std::initializer_list<int> chunks) {
  check_chunk_count(n);
  Mask m = 0;
  for (int c : chunks) {
    if (c < 1 || c > n) throw std::out_of_range("chunk index out of range");
    m |= Mask{1} << (c - 1);
  }
  return ChunkLabel(n, m);
}

ChunkLabel ChunkLabel::parse(int n, std::string_view text) {
  check_chunk_count(n);
  auto skip_ws = [&](std::size_t& i) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  };
  std::size_t i = 0;
  skip_ws(i);
  if (i >= text.size() || text[i] != '{') {
    throw std::invalid_argument("label '" + std::string(text) + "' must start with '{'");
  }
  ++i;
  Mask m = 0;
  skip_ws(i);
  if (i < text.size() && text[i] == '}') {
    ++i;
  } else {
    while (true) {
      skip_ws(i);
      int value = 0;
      auto [ptr, ec] = std::from_chars(text.data() + i, text.data() + text.size(), value);
      if (ec != std::errc{}) {
        throw std::invalid_argument("bad chunk index in label '" + std::string(text) + "'");
      }
      i = static_cast<std::size_t>(ptr - text.data());
      if (value < 1 || value > n) {
        throw std::out_of_range("chunk " + std::to_string(value) + " in label '" +
                                std::string(text) + "' outside 1.." + std::to_string(n));
      }
      m |= Mask{1} << (value - 1);
      skip_ws(i);
      if (i < text.size() && text[i] == ',') {
        ++i;
        continue;
      }
      if (i < text.size() && text[i] == '}') {
        ++i;
        break;
      }
      throw std::invalid_argument("unterminated label '" + std::string(text) + "'");
    }
  }
  skip_ws(i);
  if (i != text.size()) {
    throw std::invalid_argument("trailing characters in label '" + std::string(text) + "'");
  }
  return ChunkLabel(n, m);
}

bool ChunkLabel::contains(int chunk) const {
  return chunk >= 1 && chunk <= n_ && (bits_ >> (chunk - 1)) & 1u;
}

std::string label_string(int n, Mask m) {
  std::string out = "{";
  bool first = true;
  for (int i = 0; i < n; ++i) {
    if ((m >> i) & 1u) {
      if (!first) out += ',';
      out += std::to_string(i + 1);
      first = false;
    }
  }
  out += '}';
  return out;
}

std::string ChunkLabel::to_string() const { return label_string(n_, bits_); }

namespace {
void same_n(const ChunkLabel& a, const ChunkLabel& b) {
  if (a.chunk_count() != b.chunk_count()) {
    throw std::domain_error("labels over different chunk counts (" +
                            std::to_string(a.chunk_count()) + " vs " +
                            std::to_string(b.chunk_count()) + ")");
  }
}
}  // namespace

bool is_subset(const ChunkLabel& a, const ChunkLabel& b) {
  same_n(a, b);
  return mask_subset(a.bits(), b.bits());
}

bool covers(const ChunkLabel& a, const ChunkLabel& b) {
  same_n(a, b);
  return mask_covers(a.bits(), b.bits());
}

bool relates(const ChunkLabel& a, const ChunkLabel& b) {
  same_n(a, b);
  return mask_relates(a.bits(), b.bits());
}

std::vector<ChunkLabel> enumerate_labels(int n) {
  check_chunk_count(n);
  std::vector<ChunkLabel> out;
  out.reserve(std::size_t{1} << n);
  for (Mask m = 0; m <= full_mask(n); ++m) out.emplace_back(n, m);
  return out;
}

std::vector<std::string> label_names(int n) {
  check_chunk_count(n);
  std::vector<std::string> out;
  out.reserve(std::size_t{1} << n);
  for (Mask m = 0; m <= full_mask(n); ++m) out.push_back(label_string(n, m));
  return out;
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace swarm
