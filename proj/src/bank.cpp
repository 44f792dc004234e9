#include "artbank/bank.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "artbank/binary_io.hpp"
#include "artbank/errors.hpp"
#include "artbank/ops.hpp"

namespace artbank {

namespace {

std::string substitute_artist(std::string_view prompt_template, std::string_view artist) {
  std::string out(prompt_template);
  std::size_t pos = 0;
  while ((pos = out.find(kArtistSlot, pos)) != std::string::npos) {
    out.replace(pos, kArtistSlot.size(), artist);
    pos += artist.size();
  }
  return out;
}

std::vector<std::string> split_whitespace(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> tokens;
  for (std::string t; in >> t;) tokens.push_back(std::move(t));
  return tokens;
}

std::size_t count_placeholders(const std::vector<std::string>& tokens) {
  return static_cast<std::size_t>(std::count(tokens.begin(), tokens.end(), kPlaceholderToken));
}

}  // namespace

void StyleBankEntry::validate() const {
  const auto tokens = split_whitespace(substitute_artist(prompt_template, artist));
  if (count_placeholders(tokens) != 1) {
    throw TemplateError("entry '" + style_id + "': template '" + prompt_template +
                        "' must contain exactly one placeholder token '*'");
  }
  if (i_m.rank() != 2) throw DimensionError("entry '" + style_id + "': style matrix must be C x N");
  ssam.validate(i_m.rows(), i_m.cols());
}

StyleBankEntry create_entry(std::string style_id, std::string artist, std::size_t channels, std::size_t positions,
                            std::uint64_t seed, std::string prompt_template) {
  if (channels == 0 || positions == 0) throw ConfigError("entry dimensions C and N must be at least 1");
  StyleBankEntry entry;
  entry.style_id = std::move(style_id);
  entry.artist = std::move(artist);
  entry.prompt_template = std::move(prompt_template);
  entry.i_m = init_style_matrix(channels, positions, seed);
  Rng rng(derive_seed(seed, "attention"));
  entry.ssam = init_ssam_params(channels, positions, rng);
  entry.validate();
  return entry;
}

StyleEncoder encoder_for(const StyleBankEntry& entry) { return StyleEncoder::from_ssam(entry.i_m, entry.ssam); }

void store_encoder(StyleBankEntry& entry, const StyleEncoder& encoder) {
  if (encoder.channels() != entry.channels() || encoder.positions() != entry.positions()) {
    throw DimensionError("encoder dimensions differ from entry '" + entry.style_id + "'");
  }
  entry.i_m = encoder.style_matrix();
  entry.ssam = encoder.ssam_params();
}

StyleBankEntry& StyleBank::add(StyleBankEntry entry) {
  if (contains(entry.style_id)) throw ContractError("duplicate style_id '" + entry.style_id + "' in bank");
  entry.validate();
  entries_.push_back(std::move(entry));
  return entries_.back();
}

StyleBankEntry& StyleBank::create_entry(std::string style_id, std::string artist, std::size_t channels,
                                        std::size_t positions, std::uint64_t seed, std::string prompt_template) {
  if (contains(style_id)) throw ContractError("duplicate style_id '" + style_id + "' in bank");
  return add(artbank::create_entry(std::move(style_id), std::move(artist), channels, positions, seed,
                                   std::move(prompt_template)));
}

bool StyleBank::contains(std::string_view style_id) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const auto& e) { return e.style_id == style_id; });
}

const StyleBankEntry& StyleBank::at(std::string_view style_id) const {
  for (const auto& e : entries_) {
    if (e.style_id == style_id) return e;
  }
  throw NotFoundError("unknown style_id '" + std::string(style_id) + "'");
}

StyleBankEntry& StyleBank::at(std::string_view style_id) {
  return const_cast<StyleBankEntry&>(std::as_const(*this).at(style_id));
}

TokenEmbeddingSeq encode_prompt(std::string_view prompt_template, std::string_view artist, std::uint64_t vocab_seed,
                                std::size_t width) {
  if (width == 0) throw ConfigError("embedding width must be positive");
  TokenEmbeddingSeq seq;
  seq.tokens = split_whitespace(substitute_artist(prompt_template, artist));
  const std::size_t placeholders = count_placeholders(seq.tokens);
  if (placeholders != 1) {
    throw TemplateError("template '" + std::string(prompt_template) + "' has " + std::to_string(placeholders) +
                        " placeholder tokens, expected exactly one '*'");
  }
  const double bound = 1.0 / std::sqrt(static_cast<double>(width));
  std::vector<double> values;
  values.reserve(seq.tokens.size() * width);
  for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
    const std::uint64_t id = fnv1a64(seq.tokens[i]);
    seq.token_ids.push_back(id);
    if (seq.tokens[i] == kPlaceholderToken) seq.placeholder_index = i;
    Rng row(derive_seed(vocab_seed, id % kVocabRows));
    for (std::size_t j = 0; j < width; ++j) values.push_back(row.uniform(-1.0, 1.0) * bound);
  }
  seq.embeddings = Tensor({seq.tokens.size(), width}, std::move(values));
  return seq;
}

std::size_t ConditionVector::style_row_count() const {
  return static_cast<std::size_t>(std::count(provenance.begin(), provenance.end(), RowSource::style));
}

Tensor ConditionVector::style_rows() const {
  const std::size_t n = style_row_count();
  if (n == 0) return Tensor();
  const Tensor& all = embeddings.value();
  std::vector<double> values;
  values.reserve(n * width);
  for (std::size_t r = 0; r < rows(); ++r) {
    if (provenance[r] != RowSource::style) continue;
    for (std::size_t j = 0; j < width; ++j) values.push_back(all.at(r, j));
  }
  return Tensor({n, width}, std::move(values));
}

ConditionVector assemble_condition(const TokenEmbeddingSeq& seq, const std::optional<Var>& v_m) {
  const std::size_t width = seq.width();
  if (v_m && !seq.placeholder_index) throw TemplateError("assemble_condition: sequence has no placeholder");
  if (v_m && (v_m->value().rank() != 2 || v_m->value().rows() != width)) {
    throw DimensionError("assemble_condition: style representation " + shape_str(v_m->shape()) +
                         " does not match embedding width " + std::to_string(width));
  }
  const std::size_t slot = seq.placeholder_index.value_or(seq.length());
  auto text_block = [&](std::size_t begin, std::size_t end) {
    std::vector<double> values(seq.embeddings.data().begin() + static_cast<std::ptrdiff_t>(begin * width),
                               seq.embeddings.data().begin() + static_cast<std::ptrdiff_t>(end * width));
    return Var::constant(Tensor({end - begin, width}, std::move(values)));
  };

  ConditionVector cond;
  cond.width = width;
  std::vector<Var> parts;
  if (slot > 0) {
    parts.push_back(text_block(0, slot));
    cond.provenance.insert(cond.provenance.end(), slot, RowSource::text);
  }
  if (v_m) {
    parts.push_back(transpose(*v_m));
    cond.provenance.insert(cond.provenance.end(), v_m->value().cols(), RowSource::style);
  }
  if (slot + 1 < seq.length()) {
    parts.push_back(text_block(slot + 1, seq.length()));
    cond.provenance.insert(cond.provenance.end(), seq.length() - slot - 1, RowSource::text);
  }
  if (!parts.empty()) cond.embeddings = parts.size() == 1 && !v_m ? parts.front() : concat_rows(parts);
  return cond;
}

TokenEmbeddingSeq entry_prompt(const StyleBankEntry& entry, std::uint64_t vocab_seed) {
  return encode_prompt(entry.prompt_template, entry.artist, vocab_seed, entry.channels());
}

ConditionVector entry_condition(const StyleBankEntry& entry, std::uint64_t vocab_seed) {
  const Tensor v_m = ssam_forward(entry.i_m, entry.ssam);
  return assemble_condition(entry_prompt(entry, vocab_seed), Var::constant(v_m));
}

std::vector<std::uint8_t> serialize_bank(const StyleBank& bank) {
  ByteWriter w;
  w.raw("ISPB");
  w.u16(kBankVersion);
  w.u32(static_cast<std::uint32_t>(bank.size()));
  for (const auto& e : bank.entries()) {
    w.string(e.style_id);
    w.string(e.artist);
    w.string(e.prompt_template);
    w.u32(static_cast<std::uint32_t>(e.channels()));
    w.u32(static_cast<std::uint32_t>(e.positions()));
    w.values(e.i_m.data());
    w.values(e.ssam.w_q.data());
    w.values(e.ssam.w_k.data());
    w.values(e.ssam.w_v.data());
    w.values(e.ssam.w_col.data());
    w.values(e.ssam.w_row.data());
    w.f64(e.ssam.alpha);
  }
  return w.bytes();
}

StyleBank deserialize_bank(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (bytes.size() < 4 || r.raw(4) != "ISPB") throw BadMagicError("not a style bank file (bad magic)");
  const std::uint16_t version = r.u16();
  if (version != kBankVersion) {
    throw VersionError("unsupported bank version " + std::to_string(version) + " (expected " +
                       std::to_string(kBankVersion) + ")");
  }
  const std::uint32_t count = r.u32();
  StyleBank bank;
  for (std::uint32_t k = 0; k < count; ++k) {
    StyleBankEntry e;
    e.style_id = r.string();
    e.artist = r.string();
    e.prompt_template = r.string();
    const std::size_t c = r.u32();
    const std::size_t n = r.u32();
    if (c == 0 || n == 0) throw FormatError("entry '" + e.style_id + "' has zero dimension");
    e.i_m = r.tensor({c, n});
    e.ssam.w_q = r.tensor({c, c});
    e.ssam.w_k = r.tensor({c, c});
    e.ssam.w_v = r.tensor({c, c});
    e.ssam.w_col = r.tensor({n, 1});
    e.ssam.w_row = r.tensor({1, n});
    e.ssam.alpha = r.f64();
    bank.add(std::move(e));
  }
  if (r.remaining() != 0) throw FormatError("trailing bytes after " + std::to_string(count) + " bank entries");
  return bank;
}

void save_bank(const StyleBank& bank, const std::filesystem::path& path) {
  write_file_bytes(path, serialize_bank(bank));
}

StyleBank load_bank(const std::filesystem::path& path) { return deserialize_bank(read_file_bytes(path)); }

}  // namespace artbank
