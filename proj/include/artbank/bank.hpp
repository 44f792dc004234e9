#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "artbank/attention.hpp"

namespace artbank {

inline constexpr std::string_view kDefaultPromptTemplate = "a painting by {artist} *";
inline constexpr std::string_view kPlaceholderToken = "*";
inline constexpr std::string_view kArtistSlot = "{artist}";
inline constexpr std::uint64_t kDefaultVocabSeed = 0x15b0a7d1ULL;
inline constexpr std::size_t kDefaultStyleChannels = 64;
inline constexpr std::size_t kDefaultStylePositions = 16;
// Rows in the frozen token-embedding table.
inline constexpr std::size_t kVocabRows = 4096;

// One artwork collection: its trainable style matrix, encoder parameters and prompt.
struct StyleBankEntry {
  std::string style_id;
  std::string artist;
  std::string prompt_template{kDefaultPromptTemplate};
  Tensor i_m;
  SsamParams ssam;

  std::size_t channels() const { return i_m.rows(); }
  std::size_t positions() const { return i_m.cols(); }
  // Throws TemplateError / DimensionError on broken invariants.
  void validate() const;
};

// Deterministic given `seed`; matches StyleEncoder::initialize(ssam, C, N, seed).
StyleBankEntry create_entry(std::string style_id, std::string artist, std::size_t channels, std::size_t positions,
                            std::uint64_t seed, std::string prompt_template = std::string(kDefaultPromptTemplate));

StyleEncoder encoder_for(const StyleBankEntry& entry);
// Copies trained encoder values back into `entry`.
void store_encoder(StyleBankEntry& entry, const StyleEncoder& encoder);

class StyleBank {
 public:
  StyleBank() = default;

  // Throws ContractError on a duplicate style_id.
  StyleBankEntry& add(StyleBankEntry entry);
  StyleBankEntry& create_entry(std::string style_id, std::string artist, std::size_t channels,
                               std::size_t positions, std::uint64_t seed,
                               std::string prompt_template = std::string(kDefaultPromptTemplate));

  bool contains(std::string_view style_id) const;
  // Throws NotFoundError naming the id.
  const StyleBankEntry& at(std::string_view style_id) const;
  StyleBankEntry& at(std::string_view style_id);

  const std::vector<StyleBankEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

 private:
  std::vector<StyleBankEntry> entries_;
};

struct TokenEmbeddingSeq {
  std::vector<std::string> tokens;
  std::vector<std::uint64_t> token_ids;
  Tensor embeddings;  // L x width; empty when there are no tokens
  std::optional<std::size_t> placeholder_index;

  std::size_t length() const noexcept { return tokens.size(); }
  std::size_t width() const noexcept { return embeddings.empty() ? 0 : embeddings.cols(); }
};

// Substitutes {artist}, splits on whitespace and looks every token up in a frozen
// hash-embedding table drawn from `vocab_seed` (entries ~ U(-1, 1) / sqrt(width)).
// Throws TemplateError unless exactly one placeholder token is present.
TokenEmbeddingSeq encode_prompt(std::string_view prompt_template, std::string_view artist,
                                std::uint64_t vocab_seed = kDefaultVocabSeed,
                                std::size_t width = kDefaultStyleChannels);

enum class RowSource : std::uint8_t { text, style };

// Token-embedding sequence consumed by the denoiser's cross-attention.
struct ConditionVector {
  Var embeddings;  // rows x width; empty Var when rows() == 0
  std::vector<RowSource> provenance;
  std::size_t width = 0;

  std::size_t rows() const noexcept { return provenance.size(); }
  std::size_t style_row_count() const;
  // Style-tagged rows in order, N x width.
  Tensor style_rows() const;
};

// Replaces the placeholder row with the N columns of v_m (as N rows), or drops it
// when v_m is absent.
ConditionVector assemble_condition(const TokenEmbeddingSeq& seq, const std::optional<Var>& v_m);
inline ConditionVector text_condition(const TokenEmbeddingSeq& seq) { return assemble_condition(seq, std::nullopt); }

TokenEmbeddingSeq entry_prompt(const StyleBankEntry& entry, std::uint64_t vocab_seed = kDefaultVocabSeed);
// Constant condition for inference: prompt embeddings with the encoded style block.
ConditionVector entry_condition(const StyleBankEntry& entry, std::uint64_t vocab_seed = kDefaultVocabSeed);

// Bank file: "ISPB", u16 version 1, u32 entry count, then per entry the
// length-prefixed style_id/artist/template, u32 C, u32 N and the float64 arrays
// i_m, w_q, w_k, w_v, w_col, w_row, alpha. All integers little-endian.
inline constexpr std::uint16_t kBankVersion = 1;
std::vector<std::uint8_t> serialize_bank(const StyleBank& bank);
StyleBank deserialize_bank(std::span<const std::uint8_t> bytes);
void save_bank(const StyleBank& bank, const std::filesystem::path& path);
StyleBank load_bank(const std::filesystem::path& path);

}  // namespace artbank
