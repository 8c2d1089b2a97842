#include "textclf/tokenizer.hpp"

#include <fstream>
#include <stdexcept>

namespace textclf {

namespace {

// Minimal UTF-8 decode; invalid bytes decode as U+FFFD and advance by one.
std::uint32_t decode_utf8(const std::string& s, std::size_t& i) {
  const unsigned char b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  auto cont = [&](std::size_t k) {
    return i + k < s.size() &&
           (static_cast<unsigned char>(s[i + k]) & 0xC0) == 0x80;
  };
  if ((b0 & 0xE0) == 0xC0 && cont(1)) {
    std::uint32_t cp = (b0 & 0x1Fu) << 6 |
                       (static_cast<unsigned char>(s[i + 1]) & 0x3Fu);
    i += 2;
    return cp;
  }
  if ((b0 & 0xF0) == 0xE0 && cont(1) && cont(2)) {
    std::uint32_t cp = (b0 & 0x0Fu) << 12 |
                       (static_cast<unsigned char>(s[i + 1]) & 0x3Fu) << 6 |
                       (static_cast<unsigned char>(s[i + 2]) & 0x3Fu);
    i += 3;
    return cp;
  }
  if ((b0 & 0xF8) == 0xF0 && cont(1) && cont(2) && cont(3)) {
    std::uint32_t cp = (b0 & 0x07u) << 18 |
                       (static_cast<unsigned char>(s[i + 1]) & 0x3Fu) << 12 |
                       (static_cast<unsigned char>(s[i + 2]) & 0x3Fu) << 6 |
                       (static_cast<unsigned char>(s[i + 3]) & 0x3Fu);
    i += 4;
    return cp;
  }
  ++i;
  return 0xFFFD;
}

void append_utf8(std::uint32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool is_whitespace(std::uint32_t cp) {
  switch (cp) {
    case ' ': case '\t': case '\n': case '\r':
    case 0x00A0: case 0x2028: case 0x2029: case 0x202F: case 0x205F:
    case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

bool is_control(std::uint32_t cp) {
  if (cp == '\t' || cp == '\n' || cp == '\r') return false;
  if (cp < 0x20 || cp == 0x7F) return true;
  if (cp >= 0x80 && cp <= 0x9F) return true;
  if (cp >= 0x200B && cp <= 0x200F) return true;  // zero-width / marks
  if (cp == 0xFEFF || cp == 0xFFFD) return true;
  return false;
}

bool is_punct(std::uint32_t cp) {
  if ((cp >= 33 && cp <= 47) || (cp >= 58 && cp <= 64) ||
      (cp >= 91 && cp <= 96) || (cp >= 123 && cp <= 126))
    return true;
  if (cp == 0x00A1 || cp == 0x00AB || cp == 0x00B7 || cp == 0x00BB ||
      cp == 0x00BF)
    return true;
  if (cp >= 0x2010 && cp <= 0x2027) return true;  // dashes, quotes, ellipsis
  if (cp >= 0x2030 && cp <= 0x205E) return true;
  return false;
}

// Lowercase plus accent folding for Latin-1 Supplement and Latin Extended-A.
// Other scripts pass through unchanged.
std::uint32_t fold(std::uint32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 32;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) cp += 0x20;  // Latin-1 upper
  switch (cp) {
    case 0xE0: case 0xE1: case 0xE2: case 0xE3: case 0xE4: case 0xE5:
      return 'a';
    case 0xE7: return 'c';
    case 0xE8: case 0xE9: case 0xEA: case 0xEB: return 'e';
    case 0xEC: case 0xED: case 0xEE: case 0xEF: return 'i';
    case 0xF1: return 'n';
    case 0xF2: case 0xF3: case 0xF4: case 0xF5: case 0xF6: case 0xF8:
      return 'o';
    case 0xF9: case 0xFA: case 0xFB: case 0xFC: return 'u';
    case 0xFD: case 0xFF: return 'y';
    default: break;
  }
  if (cp >= 0x100 && cp <= 0x17F) {
    if (cp <= 0x105) return 'a';
    if (cp <= 0x10D) return 'c';
    if (cp <= 0x111) return 'd';
    if (cp <= 0x11B) return 'e';
    if (cp <= 0x123) return 'g';
    if (cp <= 0x127) return 'h';
    if (cp <= 0x131) return 'i';
    if (cp <= 0x133) return cp;  // ij ligature, keep
    if (cp <= 0x135) return 'j';
    if (cp <= 0x138) return 'k';
    if (cp <= 0x142) return 'l';
    if (cp <= 0x14B) return 'n';
    if (cp <= 0x151) return 'o';
    if (cp <= 0x153) return cp;  // oe ligature, keep
    if (cp <= 0x159) return 'r';
    if (cp <= 0x161) return 's';
    if (cp <= 0x167) return 't';
    if (cp <= 0x173) return 'u';
    if (cp <= 0x175) return 'w';
    if (cp <= 0x178) return 'y';
    if (cp <= 0x17E) return 'z';
    return 's';  // long s
  }
  return cp;
}

}  // namespace

Vocabulary::Vocabulary(std::vector<std::string> tokens, std::string continuation_prefix)
    : tokens_(std::move(tokens)), continuation_prefix_(std::move(continuation_prefix)) {
  if (tokens_.empty()) throw std::runtime_error("vocabulary is empty");
  index_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    auto [it, inserted] = index_.emplace(tokens_[i], static_cast<std::int32_t>(i));
    if (!inserted)
      throw std::runtime_error("duplicate vocabulary token: " + tokens_[i]);
  }
  auto it = index_.find("[UNK]");
  if (it == index_.end())
    throw std::runtime_error("vocabulary has no [UNK] entry");
  unk_id_ = it->second;
}

Vocabulary Vocabulary::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open vocabulary file: " + path);
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  return Vocabulary(std::move(tokens));
}

std::int32_t Vocabulary::lookup(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? -1 : it->second;
}

std::vector<std::string> basic_tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) {
      out.push_back(std::move(word));
      word.clear();
    }
  };
  std::size_t i = 0;
  while (i < text.size()) {
    const std::uint32_t raw = decode_utf8(text, i);
    if (is_control(raw)) continue;
    if (is_whitespace(raw)) {
      flush();
      continue;
    }
    const std::uint32_t cp = fold(raw);
    if (is_punct(cp)) {
      flush();
      std::string p;
      append_utf8(cp, p);
      out.push_back(std::move(p));
      continue;
    }
    append_utf8(cp, word);
  }
  flush();
  return out;
}

std::vector<std::int32_t> wordpiece_split(const std::string& word, const Vocabulary& vocab) {
  // codepoint count guard against pathological words
  std::size_t nchars = 0;
  for (std::size_t i = 0; i < word.size();) {
    decode_utf8(word, i);
    ++nchars;
  }
  if (nchars == 0 || nchars > kMaxWordChars) return {vocab.unk_id()};

  std::vector<std::int32_t> ids;
  std::size_t start = 0;
  while (start < word.size()) {
    std::size_t end = word.size();
    std::int32_t match = -1;
    while (end > start) {
      std::string piece = word.substr(start, end - start);
      if (start > 0) piece = vocab.continuation_prefix() + piece;
      match = vocab.lookup(piece);
      if (match >= 0) break;
      // back off to the previous codepoint boundary
      do {
        --end;
      } while (end > start &&
               (static_cast<unsigned char>(word[end]) & 0xC0) == 0x80);
    }
    if (match < 0) return {vocab.unk_id()};
    ids.push_back(match);
    start = end;
  }
  return ids;
}

TokenSequence encode(const std::string& text, const Vocabulary& vocab) {
  TokenSequence seq;
  seq.words = basic_tokenize(text);
  for (const auto& w : seq.words) {
    auto ids = wordpiece_split(w, vocab);
    seq.ids.insert(seq.ids.end(), ids.begin(), ids.end());
  }
  return seq;
}

}  // namespace textclf
