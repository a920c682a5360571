// Text model format, one record per line:
//
//   rgbdgeo-maskforest 1
//   channels <count>
//   channel <name> <padding>            (count lines)
//   trees <count>
//   tree <index> <node count>
//   leaf <probability>                  or
//   split <unary|binary> <channel> <dx1> <dy1> <dx2> <dy2> <threshold> <left> <right>
//   end
//
// Node lines follow their tree header in node-index order.
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>

#include "rgbdgeo/maskforest.h"

namespace rgbdgeo {
namespace {

constexpr std::string_view kMagic = "rgbdgeo-maskforest";
constexpr int kFormatVersion = 1;

std::string FormatDouble(double v) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, result.ptr);
}

double ParseDouble(const std::string& token, int line) {
  double v = 0.0;
  const auto result =
      std::from_chars(token.data(), token.data() + token.size(), v);
  if (result.ec != std::errc() || result.ptr != token.data() + token.size()) {
    throw FormatError("forest model line " + std::to_string(line) +
                      ": bad number '" + token + "'");
  }
  return v;
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::istringstream Next(std::string_view expected_keyword) {
    std::string line;
    while (std::getline(in_, line)) {
      ++number_;
      if (line.empty() || line[0] == '#') continue;
      std::istringstream fields(line);
      std::string keyword;
      fields >> keyword;
      if (keyword != expected_keyword) {
        throw FormatError("forest model line " + std::to_string(number_) +
                          ": expected '" + std::string(expected_keyword) +
                          "', found '" + keyword + "'");
      }
      return fields;
    }
    throw FormatError("forest model: unexpected end of file, expected '" +
                      std::string(expected_keyword) + "'");
  }

  // Next node line: either "leaf" or "split".
  std::pair<std::string, std::istringstream> NextNode() {
    std::string line;
    while (std::getline(in_, line)) {
      ++number_;
      if (line.empty() || line[0] == '#') continue;
      std::istringstream fields(line);
      std::string keyword;
      fields >> keyword;
      return {keyword, std::move(fields)};
    }
    throw FormatError("forest model: unexpected end of file in tree");
  }

  int line() const { return number_; }

 private:
  std::istream& in_;
  int number_ = 0;
};

template <typename T>
T Read(std::istringstream& fields, const LineReader& reader) {
  T value{};
  if (!(fields >> value)) {
    throw FormatError("forest model line " + std::to_string(reader.line()) +
                      ": missing or malformed field");
  }
  return value;
}

double ReadDouble(std::istringstream& fields, const LineReader& reader) {
  return ParseDouble(Read<std::string>(fields, reader), reader.line());
}

}  // namespace

void WriteForest(std::ostream& out, const Forest& forest) {
  forest.Validate();
  out << kMagic << ' ' << kFormatVersion << '\n';
  out << "channels " << forest.channel_names.size() << '\n';
  for (size_t c = 0; c < forest.channel_names.size(); ++c) {
    out << "channel " << forest.channel_names[c] << ' '
        << FormatDouble(forest.padding[c]) << '\n';
  }
  out << "trees " << forest.trees.size() << '\n';
  for (size_t t = 0; t < forest.trees.size(); ++t) {
    const auto& nodes = forest.trees[t].nodes;
    out << "tree " << t << ' ' << nodes.size() << '\n';
    for (const TreeNode& node : nodes) {
      if (node.IsLeaf()) {
        out << "leaf " << FormatDouble(node.probability) << '\n';
        continue;
      }
      const SplitQuestion& q = node.question;
      out << "split "
          << (q.kind == QuestionKind::kUnary ? "unary" : "binary") << ' '
          << q.channel << ' ' << q.dx1 << ' ' << q.dy1 << ' ' << q.dx2 << ' '
          << q.dy2 << ' ' << FormatDouble(q.threshold) << ' ' << node.left
          << ' ' << node.right << '\n';
    }
  }
  out << "end\n";
  if (!out) throw IoError("forest model: write failed");
}

Forest ReadForest(std::istream& in) {
  LineReader reader(in);
  {
    auto header = reader.Next(kMagic);
    const int version = Read<int>(header, reader);
    if (version != kFormatVersion) {
      throw FormatError("forest model: unsupported version " +
                        std::to_string(version));
    }
  }
  Forest forest;
  auto channels_line = reader.Next("channels");
  const int channels = Read<int>(channels_line, reader);
  if (channels < 0 || channels > 4096) {
    throw FormatError("forest model: bad channel count");
  }
  for (int c = 0; c < channels; ++c) {
    auto fields = reader.Next("channel");
    forest.channel_names.push_back(Read<std::string>(fields, reader));
    forest.padding.push_back(ReadDouble(fields, reader));
  }
  auto trees_line = reader.Next("trees");
  const int trees = Read<int>(trees_line, reader);
  if (trees < 0 || trees > 4096) {
    throw FormatError("forest model: bad tree count");
  }
  forest.trees.resize(trees);
  for (int t = 0; t < trees; ++t) {
    auto fields = reader.Next("tree");
    if (Read<int>(fields, reader) != t) {
      throw FormatError("forest model: trees out of order");
    }
    const long long node_count = Read<long long>(fields, reader);
    if (node_count < 1 || node_count > (1LL << 26)) {
      throw FormatError("forest model: bad node count");
    }
    auto& nodes = forest.trees[t].nodes;
    nodes.resize(static_cast<size_t>(node_count));
    for (auto& node : nodes) {
      auto [keyword, node_fields] = reader.NextNode();
      if (keyword == "leaf") {
        node.probability = ReadDouble(node_fields, reader);
      } else if (keyword == "split") {
        const auto kind = Read<std::string>(node_fields, reader);
        if (kind == "unary") {
          node.question.kind = QuestionKind::kUnary;
        } else if (kind == "binary") {
          node.question.kind = QuestionKind::kBinary;
        } else {
          throw FormatError("forest model line " +
                            std::to_string(reader.line()) +
                            ": unknown question kind '" + kind + "'");
        }
        node.question.channel = Read<int>(node_fields, reader);
        node.question.dx1 = Read<int>(node_fields, reader);
        node.question.dy1 = Read<int>(node_fields, reader);
        node.question.dx2 = Read<int>(node_fields, reader);
        node.question.dy2 = Read<int>(node_fields, reader);
        node.question.threshold = ReadDouble(node_fields, reader);
        node.left = Read<int>(node_fields, reader);
        node.right = Read<int>(node_fields, reader);
      } else {
        throw FormatError("forest model line " +
                          std::to_string(reader.line()) +
                          ": expected 'leaf' or 'split', found '" + keyword +
                          "'");
      }
    }
  }
  reader.Next("end");
  forest.Validate();
  return forest;
}

void SaveForest(const std::string& path, const Forest& forest) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  WriteForest(out, forest);
}

Forest LoadForest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return ReadForest(in);
}

}  // namespace rgbdgeo
