#include <array>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "deskservo/data.hpp"

namespace deskservo::data {

using nlohmann::json;

namespace {

constexpr std::string_view kAlphabet =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int decode_char(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}

json parse_line(const std::string& line, std::size_t line_no) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::IoError, "line " + std::to_string(line_no) + ": " + e.what());
  }
}

template <typename Fn>
void for_each_record(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      fn(parse_line(line, line_no));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::IoError, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

json label_to_json(const OrientationLabel& l) {
  return {{"t", l.t},
          {"phi", l.phi.radians()},
          {"disp", l.displacement},
          {"size", l.crop.size()},
          {"crop", encode_crop(l.crop)}};
}

OrientationLabel label_from_json(const json& j) {
  OrientationLabel l;
  l.t = j.at("t").get<double>();
  l.phi = Angle(j.at("phi").get<double>());
  l.displacement = j.at("disp").get<double>();
  l.crop = decode_crop(j.at("crop").get<std::string>(), j.at("size").get<int>());
  return l;
}

}  // namespace

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= bytes.size(); i += 3) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  const std::size_t rest = bytes.size() - i;
  if (rest > 0) {
    std::uint32_t v = bytes[i] << 16;
    if (rest == 2) v |= bytes[i + 1] << 8;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += rest == 2 ? kAlphabet[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw Error(ErrorCode::IoError, "base64 length is not a multiple of 4");
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    std::array<int, 4> q{};
    int pad = 0;
    for (int k = 0; k < 4; ++k) {
      const char c = text[i + k];
      if (c == '=' && i + 4 == text.size() && k >= 2) {
        q[k] = 0;
        ++pad;
      } else {
        q[k] = decode_char(c);
        if (q[k] < 0 || pad > 0) throw Error(ErrorCode::IoError, "invalid base64 character");
      }
    }
    const std::uint32_t v = (q[0] << 18) | (q[1] << 12) | (q[2] << 6) | q[3];
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    if (pad < 2) out.push_back(static_cast<std::uint8_t>(v >> 8));
    if (pad < 1) out.push_back(static_cast<std::uint8_t>(v));
  }
  return out;
}

std::string encode_crop(const Crop& crop) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(crop.pixels().size());
  for (double px : crop.pixels())
    bytes.push_back(static_cast<std::uint8_t>(std::lround(std::clamp(px, 0.0, 1.0) * 255.0)));
  return base64_encode(bytes);
}

Crop decode_crop(std::string_view text, int size) {
  const auto bytes = base64_decode(text);
  if (size <= 0 || bytes.size() != static_cast<std::size_t>(size) * size)
    throw Error(ErrorCode::ShapeMismatch, "crop payload does not match its size");
  std::vector<double> px(bytes.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) px[i] = bytes[i] / 255.0;
  return Crop(size, std::move(px));
}

void write_labels(std::ostream& out, std::span<const OrientationLabel> labels) {
  for (const auto& l : labels) out << label_to_json(l).dump() << '\n';
}

std::vector<OrientationLabel> read_labels(std::istream& in) {
  std::vector<OrientationLabel> out;
  for_each_record(in, [&](const json& j) { out.push_back(label_from_json(j)); });
  return out;
}

namespace {

std::string_view split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "train";
}

Split split_from_name(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "val") return Split::Val;
  if (s == "test") return Split::Test;
  throw Error(ErrorCode::IoError, "unknown split '" + s + "'");
}

}  // namespace

void write_dataset(std::ostream& out, const Dataset& dataset) {
  for (std::size_t i = 0; i < dataset.entries.size(); ++i) {
    json j = label_to_json(dataset.entries[i]);
    j["split"] = split_name(dataset.marks[i]);
    out << j.dump() << '\n';
  }
}

Dataset read_dataset(std::istream& in) {
  Dataset ds;
  for_each_record(in, [&](const json& j) {
    ds.entries.push_back(label_from_json(j));
    ds.marks.push_back(split_from_name(j.at("split").get<std::string>()));
  });
  return ds;
}

void write_wander_log(std::ostream& out, std::span<const WanderFrame> frames) {
  for (const auto& f : frames) {
    json j{{"t", f.t}, {"spinning", f.spinning}};
    j["box"] = f.box ? json{{"u", f.box->center.u},
                            {"v", f.box->center.v},
                            {"w", f.box->width},
                            {"h", f.box->height}}
                     : json(nullptr);
    if (f.crop) {
      j["size"] = f.crop->size();
      j["crop"] = encode_crop(*f.crop);
    } else {
      j["crop"] = nullptr;
    }
    j["truth"] = {{"x", f.truth.position.x},
                  {"y", f.truth.position.y},
                  {"theta", f.truth.heading.radians()}};
    out << j.dump() << '\n';
  }
}

std::vector<WanderFrame> read_wander_log(std::istream& in) {
  std::vector<WanderFrame> frames;
  for_each_record(in, [&](const json& j) {
    WanderFrame f;
    f.t = j.at("t").get<double>();
    f.spinning = j.at("spinning").get<bool>();
    if (!j.at("box").is_null()) {
      const auto& b = j["box"];
      f.box = BoundingBox{{b.at("u").get<double>(), b.at("v").get<double>()},
                          b.at("w").get<double>(),
                          b.at("h").get<double>(),
                          f.t};
    }
    if (!j.at("crop").is_null())
      f.crop = decode_crop(j["crop"].get<std::string>(), j.at("size").get<int>());
    const auto& tr = j.at("truth");
    f.truth.position = {tr.at("x").get<double>(), tr.at("y").get<double>()};
    f.truth.heading = Angle(tr.at("theta").get<double>());
    frames.push_back(std::move(f));
  });
  return frames;
}

}  // namespace deskservo::data
