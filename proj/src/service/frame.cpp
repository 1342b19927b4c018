#include <algorithm>
#include <array>
#include <cmath>
#include <csetjmp>

#include <png.h>

#include "deskservo/service.hpp"

namespace deskservo::service {
namespace {

using Rgb = std::array<std::uint8_t, 3>;

constexpr Rgb kFloorLight{196, 190, 178};
constexpr Rgb kFloorDark{170, 164, 152};
constexpr Rgb kBeyond{60, 60, 66};
constexpr Rgb kChassis{150, 150, 156};
constexpr Rgb kWedge{236, 236, 240};
constexpr Rgb kTrack{40, 120, 220};
constexpr Rgb kFence{220, 150, 40};
constexpr Rgb kBox{40, 200, 90};

class Canvas {
 public:
  Canvas(int w, int h) : w_(w), h_(h), px_(static_cast<std::size_t>(w) * h * 3, 0) {}

  void set(int x, int y, Rgb c) {
    if (x < 0 || y < 0 || x >= w_ || y >= h_) return;
    auto* p = &px_[(static_cast<std::size_t>(y) * w_ + x) * 3];
    p[0] = c[0];
    p[1] = c[1];
    p[2] = c[2];
  }

  void line(ImagePoint a, ImagePoint b, Rgb c, int thickness = 2) {
    const double len = std::max(norm(b - a), 1.0);
    const int steps = static_cast<int>(std::ceil(len));
    for (int i = 0; i <= steps; ++i) {
      const ImagePoint p = a + (static_cast<double>(i) / steps) * (b - a);
      for (int dy = -thickness / 2; dy <= thickness / 2; ++dy)
        for (int dx = -thickness / 2; dx <= thickness / 2; ++dx)
          set(static_cast<int>(std::lround(p.u)) + dx, static_cast<int>(std::lround(p.v)) + dy, c);
    }
  }

  std::vector<std::uint8_t> take() { return std::move(px_); }

 private:
  int w_, h_;
  std::vector<std::uint8_t> px_;
};

}  // namespace

std::vector<std::uint8_t> render_frame_rgb(const sim::World& world, const FrameOverlay& overlay) {
  const CameraModel& cam = world.camera();
  const int w = cam.width(), h = cam.height();
  Canvas canvas(w, h);
  const sim::Pose2D& pose = world.pose();
  const double r = world.robot().radius;
  const double c = std::cos(pose.heading.radians()), s = std::sin(pose.heading.radians());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      GroundPoint g;
      try {
        g = cam.unproject({x + 0.5, y + 0.5});
      } catch (const Error&) {
        canvas.set(x, y, kBeyond);
        continue;
      }
      if (std::abs(g.x) > 50.0 || g.y < -50.0 || g.y > 50.0) {
        canvas.set(x, y, kBeyond);
        continue;
      }
      const double gx = g.x - pose.position.x, gy = g.y - pose.position.y;
      const double bx = (c * gx + s * gy) / r, by = (-s * gx + c * gy) / r;
      if (bx * bx + by * by <= 1.0) {
        const bool wedge = bx >= -0.6 && bx <= 0.95 && std::abs(by) <= 0.6 * (0.95 - bx) / 1.55;
        canvas.set(x, y, wedge ? kWedge : kChassis);
        continue;
      }
      const bool even = (static_cast<long>(std::floor(g.x / 0.25)) +
                         static_cast<long>(std::floor(g.y / 0.25))) % 2 == 0;
      canvas.set(x, y, even ? kFloorLight : kFloorDark);
    }
  }
  if (overlay.fence) {
    const auto& v = overlay.fence->vertices();
    for (std::size_t i = 0; i < v.size(); ++i) canvas.line(v[i], v[(i + 1) % v.size()], kFence);
  }
  if (overlay.track) {
    const auto& v = overlay.track->waypoints();
    for (std::size_t i = 0; i + 1 < v.size(); ++i) canvas.line(v[i], v[i + 1], kTrack, 3);
  }
  if (overlay.box) {
    const auto& b = *overlay.box;
    const ImagePoint tl{b.center.u - b.width / 2, b.center.v - b.height / 2};
    const ImagePoint br{b.center.u + b.width / 2, b.center.v + b.height / 2};
    canvas.line(tl, {br.u, tl.v}, kBox);
    canvas.line({br.u, tl.v}, br, kBox);
    canvas.line(br, {tl.u, br.v}, kBox);
    canvas.line({tl.u, br.v}, tl, kBox);
  }
  return canvas.take();
}

std::vector<std::uint8_t> encode_png(std::span<const std::uint8_t> rgb, int width, int height) {
  if (width <= 0 || height <= 0 || rgb.size() != static_cast<std::size_t>(width) * height * 3)
    throw Error(ErrorCode::ShapeMismatch, "RGB buffer does not match the frame size");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error(ErrorCode::IoError, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error(ErrorCode::IoError, "png_create_info_struct failed");
  }
  std::vector<std::uint8_t> out;
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::IoError, "PNG encoding failed");
  }
  png_set_write_fn(
      png, &out,
      [](png_structp p, png_bytep data, png_size_t len) {
        auto* buf = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(p));
        buf->insert(buf->end(), data, data + len);
      },
      nullptr);
  png_set_IHDR(png, info, width, height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 3);
  for (int y = 0; y < height; ++y)
    rows[y] = const_cast<png_bytep>(rgb.data() + static_cast<std::size_t>(y) * width * 3);
  png_set_rows(png, info, rows.data());
  png_write_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

}  // namespace deskservo::service
