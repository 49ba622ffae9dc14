#include "otrack/io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <memory>
#include <set>
#include <sstream>

namespace otrack {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::string& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) fail(ErrorKind::IO, "cannot open " + path);
    return f;
}

bool has_png_signature(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::IO, "cannot open " + path);
    unsigned char sig[8] = {};
    in.read(reinterpret_cast<char*>(sig), 8);
    return in.gcount() == 8 && png_sig_cmp(sig, 0, 8) == 0;
}

Image2D load_png(const std::string& path) {
    FilePtr fp = open_file(path, "rb");
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) fail(ErrorKind::IO, "libpng initialization failed");
    Image2D img;
    std::string err;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(ErrorKind::IO, "corrupt PNG file " + path);
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);
    int color = png_get_color_type(png, info);
    int depth = png_get_bit_depth(png, info);
    if (color != PNG_COLOR_TYPE_GRAY && color != PNG_COLOR_TYPE_GRAY_ALPHA) err = "only grayscale PNG is supported";
    if (depth != 8 && depth != 16) err = "unsupported PNG bit depth " + std::to_string(depth);
    if (!err.empty()) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(ErrorKind::IO, err + ": " + path);
    }
    if (color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_strip_alpha(png);
    png_read_update_info(png, info);
    int w = int(png_get_image_width(png, info)), h = int(png_get_image_height(png, info));
    std::size_t rowbytes = png_get_rowbytes(png, info);
    std::vector<png_byte> buf(rowbytes * h);
    std::vector<png_bytep> rows(h);
    for (int j = 0; j < h; ++j) rows[j] = buf.data() + rowbytes * j;
    png_read_image(png, rows.data());
    png_destroy_read_struct(&png, &info, nullptr);
    img = Image2D(w, h);
    for (int j = 0; j < h; ++j)
        for (int i = 0; i < w; ++i) {
            if (depth == 8)
                img(i, j) = rows[j][i] / 255.0;
            else
                img(i, j) = ((rows[j][2 * i] << 8) | rows[j][2 * i + 1]) / 65535.0;
        }
    return img;
}

// Next whitespace-separated token of a PNM header, skipping comments.
std::string pnm_token(std::istream& in) {
    std::string tok;
    char c;
    while (in.get(c)) {
        if (c == '#') {
            std::string line;
            std::getline(in, line);
            if (!tok.empty()) break;
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!tok.empty()) break;
            continue;
        }
        tok += c;
    }
    return tok;
}

Image2D load_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::IO, "cannot open " + path);
    std::string magic = pnm_token(in);
    if (magic != "P2" && magic != "P5") fail(ErrorKind::IO, "unsupported image format: " + path);
    int w = 0, h = 0, maxval = 0;
    try {
        w = std::stoi(pnm_token(in));
        h = std::stoi(pnm_token(in));
        maxval = std::stoi(pnm_token(in));
    } catch (const std::exception&) {
        fail(ErrorKind::IO, "malformed PGM header: " + path);
    }
    if (w <= 0 || h <= 0) fail(ErrorKind::IO, "malformed PGM header: " + path);
    if (maxval < 1 || maxval > 65535) fail(ErrorKind::IO, "unsupported PGM maxval " + std::to_string(maxval));
    Image2D img(w, h);
    for (int j = 0; j < h; ++j)
        for (int i = 0; i < w; ++i) {
            unsigned v = 0;
            if (magic == "P2") {
                std::string t = pnm_token(in);
                if (t.empty()) fail(ErrorKind::IO, "truncated PGM: " + path);
                v = unsigned(std::stoul(t));
            } else if (maxval < 256) {
                unsigned char b;
                if (!in.read(reinterpret_cast<char*>(&b), 1)) fail(ErrorKind::IO, "truncated PGM: " + path);
                v = b;
            } else {
                unsigned char b[2];
                if (!in.read(reinterpret_cast<char*>(b), 2)) fail(ErrorKind::IO, "truncated PGM: " + path);
                v = (unsigned(b[0]) << 8) | b[1];
            }
            img(i, j) = double(v) / maxval;
        }
    return img;
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

void write_png(const std::string& path, int w, int h, int depth, int color, const std::vector<png_byte>& buf) {
    FilePtr fp = open_file(path, "wb");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) fail(ErrorKind::IO, "libpng initialization failed");
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        fail(ErrorKind::IO, "failed writing " + path);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, w, h, depth, color, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::size_t rowbytes = buf.size() / h;
    for (int j = 0; j < h; ++j) png_write_row(png, const_cast<png_bytep>(buf.data() + rowbytes * j));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace

Image2D load_image(const std::string& path) {
    if (has_png_signature(path)) return load_png(path);
    return load_pgm(path);
}

void save_image(const Image2D& img, const std::string& path, int bit_depth) {
    require(bit_depth == 8 || bit_depth == 16, ErrorKind::IO, "unsupported bit depth");
    const unsigned maxval = bit_depth == 8 ? 255u : 65535u;
    const int bpp = bit_depth / 8;
    std::vector<png_byte> buf(std::size_t(img.nx) * img.ny * bpp);
    for (std::size_t n = 0; n < img.values.size(); ++n) {
        unsigned v = unsigned(std::lround(std::clamp(img.values[n], 0.0, 1.0) * maxval));
        if (bpp == 1)
            buf[n] = png_byte(v);
        else {
            buf[2 * n] = png_byte(v >> 8);
            buf[2 * n + 1] = png_byte(v & 0xff);
        }
    }
    if (ends_with(path, ".pgm")) {
        std::ofstream out(path, std::ios::binary);
        if (!out) fail(ErrorKind::IO, "cannot open " + path);
        out << "P5\n" << img.nx << " " << img.ny << "\n" << maxval << "\n";
        out.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
        return;
    }
    write_png(path, img.nx, img.ny, bit_depth, PNG_COLOR_TYPE_GRAY, buf);
}

void save_rgb(const RGBImage& img, const std::string& path) {
    std::vector<png_byte> buf(img.px.size() * 3);
    for (std::size_t n = 0; n < img.px.size(); ++n)
        for (int c = 0; c < 3; ++c) buf[3 * n + c] = img.px[n][c];
    if (ends_with(path, ".ppm")) {
        std::ofstream out(path, std::ios::binary);
        if (!out) fail(ErrorKind::IO, "cannot open " + path);
        out << "P6\n" << img.nx << " " << img.ny << "\n255\n";
        out.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
        return;
    }
    write_png(path, img.nx, img.ny, 8, PNG_COLOR_TYPE_RGB, buf);
}

std::vector<std::array<int, 2>> rasterize_polyline(const std::vector<std::array<double, 2>>& pts) {
    std::vector<std::array<int, 2>> out;
    std::set<std::array<int, 2>> seen;
    auto add = [&](int x, int y) {
        if (seen.insert({x, y}).second) out.push_back({x, y});
    };
    if (pts.empty()) return out;
    int px = int(std::lround(pts[0][0])), py = int(std::lround(pts[0][1]));
    add(px, py);
    for (std::size_t n = 1; n < pts.size(); ++n) {
        int x1 = int(std::lround(pts[n][0])), y1 = int(std::lround(pts[n][1]));
        int dx = std::abs(x1 - px), dy = -std::abs(y1 - py);
        int sx = px < x1 ? 1 : -1, sy = py < y1 ? 1 : -1, e = dx + dy;
        while (px != x1 || py != y1) {
            int e2 = 2 * e;
            if (e2 >= dy) {
                e += dy;
                px += sx;
            }
            if (e2 <= dx) {
                e += dx;
                py += sy;
            }
            add(px, py);
        }
    }
    return out;
}

void save_overlay(const Image2D& img, const std::vector<std::vector<std::array<double, 2>>>& polylines,
                  const std::vector<Marker>& markers, const std::string& path) {
    static const std::array<std::array<std::uint8_t, 3>, 6> palette{{
        {255, 200, 0}, {0, 170, 255}, {255, 90, 200}, {120, 255, 120}, {255, 140, 60}, {90, 90, 255}}};
    RGBImage out(img.nx, img.ny);
    for (int j = 0; j < img.ny; ++j)
        for (int i = 0; i < img.nx; ++i) {
            auto g = std::uint8_t(std::lround(std::clamp(img(i, j), 0.0, 1.0) * 255));
            out.at(i, j) = {g, g, g};
        }
    auto inside = [&](int x, int y) { return x >= 0 && y >= 0 && x < img.nx && y < img.ny; };
    for (std::size_t n = 0; n < polylines.size(); ++n)
        for (auto [x, y] : rasterize_polyline(polylines[n]))
            if (inside(x, y)) out.at(x, y) = palette[n % palette.size()];
    for (const Marker& m : markers) {
        int cx = int(std::lround(m.x)), cy = int(std::lround(m.y));
        for (int dy = -2; dy <= 2; ++dy)
            for (int dx = -2; dx <= 2; ++dx)
                if (dx * dx + dy * dy <= 5 && inside(cx + dx, cy + dy)) out.at(cx + dx, cy + dy) = m.color;
    }
    save_rgb(out, path);
}

void save_field(const LiftedField& f, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::IO, "cannot open " + path);
    const GridM2& g = f.grid;
    out << "OTRACK_FIELD 1\n"
        << "dims " << g.nx << " " << g.ny << " " << g.ntheta << "\n"
        << "spacing 1 1 " << std::setprecision(17) << g.htheta() << "\n"
        << "origin " << g.x0 << " " << g.y0 << "\n"
        << "periodic " << (g.periodic ? 1 : 0) << "\n"
        << "layout x-fastest float32-le\n"
        << "end\n";
    std::vector<unsigned char> bytes(f.values.size() * 4);
    for (std::size_t n = 0; n < f.values.size(); ++n) {
        float v = float(f.values[n]);
        std::uint32_t u;
        std::memcpy(&u, &v, 4);
        for (int b = 0; b < 4; ++b) bytes[4 * n + b] = static_cast<unsigned char>((u >> (8 * b)) & 0xff);
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    if (!out) fail(ErrorKind::IO, "failed writing " + path);
}

LiftedField load_field(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::IO, "cannot open " + path);
    std::string line;
    std::getline(in, line);
    if (line != "OTRACK_FIELD 1") fail(ErrorKind::IO, "not a field file: " + path);
    GridM2 g;
    while (std::getline(in, line) && line != "end") {
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "dims")
            ls >> g.nx >> g.ny >> g.ntheta;
        else if (key == "origin")
            ls >> g.x0 >> g.y0;
        else if (key == "periodic") {
            int p = 1;
            ls >> p;
            g.periodic = p != 0;
        }
    }
    if (g.nx <= 0 || g.ny <= 0 || g.ntheta <= 0) fail(ErrorKind::IO, "bad field header: " + path);
    LiftedField f(g);
    std::vector<unsigned char> bytes(f.values.size() * 4);
    in.read(reinterpret_cast<char*>(bytes.data()), std::streamsize(bytes.size()));
    if (in.gcount() != std::streamsize(bytes.size())) fail(ErrorKind::IO, "truncated field file: " + path);
    for (std::size_t n = 0; n < f.values.size(); ++n) {
        std::uint32_t u = 0;
        for (int b = 0; b < 4; ++b) u |= std::uint32_t(bytes[4 * n + b]) << (8 * b);
        float v;
        std::memcpy(&v, &u, 4);
        f.values[n] = v;
    }
    return f;
}

}  // namespace otrack
