#include "lsap/tensor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "lsap/error.hpp"

namespace lsap {

std::size_t shape_numel(const Shape& shape) {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
}

std::string shape_string(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ',';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), data_(shape_numel(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != shape_numel(shape_)) {
        throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_string(shape_));
    }
}

Tensor Tensor::vector(std::vector<double> v) {
    Shape s{v.size()};
    return Tensor(std::move(s), std::move(v));
}

std::size_t Tensor::dim(std::size_t axis) const {
    if (axis >= shape_.size()) {
        throw ShapeError("axis " + std::to_string(axis) + " out of range for shape " +
                         shape_string(shape_));
    }
    return shape_[axis];
}

double Tensor::item() const {
    if (data_.size() != 1) {
        throw ShapeError("item() on tensor of shape " + shape_string(shape_));
    }
    return data_[0];
}

Tensor Tensor::reshaped(Shape shape) const {
    if (shape_numel(shape) != data_.size()) {
        throw ShapeError("cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
    }
    return Tensor(std::move(shape), data_);
}

bool Tensor::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) {
        throw ShapeError("max_abs_diff: " + shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
    }
    double m = 0.0;
    for (std::size_t i = 0; i < a.numel(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

namespace {

struct Neumaier {
    double s = 0.0, c = 0.0;
    void add(double v) {
        const double t = s + v;
        c += std::abs(s) >= std::abs(v) ? (s - t) + v : (v - t) + s;
        s = t;
    }
    double value() const { return s + c; }
};

}  // namespace

double compensated_sum(std::span<const double> v) {
    Neumaier acc;
    for (double x : v) acc.add(x);
    return acc.value();
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ShapeError("dot: length mismatch");
    Neumaier acc;
    for (std::size_t i = 0; i < a.size(); ++i) acc.add(a[i] * b[i]);
    return acc.value();
}

double l2_norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

namespace binio {

void write_u32(std::ostream& out, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
    out.write(b, 4);
}

void write_u64(std::ostream& out, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
    out.write(b, 8);
}

void write_f64(std::ostream& out, double v) { write_u64(out, std::bit_cast<std::uint64_t>(v)); }

void write_magic(std::ostream& out, const char (&magic)[5]) { out.write(magic, 4); }

namespace {
void read_exact(std::istream& in, char* buf, std::size_t n) {
    in.read(buf, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n) throw ConfigError("unexpected end of file");
}
}  // namespace

std::uint32_t read_u32(std::istream& in) {
    unsigned char b[4];
    read_exact(in, reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

std::uint64_t read_u64(std::istream& in) {
    unsigned char b[8];
    read_exact(in, reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

double read_f64(std::istream& in) { return std::bit_cast<double>(read_u64(in)); }

void expect_magic(std::istream& in, const char (&magic)[5]) {
    char b[4];
    read_exact(in, b, 4);
    if (!std::equal(b, b + 4, magic)) {
        throw ConfigError(std::string("bad magic, expected ") + magic);
    }
}

void write_string(std::ostream& out, const std::string& s) {
    write_u32(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
    auto n = read_u32(in);
    if (n > (1u << 20)) throw ConfigError("string block too long");
    std::string s(n, '\0');
    read_exact(in, s.data(), n);
    return s;
}

}  // namespace binio

void write_tensor(std::ostream& out, const Tensor& t) {
    binio::write_magic(out, "LSAT");
    binio::write_u32(out, static_cast<std::uint32_t>(t.rank()));
    for (auto d : t.shape()) binio::write_u64(out, d);
    for (double v : t.data()) binio::write_f64(out, v);
}

Tensor read_tensor(std::istream& in) {
    binio::expect_magic(in, "LSAT");
    auto rank = binio::read_u32(in);
    if (rank > 8) throw ConfigError("tensor rank " + std::to_string(rank) + " unsupported");
    Shape shape(rank);
    for (auto& d : shape) d = binio::read_u64(in);
    auto n = shape_numel(shape);
    if (n > (std::size_t{1} << 32)) throw ConfigError("tensor too large");
    std::vector<double> data(n);
    for (auto& v : data) v = binio::read_f64(in);
    return Tensor(std::move(shape), std::move(data));
}

void save_tensor(const std::string& path, const Tensor& t) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open " + path + " for writing");
    write_tensor(out, t);
}

Tensor load_tensor(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path);
    return read_tensor(in);
}

}  // namespace lsap
