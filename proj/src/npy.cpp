#include "nnrules/npy.hpp"

#include <cstring>
#include <fstream>

namespace nnrules {

namespace {

constexpr char kMagic[6] = {'\x93', 'N', 'U', 'M', 'P', 'Y'};
constexpr std::size_t kAlign = 64;

void append_le(std::vector<std::uint8_t>& out, const void* src, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(src);
    out.insert(out.end(), p, p + n);
}

std::string descr_for(Dtype dt) {
    switch (dt) {
        case Dtype::f32: return "<f4";
        case Dtype::f64: return "<f8";
        case Dtype::i32: return "<i4";
        case Dtype::i64: return "<i8";
    }
    return "";
}

std::string shape_tuple(const std::vector<std::size_t>& shape) {
    if (shape.empty()) return "()";
    if (shape.size() == 1) return "(" + std::to_string(shape[0]) + ",)";
    std::string s = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(shape[i]);
    }
    return s + ")";
}

// Pulls the value following `key` out of the header dict. The writer emits
// keys in a fixed order but the reader does not rely on it.
std::string dict_value(const std::string& header, const std::string& key) {
    std::string quoted = "'" + key + "'";
    std::size_t pos = header.find(quoted);
    if (pos == std::string::npos)
        raise(ErrorKind::UnsupportedFormat, "NPY header missing key " + key);
    pos = header.find(':', pos + quoted.size());
    if (pos == std::string::npos) raise(ErrorKind::UnsupportedFormat, "malformed NPY header");
    ++pos;
    while (pos < header.size() && header[pos] == ' ') ++pos;
    std::size_t end = pos;
    if (header[pos] == '\'') {
        end = header.find('\'', pos + 1);
        if (end == std::string::npos) raise(ErrorKind::UnsupportedFormat, "malformed NPY header");
        return header.substr(pos + 1, end - pos - 1);
    }
    if (header[pos] == '(') {
        end = header.find(')', pos);
        if (end == std::string::npos) raise(ErrorKind::UnsupportedFormat, "malformed NPY header");
        return header.substr(pos, end - pos + 1);
    }
    while (end < header.size() && header[end] != ',' && header[end] != '}' && header[end] != ' ')
        ++end;
    return header.substr(pos, end - pos);
}

std::vector<std::size_t> parse_shape(const std::string& tuple) {
    std::vector<std::size_t> shape;
    std::string body = tuple;
    if (body.size() < 2 || body.front() != '(' || body.back() != ')')
        raise(ErrorKind::UnsupportedFormat, "bad shape tuple " + tuple);
    body = body.substr(1, body.size() - 2);
    std::size_t i = 0;
    while (i < body.size()) {
        while (i < body.size() && (body[i] == ' ' || body[i] == ',')) ++i;
        if (i >= body.size()) break;
        std::size_t j = i;
        while (j < body.size() && body[j] >= '0' && body[j] <= '9') ++j;
        if (j == i) raise(ErrorKind::UnsupportedFormat, "bad shape tuple " + tuple);
        shape.push_back(static_cast<std::size_t>(std::stoull(body.substr(i, j - i))));
        i = j;
    }
    return shape;
}

}  // namespace

std::vector<std::uint8_t> write_npy_bytes(const Tensor& t) {
    std::string dict = "{'descr': '" + descr_for(t.dtype()) +
                       "', 'fortran_order': False, 'shape': " + shape_tuple(t.shape()) + ", }";
    std::size_t base = 6 + 2 + 2;  // magic + version + header length field
    std::size_t total = base + dict.size() + 1;
    std::size_t padded = ((total + kAlign - 1) / kAlign) * kAlign;
    dict.append(padded - total, ' ');
    dict += '\n';

    std::vector<std::uint8_t> out;
    out.reserve(padded + t.numel() * dtype_size(t.dtype()));
    out.insert(out.end(), kMagic, kMagic + 6);
    out.push_back(1);
    out.push_back(0);
    std::uint16_t hlen = static_cast<std::uint16_t>(dict.size());
    out.push_back(static_cast<std::uint8_t>(hlen & 0xff));
    out.push_back(static_cast<std::uint8_t>(hlen >> 8));
    out.insert(out.end(), dict.begin(), dict.end());

    std::size_t n = t.numel();
    switch (t.dtype()) {
        case Dtype::f32:
            for (std::size_t i = 0; i < n; ++i) {
                float v = static_cast<float>(t.f64_at(i));
                append_le(out, &v, 4);
            }
            break;
        case Dtype::f64:
            for (std::size_t i = 0; i < n; ++i) {
                double v = t.f64_at(i);
                append_le(out, &v, 8);
            }
            break;
        case Dtype::i32:
            for (std::size_t i = 0; i < n; ++i) {
                std::int32_t v = static_cast<std::int32_t>(t.i64_at(i));
                append_le(out, &v, 4);
            }
            break;
        case Dtype::i64:
            for (std::size_t i = 0; i < n; ++i) {
                std::int64_t v = t.i64_at(i);
                append_le(out, &v, 8);
            }
            break;
    }
    return out;
}

void write_npy(const Tensor& t, const std::string& path) {
    std::vector<std::uint8_t> bytes = write_npy_bytes(t);
    std::ofstream f(path, std::ios::binary);
    if (!f) raise(ErrorKind::IoFailure, "cannot open " + path + " for writing");
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    if (!f) raise(ErrorKind::IoFailure, "short write to " + path);
}

Tensor read_npy_bytes(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 10) raise(ErrorKind::TruncatedFile, "NPY shorter than preamble");
    if (std::memcmp(bytes.data(), kMagic, 6) != 0)
        raise(ErrorKind::UnsupportedFormat, "bad NPY magic");
    if (bytes[6] != 1 || bytes[7] != 0)
        raise(ErrorKind::UnsupportedFormat, "only NPY version 1.0 is supported");
    std::size_t hlen = bytes[8] | (static_cast<std::size_t>(bytes[9]) << 8);
    if (bytes.size() < 10 + hlen) raise(ErrorKind::TruncatedFile, "NPY header truncated");
    std::string header(bytes.begin() + 10, bytes.begin() + 10 + static_cast<std::ptrdiff_t>(hlen));

    std::string order = dict_value(header, "fortran_order");
    if (order != "False")
        raise(ErrorKind::UnsupportedFormat, "fortran_order must be False, got " + order);

    std::string descr = dict_value(header, "descr");
    bool widen_bool = false;
    Dtype dt;
    if (descr == "<f4") dt = Dtype::f32;
    else if (descr == "<f8") dt = Dtype::f64;
    else if (descr == "<i4") dt = Dtype::i32;
    else if (descr == "<i8") dt = Dtype::i64;
    else if (descr == "|b1") { dt = Dtype::i64; widen_bool = true; }
    else raise(ErrorKind::UnsupportedFormat, "unsupported descr " + descr);

    std::vector<std::size_t> shape = parse_shape(dict_value(header, "shape"));
    std::size_t n = Tensor::shape_numel(shape);
    std::size_t elem = widen_bool ? 1 : dtype_size(dt);
    std::size_t data_off = 10 + hlen;
    if (bytes.size() < data_off + n * elem)
        raise(ErrorKind::TruncatedFile, "NPY payload shorter than header promises");
    const std::uint8_t* p = bytes.data() + data_off;

    if (widen_bool) {
        std::vector<std::int64_t> vals(n);
        for (std::size_t i = 0; i < n; ++i) vals[i] = p[i] ? 1 : 0;
        return Tensor::from_i64(std::move(shape), std::move(vals), Dtype::i64);
    }
    switch (dt) {
        case Dtype::f32: {
            std::vector<double> vals(n);
            for (std::size_t i = 0; i < n; ++i) {
                float v;
                std::memcpy(&v, p + i * 4, 4);
                vals[i] = v;
            }
            return Tensor::from_f64(std::move(shape), std::move(vals), Dtype::f32);
        }
        case Dtype::f64: {
            std::vector<double> vals(n);
            std::memcpy(vals.data(), p, n * 8);
            return Tensor::from_f64(std::move(shape), std::move(vals), Dtype::f64);
        }
        case Dtype::i32: {
            std::vector<std::int64_t> vals(n);
            for (std::size_t i = 0; i < n; ++i) {
                std::int32_t v;
                std::memcpy(&v, p + i * 4, 4);
                vals[i] = v;
            }
            return Tensor::from_i64(std::move(shape), std::move(vals), Dtype::i32);
        }
        case Dtype::i64: {
            std::vector<std::int64_t> vals(n);
            std::memcpy(vals.data(), p, n * 8);
            return Tensor::from_i64(std::move(shape), std::move(vals), Dtype::i64);
        }
    }
    raise(ErrorKind::UnsupportedFormat, "unreachable dtype");
}

Tensor read_npy(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) raise(ErrorKind::IoFailure, "cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                    std::istreambuf_iterator<char>());
    return read_npy_bytes(bytes);
}

}  // namespace nnrules
