#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "lvann/error.hpp"
#include "lvann/harness/harness.hpp"
#include "lvann/kernels/kernels.hpp"

namespace lvann {

void validate(const Dataset& data) {
    for (std::size_t i = 0; i < data.points.size(); ++i) {
        require(data.points[i].dim() == data.dim, ErrorCode::DimensionMismatch,
                data.source + ": record " + std::to_string(i) + " has dim " +
                    std::to_string(data.points[i].dim()) + ", expected " + std::to_string(data.dim));
    }
}

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        fail(ErrorCode::Io, "cannot open " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        fail(ErrorCode::Io, "cannot open " + path + " for writing");
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        fail(ErrorCode::Io, "write failed: " + path);
    }
}

}  // namespace

Dataset parse_fvecs(std::string_view bytes, const std::string& source) {
    Dataset data;
    data.source = source;
    std::size_t pos = 0;
    std::size_t record = 0;
    while (pos < bytes.size()) {
        if (bytes.size() - pos < 4) {
            fail(ErrorCode::MalformedHeader,
                 source + ": truncated dimension header at record " + std::to_string(record));
        }
        std::int32_t dim = 0;
        std::memcpy(&dim, bytes.data() + pos, 4);
        pos += 4;
        if (dim <= 0) {
            fail(ErrorCode::MalformedHeader,
                 source + ": record " + std::to_string(record) + " declares dimension " + std::to_string(dim));
        }
        if (record == 0) {
            data.dim = static_cast<std::size_t>(dim);
        } else if (static_cast<std::size_t>(dim) != data.dim) {
            fail(ErrorCode::RecordDimMismatch, source + ": record " + std::to_string(record) + " has dim " +
                                                   std::to_string(dim) + ", expected " + std::to_string(data.dim));
        }
        const std::size_t need = static_cast<std::size_t>(dim) * 4;
        if (bytes.size() - pos < need) {
            fail(ErrorCode::MalformedHeader, source + ": record " + std::to_string(record) + " is truncated");
        }
        std::vector<double> v(static_cast<std::size_t>(dim));
        for (std::size_t k = 0; k < v.size(); ++k) {
            float f = 0;
            std::memcpy(&f, bytes.data() + pos + 4 * k, 4);
            v[k] = f;
        }
        pos += need;
        try {
            data.points.emplace_back(std::move(v));
        } catch (const Error& e) {
            fail(ErrorCode::InvalidArgument, source + ": record " + std::to_string(record) + ": " + e.what());
        }
        ++record;
    }
    return data;
}

std::string format_fvecs(const Dataset& data) {
    validate(data);
    std::string out;
    out.reserve(data.points.size() * (4 + 4 * data.dim));
    for (const RealVector& p : data.points) {
        const auto dim = static_cast<std::int32_t>(p.dim());
        out.append(reinterpret_cast<const char*>(&dim), 4);
        for (double v : p.coords()) {
            const auto f = static_cast<float>(v);
            out.append(reinterpret_cast<const char*>(&f), 4);
        }
    }
    return out;
}

Dataset load_fvecs(const std::string& path) { return parse_fvecs(read_file(path), path); }

void save_fvecs(const Dataset& data, const std::string& path) { write_file(path, format_fvecs(data)); }

Dataset load_csv(const std::string& path) {
    const std::string text = read_file(path);
    Dataset data;
    data.source = path;
    std::istringstream in(text);
    std::string line;
    std::size_t record = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::vector<double> v;
        const char* p = line.data();
        const char* end = p + line.size();
        while (p < end) {
            while (p < end && *p == ' ') {
                ++p;
            }
            double x = 0;
            const auto [next, ec] = std::from_chars(p, end, x);
            if (ec != std::errc()) {
                fail(ErrorCode::MalformedHeader,
                     path + ": record " + std::to_string(record) + " is not a list of numbers");
            }
            v.push_back(x);
            p = next;
            while (p < end && *p == ' ') {
                ++p;
            }
            if (p < end) {
                if (*p != ',') {
                    fail(ErrorCode::MalformedHeader, path + ": record " + std::to_string(record) +
                                                         " has an unexpected character");
                }
                ++p;
            }
        }
        if (record == 0) {
            data.dim = v.size();
        } else if (v.size() != data.dim) {
            fail(ErrorCode::RecordDimMismatch, path + ": record " + std::to_string(record) + " has dim " +
                                                   std::to_string(v.size()) + ", expected " + std::to_string(data.dim));
        }
        try {
            data.points.emplace_back(std::move(v));
        } catch (const Error& e) {
            fail(ErrorCode::InvalidArgument, path + ": record " + std::to_string(record) + ": " + e.what());
        }
        ++record;
    }
    return data;
}

void save_csv(const Dataset& data, const std::string& path) {
    validate(data);
    std::string out;
    char buf[64];
    for (const RealVector& p : data.points) {
        for (std::size_t k = 0; k < p.dim(); ++k) {
            if (k > 0) {
                out.push_back(',');
            }
            const auto res = std::to_chars(buf, buf + sizeof buf, p[k]);
            out.append(buf, res.ptr);
        }
        out.push_back('\n');
    }
    write_file(path, out);
}

std::pair<std::uint32_t, double> brute_force_nn(const std::vector<RealVector>& points, const RealVector& q) {
    require(!points.empty(), ErrorCode::InvalidArgument, "brute_force_nn: empty dataset");
    std::uint32_t best = 0;
    double best_d2 = INFINITY;
    for (std::size_t i = 0; i < points.size(); ++i) {
        require(points[i].dim() == q.dim(), ErrorCode::DimensionMismatch, "brute_force_nn: query dim differs");
        const double d2 = kernels::squared_distance(points[i].view(), q.view());
        if (d2 < best_d2) {
            best_d2 = d2;
            best = static_cast<std::uint32_t>(i);
        }
    }
    return {best, std::sqrt(best_d2)};
}

}  // namespace lvann
