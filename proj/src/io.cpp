#include "mtfda/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "mtfda/errors.hpp"

namespace mtfda {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void atomic_write_file(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw data_error("cannot write '" + tmp + "'");
        out << content;
        out.flush();
        if (!out) throw data_error("short write to '" + tmp + "'");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw data_error("cannot rename '" + tmp + "' to '" + path + "'");
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string distance_matrix_to_csv(const DistanceMatrix& d) {
    std::string out = "id";
    for (const auto& id : d.ids) out += "," + id;
    out += "\n";
    for (int i = 0; i < d.size(); ++i) {
        out += d.ids[static_cast<std::size_t>(i)];
        for (int j = 0; j < d.size(); ++j) out += "," + format_double(d.at(i, j));
        out += "\n";
    }
    return out;
}

DistanceMatrix distance_matrix_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw data_error("distance CSV: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    DistanceMatrix d;
    {
        std::istringstream header(line);
        std::string cell;
        bool first = true;
        while (std::getline(header, cell, ',')) {
            if (first) {
                if (cell != "id") throw data_error("distance CSV: header must start with 'id'");
                first = false;
            } else {
                d.ids.push_back(cell);
            }
        }
    }
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::getline(row, cell, ',');  // row id
        std::size_t r = d.values.size();
        if (r >= d.ids.size() || cell != d.ids[r])
            throw data_error("distance CSV: row ids must mirror the header");
        std::vector<double> vals;
        while (std::getline(row, cell, ',')) {
            try {
                vals.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw data_error("distance CSV: bad number in row '" + d.ids[r] + "'");
            }
        }
        if (vals.size() != d.ids.size()) throw data_error("distance CSV: ragged row");
        d.values.push_back(std::move(vals));
    }
    d.validate();
    return d;
}

std::string embedding_to_csv(const std::vector<std::string>& ids,
                             const std::vector<std::vector<double>>& points) {
    std::size_t m = points.empty() ? 0 : points[0].size();
    std::string out = "id";
    for (std::size_t k = 1; k <= m; ++k) out += ",c" + std::to_string(k);
    out += "\n";
    for (std::size_t i = 0; i < ids.size(); ++i) {
        out += ids[i];
        for (double v : points[i]) out += "," + format_double(v);
        out += "\n";
    }
    return out;
}

}  // namespace mtfda
