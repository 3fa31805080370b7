#include "mtfda/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "mtfda/errors.hpp"

namespace mtfda {

double SeededNormal::uniform01() {
    // 53-bit mantissa in (0,1]; never 0 so the log below is safe
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
}

double SeededNormal::normal(double mean, double sd) {
    double u1 = uniform01();
    double u2 = uniform01();
    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    return mean + sd * z;
}

std::vector<int> SeededNormal::permutation(int n) {
    std::vector<int> p(static_cast<std::size_t>(n));
    std::iota(p.begin(), p.end(), 0);
    for (int i = n - 1; i > 0; --i) {
        std::uint64_t j = engine_() % static_cast<std::uint64_t>(i + 1);
        std::swap(p[static_cast<std::size_t>(i)], p[j]);
    }
    return p;
}

LabeledFunctions gen_example1() {
    LabeledFunctions out;
    for (int i = 0; i < 10; ++i) {
        // unit bumps g_j peaking at j+1/2, plus the height-5 bump G_i at i+3/4
        std::vector<std::pair<double, double>> pts;
        pts.emplace_back(0.0, 0.0);
        for (int j = 0; j <= 10; ++j) {
            pts.emplace_back(j + 1.0 / 3.0, 0.0);
            pts.emplace_back(j + 0.5, 1.0);
            pts.emplace_back(j + 2.0 / 3.0, 0.0);
            if (j == i) {
                pts.emplace_back(i + 0.75, 5.0);
                pts.emplace_back(i + 1.0, 0.0);
            }
        }
        pts.emplace_back(11.0, 0.0);
        std::sort(pts.begin(), pts.end());
        std::vector<double> xs, ys;
        for (auto& [x, y] : pts) {
            if (!xs.empty() && x == xs.back()) continue;
            xs.push_back(x);
            ys.push_back(y);
        }
        out.functions.emplace_back("f" + std::to_string(i), std::move(xs), std::move(ys));
        out.labels.push_back(std::to_string(i));
    }
    return out;
}

LabeledFunctions gen_example2(std::uint64_t seed) {
    SeededNormal rng(seed);
    LabeledFunctions out;
    for (int cluster = 0; cluster < 2; ++cluster) {
        std::vector<double> maxima(8), minima(8);
        for (double& v : maxima) v = rng.normal(100.0, 50.0);
        for (double& v : minima) v = rng.normal(-100.0, 50.0);
        for (int k = 0; k < 50; ++k) {
            std::vector<int> perm = rng.permutation(8);  // shared by maxima and minima
            std::vector<double> xs, ys;
            for (int node = 0; node < 16; ++node) {
                xs.push_back(static_cast<double>(node) / 15.0);
                int slot = perm[static_cast<std::size_t>(node / 2)];
                ys.push_back(node % 2 == 0 ? minima[static_cast<std::size_t>(slot)]
                                           : maxima[static_cast<std::size_t>(slot)]);
            }
            char name[32];
            std::snprintf(name, sizeof name, "c%d_f%02d", cluster, k);
            out.functions.emplace_back(name, std::move(xs), std::move(ys));
            out.labels.push_back(std::to_string(cluster));
        }
    }
    return out;
}

const int kExample3Cluster2Order[10] = {3, 2, 1, 0, 8, 9, 7, 6, 4, 5};

LabeledFunctions gen_example3(std::uint64_t seed) {
    SeededNormal rng(seed);
    // shared critical sample; ranks (0 = smallest) refer to the base values
    // and the per-function jitter perturbs each placed critical point, so the
    // cluster ordering shapes the large-scale arrangement while the noise
    // scrambles the local comparisons
    std::vector<double> maxima(10), minima(10);
    for (double& v : maxima) v = rng.normal(100.0, 200.0);
    for (double& v : minima) v = rng.normal(-100.0, 200.0);
    std::sort(maxima.begin(), maxima.end());
    std::sort(minima.begin(), minima.end());

    LabeledFunctions out;
    for (int cluster = 0; cluster < 2; ++cluster) {
        for (int k = 0; k < 50; ++k) {
            std::vector<double> jmax(10), jmin(10);
            for (int i = 0; i < 10; ++i)
                jmax[static_cast<std::size_t>(i)] = maxima[static_cast<std::size_t>(i)] + rng.normal(0.0, 100.0);
            for (int i = 0; i < 10; ++i)
                jmin[static_cast<std::size_t>(i)] = minima[static_cast<std::size_t>(i)] + rng.normal(0.0, 100.0);
            std::vector<double> xs, ys;
            for (int node = 0; node < 20; ++node) {
                xs.push_back(static_cast<double>(node) / 19.0);
                int t = node / 2;
                int rank = cluster == 0 ? t : kExample3Cluster2Order[t];
                ys.push_back(node % 2 == 0 ? jmax[static_cast<std::size_t>(rank)]
                                           : jmin[static_cast<std::size_t>(rank)]);
            }
            char name[32];
            std::snprintf(name, sizeof name, "c%d_f%02d", cluster, k);
            out.functions.emplace_back(name, std::move(xs), std::move(ys));
            out.labels.push_back(std::to_string(cluster));
        }
    }
    return out;
}

NoisySine gen_noisy_sine(std::uint64_t seed, int n_grid, double sigma) {
    if (n_grid < 2) throw param_error("gen_noisy_sine: grid needs at least two nodes");
    SeededNormal rng(seed);
    std::vector<double> xs, clean_ys, noisy_ys;
    for (int i = 0; i < n_grid; ++i) {
        double x = static_cast<double>(i) / (n_grid - 1);
        double f = std::sin(10.0 * M_PI * x) / (1.0 + x * x);
        xs.push_back(x);
        clean_ys.push_back(f);
        noisy_ys.push_back(f + (sigma == 0.0 ? 0.0 : rng.normal(0.0, sigma)));
    }
    NoisySine out;
    out.clean = PLFunction("clean", xs, clean_ys);
    out.noisy = PLFunction("noisy", xs, noisy_ys);
    return out;
}

std::string functions_to_csv(const std::vector<PLFunction>& fns) {
    std::string out = "id,x,y\n";
    char buf[96];
    for (const auto& f : fns)
        for (std::size_t i = 0; i < f.xs.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g\n", f.id.c_str(), f.xs[i], f.ys[i]);
            out += buf;
        }
    return out;
}

std::vector<PLFunction> functions_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw data_error("functions CSV: empty file");
    if (line == "id,x,y\r") line = "id,x,y";
    if (line != "id,x,y") throw data_error("functions CSV: missing 'id,x,y' header");
    std::vector<std::string> order;
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> data;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto c1 = line.find(',');
        auto c2 = line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos)
            throw data_error("functions CSV: malformed row at line " + std::to_string(lineno));
        std::string id = line.substr(0, c1);
        double x, y;
        try {
            x = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
            y = std::stod(line.substr(c2 + 1));
        } catch (const std::exception&) {
            throw data_error("functions CSV: bad number at line " + std::to_string(lineno));
        }
        auto it = data.find(id);
        if (it == data.end()) {
            order.push_back(id);
            it = data.emplace(id, std::make_pair(std::vector<double>{}, std::vector<double>{})).first;
        }
        auto& [xs, ys] = it->second;
        if (!xs.empty()) {
            if (x == xs.back())
                throw data_error("functions CSV: duplicate abscissa for id '" + id + "' at line " +
                                 std::to_string(lineno));
            if (x < xs.back())
                throw data_error("functions CSV: unsorted abscissas for id '" + id + "' at line " +
                                 std::to_string(lineno));
        }
        xs.push_back(x);
        ys.push_back(y);
    }
    std::vector<PLFunction> out;
    for (const std::string& id : order) {
        auto& [xs, ys] = data[id];
        out.emplace_back(id, std::move(xs), std::move(ys));
    }
    return out;
}

std::vector<PLFunction> load_functions_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return functions_from_csv(ss.str());
}

void save_functions_csv(const std::string& path, const std::vector<PLFunction>& fns) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write '" + path + "'");
    out << functions_to_csv(fns);
}

void save_labels_csv(const std::string& path, const std::vector<std::string>& ids,
                     const std::vector<std::string>& labels) {
    if (ids.size() != labels.size()) throw param_error("labels CSV: ids/labels size mismatch");
    std::ofstream out(path);
    if (!out) throw data_error("cannot write '" + path + "'");
    out << "id,label\n";
    for (std::size_t i = 0; i < ids.size(); ++i) out << ids[i] << "," << labels[i] << "\n";
}

std::vector<std::pair<std::string, std::string>> load_labels_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw data_error("labels CSV: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "id,label") throw data_error("labels CSV: missing 'id,label' header");
    std::vector<std::pair<std::string, std::string>> out;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto c = line.find(',');
        if (c == std::string::npos) throw data_error("labels CSV: malformed row");
        out.emplace_back(line.substr(0, c), line.substr(c + 1));
    }
    return out;
}

}  // namespace mtfda
