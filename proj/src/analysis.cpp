#include "mtfda/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "mtfda/errors.hpp"

namespace mtfda {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void DistanceMatrix::validate() const {
    int n = size();
    if (static_cast<int>(values.size()) != n) throw data_error("distance matrix: row count mismatch");
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(values[static_cast<std::size_t>(i)].size()) != n)
            throw data_error("distance matrix: column count mismatch");
        if (at(i, i) != 0.0) throw data_error("distance matrix: nonzero diagonal");
        for (int j = 0; j < n; ++j) {
            if (at(i, j) < 0.0) throw data_error("distance matrix: negative entry");
            if (at(i, j) != at(j, i)) throw data_error("distance matrix: not symmetric");
        }
    }
}

DistanceMatrix mixed_distance(const DistanceMatrix& dc, const DistanceMatrix& dr, double w) {
    if (w < 0.0 || w > 1.0) throw param_error("mixed_distance: w must lie in [0,1]");
    if (dc.ids != dr.ids) throw param_error("mixed_distance: id sets differ");
    DistanceMatrix out;
    out.ids = dc.ids;
    int n = dc.size();
    out.values.assign(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n), 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double c = dc.at(i, j), r = dr.at(i, j);
            out.values[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                std::sqrt(w * c * c + (1.0 - w) * r * r);
        }
    return out;
}

void symmetric_eigen(std::vector<std::vector<double>> a, std::vector<double>& eigenvalues,
                     std::vector<std::vector<double>>& eigenvectors) {
    int n = static_cast<int>(a.size());
    std::vector<std::vector<double>> v(static_cast<std::size_t>(n),
                                       std::vector<double>(static_cast<std::size_t>(n), 0.0));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1.0;

    auto off = [&]() {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                s += a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] *
                     a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        return s;
    };
    double scale = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            scale = std::max(scale, std::abs(a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]));
    double tol = scale > 0 ? 1e-26 * scale * scale * n * n : 0.0;

    for (int sweep = 0; sweep < 120 && off() > tol; ++sweep) {
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                double apq = a[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)];
                if (apq == 0.0) continue;
                double app = a[static_cast<std::size_t>(p)][static_cast<std::size_t>(p)];
                double aqq = a[static_cast<std::size_t>(q)][static_cast<std::size_t>(q)];
                double theta = (aqq - app) / (2.0 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (int k = 0; k < n; ++k) {
                    double akp = a[static_cast<std::size_t>(k)][static_cast<std::size_t>(p)];
                    double akq = a[static_cast<std::size_t>(k)][static_cast<std::size_t>(q)];
                    a[static_cast<std::size_t>(k)][static_cast<std::size_t>(p)] = c * akp - s * akq;
                    a[static_cast<std::size_t>(k)][static_cast<std::size_t>(q)] = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    double apk = a[static_cast<std::size_t>(p)][static_cast<std::size_t>(k)];
                    double aqk = a[static_cast<std::size_t>(q)][static_cast<std::size_t>(k)];
                    a[static_cast<std::size_t>(p)][static_cast<std::size_t>(k)] = c * apk - s * aqk;
                    a[static_cast<std::size_t>(q)][static_cast<std::size_t>(k)] = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    double vkp = v[static_cast<std::size_t>(k)][static_cast<std::size_t>(p)];
                    double vkq = v[static_cast<std::size_t>(k)][static_cast<std::size_t>(q)];
                    v[static_cast<std::size_t>(k)][static_cast<std::size_t>(p)] = c * vkp - s * vkq;
                    v[static_cast<std::size_t>(k)][static_cast<std::size_t>(q)] = s * vkp + c * vkq;
                }
            }
    }

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int i, int j) {
        return a[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] >
               a[static_cast<std::size_t>(j)][static_cast<std::size_t>(j)];
    });
    eigenvalues.clear();
    eigenvectors.assign(static_cast<std::size_t>(n),
                        std::vector<double>(static_cast<std::size_t>(n), 0.0));
    for (int r = 0; r < n; ++r) {
        int k = order[static_cast<std::size_t>(r)];
        eigenvalues.push_back(a[static_cast<std::size_t>(k)][static_cast<std::size_t>(k)]);
        for (int i = 0; i < n; ++i)
            eigenvectors[static_cast<std::size_t>(r)][static_cast<std::size_t>(i)] =
                v[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
        // deterministic sign: first sizable component positive
        for (int i = 0; i < n; ++i) {
            double x = eigenvectors[static_cast<std::size_t>(r)][static_cast<std::size_t>(i)];
            if (std::abs(x) > 1e-12) {
                if (x < 0)
                    for (auto& e : eigenvectors[static_cast<std::size_t>(r)]) e = -e;
                break;
            }
        }
    }
}

std::vector<std::vector<double>> classical_mds(const DistanceMatrix& d, int m, int* negative_count) {
    d.validate();
    int n = d.size();
    if (m < 1 || m > std::max(1, n - 1)) throw param_error("classical_mds: m out of range");
    // double centering of the squared distances
    std::vector<std::vector<double>> b(static_cast<std::size_t>(n),
                                       std::vector<double>(static_cast<std::size_t>(n), 0.0));
    std::vector<double> row_mean(static_cast<std::size_t>(n), 0.0);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double s = d.at(i, j) * d.at(i, j);
            row_mean[static_cast<std::size_t>(i)] += s;
            total += s;
        }
        row_mean[static_cast<std::size_t>(i)] /= n;
    }
    total /= static_cast<double>(n) * n;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            b[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                -0.5 * (d.at(i, j) * d.at(i, j) - row_mean[static_cast<std::size_t>(i)] -
                        row_mean[static_cast<std::size_t>(j)] + total);

    std::vector<double> eval;
    std::vector<std::vector<double>> evec;
    symmetric_eigen(std::move(b), eval, evec);

    int negatives = 0;
    std::vector<std::vector<double>> pts(static_cast<std::size_t>(n),
                                         std::vector<double>(static_cast<std::size_t>(m), 0.0));
    for (int k = 0; k < m && k < n; ++k) {
        double lambda = eval[static_cast<std::size_t>(k)];
        if (lambda <= 0.0) {
            if (lambda < 0.0) ++negatives;
            continue;  // clipped: the column stays zero
        }
        double s = std::sqrt(lambda);
        for (int i = 0; i < n; ++i)
            pts[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] =
                s * evec[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
    }
    if (negative_count) *negative_count = negatives;
    return pts;
}

namespace {

// lower Cholesky; returns false if the matrix is not positive definite
bool cholesky(const std::vector<std::vector<double>>& a, std::vector<std::vector<double>>& l) {
    int n = static_cast<int>(a.size());
    l.assign(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n), 0.0));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            for (int k = 0; k < j; ++k)
                s -= l[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] *
                     l[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
            if (i == j) {
                if (s <= 0.0) return false;
                l[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = std::sqrt(s);
            } else {
                l[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                    s / l[static_cast<std::size_t>(j)][static_cast<std::size_t>(j)];
            }
        }
    }
    return true;
}

double mahalanobis_sq(const QDAModel::ClassStats& cs, const std::vector<double>& x) {
    // solve L z = x - mean, return |z|^2
    int n = static_cast<int>(x.size());
    std::vector<double> z(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        double s = x[static_cast<std::size_t>(i)] - cs.mean[static_cast<std::size_t>(i)];
        for (int k = 0; k < i; ++k)
            s -= cs.cov_chol[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] *
                 z[static_cast<std::size_t>(k)];
        z[static_cast<std::size_t>(i)] = s / cs.cov_chol[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
    }
    double q = 0.0;
    for (double t : z) q += t * t;
    return q;
}

}  // namespace

QDAModel qda_fit(const std::vector<std::vector<double>>& points,
                 const std::vector<std::string>& labels, bool allow_singletons) {
    if (points.size() != labels.size() || points.empty())
        throw param_error("qda_fit: points/labels size mismatch");
    int dim = static_cast<int>(points[0].size());
    std::set<std::string> classes(labels.begin(), labels.end());
    if (classes.size() < 2) throw param_error("qda_fit: need at least two classes");

    QDAModel model;
    model.dim = dim;
    for (const std::string& cls : classes) {
        std::vector<const std::vector<double>*> members;
        for (std::size_t i = 0; i < points.size(); ++i)
            if (labels[i] == cls) members.push_back(&points[i]);
        if (members.size() < 2 && !allow_singletons)
            throw param_error("qda_fit: class '" + cls + "' has fewer than two members");
        QDAModel::ClassStats cs;
        cs.label = cls;
        cs.log_prior = std::log(static_cast<double>(members.size()) / points.size());
        cs.mean.assign(static_cast<std::size_t>(dim), 0.0);
        for (auto* p : members)
            for (int k = 0; k < dim; ++k) cs.mean[static_cast<std::size_t>(k)] += (*p)[static_cast<std::size_t>(k)];
        for (double& v : cs.mean) v /= static_cast<double>(members.size());
        std::vector<std::vector<double>> cov(static_cast<std::size_t>(dim),
                                             std::vector<double>(static_cast<std::size_t>(dim), 0.0));
        for (auto* p : members)
            for (int i = 0; i < dim; ++i)
                for (int j = 0; j < dim; ++j)
                    cov[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] +=
                        ((*p)[static_cast<std::size_t>(i)] - cs.mean[static_cast<std::size_t>(i)]) *
                        ((*p)[static_cast<std::size_t>(j)] - cs.mean[static_cast<std::size_t>(j)]);
        for (auto& row : cov)
            for (double& v : row) v /= static_cast<double>(members.size());

        if (!cholesky(cov, cs.cov_chol)) {
            double trace = 0.0;
            for (int i = 0; i < dim; ++i) trace += cov[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
            double ridge = 1e-6 * trace / dim;
            if (!(ridge > 0.0)) ridge = 1e-12;
            for (int tries = 0; tries < 40; ++tries, ridge *= 10.0) {
                auto reg = cov;
                for (int i = 0; i < dim; ++i)
                    reg[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] += ridge;
                if (cholesky(reg, cs.cov_chol)) break;
                if (tries == 39) throw numeric_error("qda_fit: covariance not repairable");
            }
        }
        cs.log_det = 0.0;
        for (int i = 0; i < dim; ++i)
            cs.log_det += 2.0 * std::log(cs.cov_chol[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)]);
        model.classes.push_back(std::move(cs));
    }
    return model;
}

std::string qda_predict(const QDAModel& model, const std::vector<double>& point) {
    if (static_cast<int>(point.size()) != model.dim) throw param_error("qda_predict: dimension mismatch");
    double best = -kInf;
    const std::string* label = nullptr;
    for (const auto& cs : model.classes) {
        double score = cs.log_prior - 0.5 * cs.log_det - 0.5 * mahalanobis_sq(cs, point);
        if (label == nullptr || score > best) {
            best = score;
            label = &cs.label;
        }
    }
    return *label;
}

double loocv_accuracy(const DistanceMatrix& d, const std::vector<std::string>& labels, int m,
                      std::map<std::string, std::map<std::string, int>>* confusion) {
    if (static_cast<int>(labels.size()) != d.size())
        throw param_error("loocv_accuracy: label count mismatch");
    auto embedded = classical_mds(d, m);
    int n = d.size();
    int correct = 0;
    if (confusion) confusion->clear();
    for (int i = 0; i < n; ++i) {
        std::vector<std::vector<double>> train;
        std::vector<std::string> train_labels;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            train.push_back(embedded[static_cast<std::size_t>(j)]);
            train_labels.push_back(labels[static_cast<std::size_t>(j)]);
        }
        QDAModel model = qda_fit(train, train_labels, /*allow_singletons=*/true);
        std::string pred = qda_predict(model, embedded[static_cast<std::size_t>(i)]);
        if (pred == labels[static_cast<std::size_t>(i)]) ++correct;
        if (confusion) ++(*confusion)[labels[static_cast<std::size_t>(i)]][pred];
    }
    return static_cast<double>(correct) / n;
}

Linkage linkage_from_string(const std::string& s) {
    if (s == "single") return Linkage::Single;
    if (s == "average") return Linkage::Average;
    if (s == "complete") return Linkage::Complete;
    throw param_error("linkage must be one of single|average|complete");
}

Dendrogram hclust(const DistanceMatrix& d, Linkage linkage) {
    d.validate();
    int n = d.size();
    if (n < 2) throw param_error("hclust: need at least two points");
    Dendrogram out;
    out.n_leaves = n;
    struct Cluster {
        int id;
        int size;
    };
    std::vector<Cluster> active;
    for (int i = 0; i < n; ++i) active.push_back({i, 1});
    std::vector<std::vector<double>> dist = d.values;

    int next_id = n;
    while (active.size() > 1) {
        std::size_t bi = 0, bj = 1;
        double best = kInf;
        for (std::size_t i = 0; i < active.size(); ++i)
            for (std::size_t j = i + 1; j < active.size(); ++j)
                if (dist[i][j] < best) {
                    best = dist[i][j];
                    bi = i;
                    bj = j;
                }
        out.merges.push_back({active[bi].id, active[bj].id, best});
        // Lance-Williams update against every other cluster
        std::vector<double> merged;
        for (std::size_t k = 0; k < active.size(); ++k) {
            if (k == bi || k == bj) continue;
            double dik = dist[std::min(bi, k)][std::max(bi, k)];
            double djk = dist[std::min(bj, k)][std::max(bj, k)];
            double v = 0.0;
            switch (linkage) {
                case Linkage::Single: v = std::min(dik, djk); break;
                case Linkage::Complete: v = std::max(dik, djk); break;
                case Linkage::Average:
                    v = (active[bi].size * dik + active[bj].size * djk) /
                        static_cast<double>(active[bi].size + active[bj].size);
                    break;
            }
            merged.push_back(v);
        }
        Cluster fresh{next_id++, active[bi].size + active[bj].size};
        std::vector<Cluster> next_active;
        std::vector<std::vector<double>> next_dist;
        std::vector<std::size_t> keep;
        for (std::size_t k = 0; k < active.size(); ++k)
            if (k != bi && k != bj) keep.push_back(k);
        for (std::size_t a = 0; a < keep.size(); ++a) {
            next_active.push_back(active[keep[a]]);
        }
        next_active.push_back(fresh);
        std::size_t sz = next_active.size();
        next_dist.assign(sz, std::vector<double>(sz, 0.0));
        for (std::size_t a = 0; a < keep.size(); ++a)
            for (std::size_t b = a + 1; b < keep.size(); ++b)
                next_dist[a][b] = next_dist[b][a] =
                    dist[std::min(keep[a], keep[b])][std::max(keep[a], keep[b])];
        for (std::size_t a = 0; a < keep.size(); ++a)
            next_dist[a][sz - 1] = next_dist[sz - 1][a] = merged[a];
        active = std::move(next_active);
        dist = std::move(next_dist);
    }
    return out;
}

std::vector<double> merging_heights(const Dendrogram& dend) {
    std::vector<double> out(static_cast<std::size_t>(dend.n_leaves), 0.0);
    for (const auto& m : dend.merges) {
        if (m.a < dend.n_leaves) out[static_cast<std::size_t>(m.a)] = m.height;
        if (m.b < dend.n_leaves) out[static_cast<std::size_t>(m.b)] = m.height;
    }
    return out;
}

GridSearchResult qda_grid_search(const DistanceMatrix& dc, const DistanceMatrix& dr,
                                 const std::vector<std::string>& labels,
                                 const std::vector<double>& ws, const std::vector<int>& ms) {
    if (ws.empty() || ms.empty()) throw param_error("qda_grid_search: empty grids");
    GridSearchResult best;
    best.accuracy = -1.0;
    std::vector<double> sorted_ws = ws;
    std::sort(sorted_ws.begin(), sorted_ws.end());
    std::vector<int> sorted_ms = ms;
    std::sort(sorted_ms.begin(), sorted_ms.end());
    for (double w : sorted_ws) {
        DistanceMatrix d = mixed_distance(dc, dr, w);
        for (int m : sorted_ms) {
            std::map<std::string, std::map<std::string, int>> conf;
            double acc = loocv_accuracy(d, labels, m, &conf);
            if (acc > best.accuracy) {  // ties keep the earliest (smallest w, then m)
                best.accuracy = acc;
                best.w = w;
                best.m = m;
                best.confusion = std::move(conf);
            }
        }
    }
    return best;
}

}  // namespace mtfda
