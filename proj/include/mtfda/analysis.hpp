#pragma once

#include <map>
#include <string>
#include <vector>

namespace mtfda {

struct DistanceMatrix {
    std::vector<std::string> ids;
    std::vector<std::vector<double>> values;  // symmetric, zero diagonal

    int size() const { return static_cast<int>(ids.size()); }
    double at(int i, int j) const { return values[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]; }
    void validate() const;  // throws data_error on asymmetry / diagonal / negativity
};

// Entrywise sqrt(w * Dc^2 + (1-w) * Dr^2); ids must agree in order.
DistanceMatrix mixed_distance(const DistanceMatrix& dc, const DistanceMatrix& dr, double w);

// Classical (Torgerson) MDS: double-center -1/2 J D^2 J, eigendecompose, keep
// the top m eigenpairs with negative eigenvalues clipped to zero. Returns one
// m-vector per input id; negative_count reports how many eigenvalues were
// clipped among the selected m.
std::vector<std::vector<double>> classical_mds(const DistanceMatrix& d, int m,
                                               int* negative_count = nullptr);

// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
// Returns (eigenvalues desc, eigenvectors as rows, matching order).
void symmetric_eigen(std::vector<std::vector<double>> a, std::vector<double>& eigenvalues,
                     std::vector<std::vector<double>>& eigenvectors);

struct QDAModel {
    struct ClassStats {
        std::string label;
        double log_prior = 0.0;
        std::vector<double> mean;
        std::vector<std::vector<double>> cov_chol;  // lower Cholesky factor (after any ridge)
        double log_det = 0.0;
    };
    int dim = 0;
    std::vector<ClassStats> classes;
};

// Gaussian class-conditional fit; priors are class frequencies. Classes with
// fewer than two members are rejected unless allow_singletons, in which case
// the ridge keeps the covariance usable. Singular covariances get the ridge
// lambda = 1e-6 * trace/dim.
QDAModel qda_fit(const std::vector<std::vector<double>>& points,
                 const std::vector<std::string>& labels, bool allow_singletons = false);
std::string qda_predict(const QDAModel& model, const std::vector<double>& point);

// Leave-one-out accuracy of QDA on the classical MDS embedding of d. The
// embedding is computed once on the full matrix; each fold refits only the
// classifier. Optionally reports the confusion matrix as counts[true][pred].
double loocv_accuracy(const DistanceMatrix& d, const std::vector<std::string>& labels, int m,
                      std::map<std::string, std::map<std::string, int>>* confusion = nullptr);

enum class Linkage { Single, Average, Complete };
Linkage linkage_from_string(const std::string& s);

// Agglomerative clustering. Cluster ids: leaves 0..n-1, the k-th merge
// creates cluster n+k.
struct Dendrogram {
    struct Merge {
        int a = -1, b = -1;
        double height = 0.0;
    };
    int n_leaves = 0;
    std::vector<Merge> merges;
};
Dendrogram hclust(const DistanceMatrix& d, Linkage linkage);

// Height at which each leaf stops being a singleton.
std::vector<double> merging_heights(const Dendrogram& dend);

// LOOCV grid search over the mixed-metric weight and the MDS dimension.
// Ties resolve to the smallest w, then the smallest m.
struct GridSearchResult {
    double w = 0.0;
    int m = 0;
    double accuracy = 0.0;
    std::map<std::string, std::map<std::string, int>> confusion;
};
GridSearchResult qda_grid_search(const DistanceMatrix& dc, const DistanceMatrix& dr,
                                 const std::vector<std::string>& labels,
                                 const std::vector<double>& ws, const std::vector<int>& ms);

}  // namespace mtfda
