#include "facefuse/eigenspace.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "facefuse/errors.hpp"

namespace facefuse {

namespace {
constexpr double kRankCutoff = 1e-10;  // relative to largest eigenvalue
}

DimensionSelector DimensionSelector::fixed(int u) {
    if (u < 1) throw DataError("dimension selector: fixed U must be >= 1");
    DimensionSelector s;
    s.kind = Kind::Fixed;
    s.fixed_u = u;
    return s;
}

DimensionSelector DimensionSelector::energy_fraction(double frac) {
    if (frac <= 0.0 || frac > 1.0)
        throw DataError("dimension selector: energy fraction must be in (0,1]");
    DimensionSelector s;
    s.kind = Kind::Energy;
    s.energy = frac;
    return s;
}

Eigenspace fit_eigenspace(const std::vector<GrayImage>& training, const DimensionSelector& sel,
                          int skip_first) {
    const int m = static_cast<int>(training.size());
    if (m < 2) throw DataError("fit_eigenspace: need at least 2 training images");
    if (skip_first < 0) throw DataError("fit_eigenspace: skip_first must be >= 0");
    const int n = static_cast<int>(training[0].size());
    for (const auto& img : training)
        if (static_cast<int>(img.size()) != n)
            throw DataError("fit_eigenspace: training images have mismatched dimensions");

    Eigen::MatrixXd data(n, m);
    for (int j = 0; j < m; ++j)
        data.col(j) = Eigen::Map<const Eigen::VectorXd>(training[j].pixels.data(), n);
    const Eigen::VectorXd mean = data.rowwise().mean();
    data.colwise() -= mean;

    // Snapshot method: the nonzero spectrum of (1/M) X X^T equals that of the
    // M x M Gram matrix (1/M) X^T X.
    const Eigen::MatrixXd gram = (data.transpose() * data) / static_cast<double>(m);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
    if (solver.info() != Eigen::Success)
        throw NumericError("fit_eigenspace: Gram eigendecomposition failed");

    // Eigen returns ascending order; walk from the back for descending.
    const Eigen::VectorXd evals = solver.eigenvalues();
    const Eigen::MatrixXd evecs = solver.eigenvectors();
    const double lambda_max = std::max(evals(m - 1), 0.0);
    const double cutoff = kRankCutoff * lambda_max;

    std::vector<int> kept;  // indices into solver output, descending eigenvalue
    for (int i = m - 1; i >= 0; --i) {
        if (evals(i) > cutoff && evals(i) > 0.0) kept.push_back(i);
    }
    if (skip_first > static_cast<int>(kept.size()))
        throw DataError("fit_eigenspace: skip_first exceeds available rank " +
                        std::to_string(kept.size()));
    kept.erase(kept.begin(), kept.begin() + skip_first);
    const int rank = static_cast<int>(kept.size());

    int u;
    if (sel.kind == DimensionSelector::Kind::Fixed) {
        if (sel.fixed_u > rank)
            throw DataError("fit_eigenspace: requested U=" + std::to_string(sel.fixed_u) +
                            " exceeds available rank " + std::to_string(rank));
        u = sel.fixed_u;
    } else {
        double total = 0.0;
        for (int i : kept) total += evals(i);
        double acc = 0.0;
        u = 0;
        while (u < rank && acc < sel.energy * total - 1e-15) acc += evals(kept[u++]);
    }

    Eigenspace es;
    es.n = n;
    es.u = u;
    es.mean = mean;
    es.basis.resize(n, u);
    es.eigenvalues.resize(u);
    for (int j = 0; j < u; ++j) {
        const int i = kept[j];
        es.eigenvalues(j) = evals(i);
        Eigen::VectorXd v = data * evecs.col(i);
        v.normalize();
        // deterministic sign: the entry of largest magnitude is positive
        int arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0.0) v = -v;
        es.basis.col(j) = v;
    }
    return es;
}

Eigen::VectorXd project(const Eigenspace& es, const Eigen::VectorXd& pixels) {
    if (pixels.size() != es.n) throw DataError("project: pixel count mismatch");
    return es.basis.transpose() * (pixels - es.mean);
}

Eigen::VectorXd project(const Eigenspace& es, const GrayImage& img) {
    return project(es, Eigen::Map<const Eigen::VectorXd>(img.pixels.data(),
                                                         static_cast<int>(img.size())));
}

Eigen::VectorXd reconstruct(const Eigenspace& es, const Eigen::VectorXd& coords) {
    if (coords.size() != es.u) throw DataError("reconstruct: coordinate length mismatch");
    return es.mean + es.basis * coords;
}

void write_eigenspace(const Eigenspace& es, std::ostream& out) {
    out.precision(17);
    out << "facefuse-eigenspace 1\n" << es.n << " " << es.u << "\n";
    for (int i = 0; i < es.n; ++i) out << es.mean(i) << (i + 1 == es.n ? "\n" : " ");
    for (int j = 0; j < es.u; ++j) out << es.eigenvalues(j) << (j + 1 == es.u ? "\n" : " ");
    if (es.u == 0) out << "\n";
    for (int i = 0; i < es.n; ++i)
        for (int j = 0; j < es.u; ++j) out << es.basis(i, j) << (j + 1 == es.u ? "\n" : " ");
}

Eigenspace read_eigenspace(std::istream& in) {
    std::string tag;
    int version = 0;
    in >> tag >> version;
    if (!in || tag != "facefuse-eigenspace" || version != 1)
        throw DataError("read_eigenspace: bad header");
    Eigenspace es;
    in >> es.n >> es.u;
    if (!in || es.n < 1 || es.u < 0) throw DataError("read_eigenspace: bad dimensions");
    es.mean.resize(es.n);
    es.eigenvalues.resize(es.u);
    es.basis.resize(es.n, es.u);
    for (int i = 0; i < es.n; ++i) in >> es.mean(i);
    for (int j = 0; j < es.u; ++j) in >> es.eigenvalues(j);
    for (int i = 0; i < es.n; ++i)
        for (int j = 0; j < es.u; ++j) in >> es.basis(i, j);
    if (!in) throw DataError("read_eigenspace: truncated data");
    return es;
}

}  // namespace facefuse
