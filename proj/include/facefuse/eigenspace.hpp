#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <vector>

#include "facefuse/image.hpp"

namespace facefuse {

/// How many eigenfaces to keep: either a fixed count or the smallest count
/// whose eigenvalue sum reaches a fraction of the total energy.
struct DimensionSelector {
    enum class Kind { Fixed, Energy };
    Kind kind = Kind::Fixed;
    int fixed_u = 0;
    double energy = 0.0;

    static DimensionSelector fixed(int u);
    static DimensionSelector energy_fraction(double frac);
};

/// Eigenface basis built from a training set: the mean face, an orthonormal
/// n x u basis (one eigenface per column) and the matching covariance
/// eigenvalues, sorted descending.
struct Eigenspace {
    int n = 0;  // pixels per image
    int u = 0;  // retained dimension
    Eigen::VectorXd mean;
    Eigen::MatrixXd basis;
    Eigen::VectorXd eigenvalues;
};

/// Builds the eigenspace via the M x M Gram (snapshot) method, covariance
/// divisor M. Eigenvalues below 1e-10 * largest are dropped as numerical
/// zeros. skip_first drops that many leading eigenfaces before selection
/// (illumination-compensation knob, default off).
Eigenspace fit_eigenspace(const std::vector<GrayImage>& training, const DimensionSelector& sel,
                          int skip_first = 0);

/// coords = basis^T (vec(img) - mean).
Eigen::VectorXd project(const Eigenspace& es, const GrayImage& img);
Eigen::VectorXd project(const Eigenspace& es, const Eigen::VectorXd& pixels);

/// mean + basis * coords.
Eigen::VectorXd reconstruct(const Eigenspace& es, const Eigen::VectorXd& coords);

/// Versioned textual serialization (dimension header + whitespace-separated
/// numbers at full precision).
void write_eigenspace(const Eigenspace& es, std::ostream& out);
Eigenspace read_eigenspace(std::istream& in);

}  // namespace facefuse
