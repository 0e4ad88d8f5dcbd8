#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <fstream>
#include <string>
#include <vector>

#include "distfield/common.hpp"
#include "distfield/error.hpp"
#include "distfield/field.hpp"

namespace distfield {

// Principal-component representation of vectorized distortion fields
// (row-major cells, x then y per cell). Components are orthonormal rows in
// descending explained variance; zero-variance directions are not retained.
struct PcaModel {
    int gridW = 0, gridH = 0, blockSize = kBlockSize;
    std::vector<double> meanField;                 // length 2*gridW*gridH
    std::vector<std::vector<double>> components;   // k rows, unit norm
    std::vector<double> variances;                 // per-component, non-increasing

    size_t dim() const { return size_t(2) * gridW * gridH; }
    size_t k() const { return components.size(); }

    bool gridMatches(const DistortionField& f) const {
        return f.gridW == gridW && f.gridH == gridH && f.blockSize == blockSize;
    }
};

inline std::vector<double> vectorizeField(const DistortionField& f) {
    std::vector<double> v(f.vectors.size() * 2);
    for (size_t i = 0; i < f.vectors.size(); ++i) {
        v[2 * i] = f.vectors[i].x;
        v[2 * i + 1] = f.vectors[i].y;
    }
    return v;
}

inline DistortionField unvectorizeField(const std::vector<double>& v, int gridW, int gridH,
                                        int blockSize) {
    DistortionField f(gridW, gridH, blockSize);
    for (size_t i = 0; i < f.vectors.size(); ++i) f.vectors[i] = {v[2 * i], v[2 * i + 1]};
    return f;
}

// Mean-centered eigendecomposition of the sample covariance via the
// small-side Gram matrix; top-k components retained (k is clamped to the
// effective rank and to sampleCount - 1).
inline PcaModel pcaFit(const std::vector<DistortionField>& fields, int k) {
    if (fields.size() < 2) throw InsufficientSamples("pcaFit needs >= 2 fields");
    if (k < 1) throw InsufficientSamples("pcaFit needs k >= 1");
    for (const DistortionField& f : fields)
        if (!f.sameGrid(fields[0])) throw GridMismatch("pcaFit grids differ");

    size_t n = fields.size();
    size_t d = fields[0].vectors.size() * 2;
    Eigen::MatrixXd X(n, d);
    for (size_t s = 0; s < n; ++s) {
        std::vector<double> v = vectorizeField(fields[s]);
        for (size_t i = 0; i < d; ++i) X(long(s), long(i)) = v[i];
    }
    Eigen::RowVectorXd mean = X.colwise().mean();
    Eigen::MatrixXd Xc = X.rowwise() - mean;

    Eigen::MatrixXd gram = Xc * Xc.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    if (eig.info() != Eigen::Success) throw SingularSystem("pcaFit eigensolver failed");

    PcaModel model;
    model.gridW = fields[0].gridW;
    model.gridH = fields[0].gridH;
    model.blockSize = fields[0].blockSize;
    model.meanField.assign(mean.data(), mean.data() + d);

    size_t maxK = std::min(size_t(k), std::min(n - 1, d));
    double lambdaMax = std::max(eig.eigenvalues().maxCoeff(), 0.0);
    double tol = std::max(1e-12, 1e-12 * lambdaMax);
    for (size_t r = 0; r < maxK; ++r) {
        long idx = long(n - 1 - r);  // eigenvalues come back ascending
        double lambda = eig.eigenvalues()(idx);
        if (lambda <= tol) break;
        Eigen::VectorXd comp = Xc.transpose() * eig.eigenvectors().col(idx) / std::sqrt(lambda);
        // canonical sign: first entry of visible magnitude is positive
        for (long i = 0; i < comp.size(); ++i) {
            if (std::abs(comp(i)) > 1e-12) {
                if (comp(i) < 0.0) comp = -comp;
                break;
            }
        }
        model.components.emplace_back(comp.data(), comp.data() + d);
        model.variances.push_back(lambda / double(n - 1));
    }
    return model;
}

// coefficients = components * (vec(field) - mean)
inline std::vector<double> pcaProject(const PcaModel& model, const DistortionField& field) {
    if (!model.gridMatches(field)) throw GridMismatch("pcaProject grid");
    std::vector<double> v = vectorizeField(field);
    std::vector<double> coeffs(model.k(), 0.0);
    for (size_t c = 0; c < model.k(); ++c) {
        double s = 0.0;
        for (size_t i = 0; i < model.dim(); ++i)
            s += model.components[c][i] * (v[i] - model.meanField[i]);
        coeffs[c] = s;
    }
    return coeffs;
}

// mean + sum_i coeff_i * component_i
inline DistortionField pcaReconstruct(const PcaModel& model, const std::vector<double>& coeffs) {
    if (coeffs.size() > model.k()) throw TooManyCoefficients("pcaReconstruct");
    std::vector<double> v = model.meanField;
    for (size_t c = 0; c < coeffs.size(); ++c)
        for (size_t i = 0; i < model.dim(); ++i) v[i] += coeffs[c] * model.components[c][i];
    return unvectorizeField(v, model.gridW, model.gridH, model.blockSize);
}

// The best any k-component PCA method could do on this ground truth: project
// the true field onto the model span and reconstruct. Stands in for the
// coefficient-regression baselines, as a strictly stronger comparator.
inline DistortionField pcaOracleRectify(const PcaModel& model, const DistortionField& gtField) {
    return pcaReconstruct(model, pcaProject(model, gtField));
}

// --- "DPCA" container ---

inline std::string encodeDpca(const PcaModel& m) {
    std::string out = "DPCA";
    putU32(out, 1);
    putU32(out, uint32_t(m.gridW));
    putU32(out, uint32_t(m.gridH));
    putU32(out, uint32_t(m.blockSize));
    putU32(out, uint32_t(m.k()));
    for (double v : m.meanField) putF32(out, float(v));
    for (const std::vector<double>& comp : m.components)
        for (double v : comp) putF32(out, float(v));
    for (double v : m.variances) putF32(out, float(v));
    return out;
}

inline PcaModel decodeDpca(const std::string& blob) {
    if (blob.size() < 24 || blob.compare(0, 4, "DPCA") != 0) throw IoError("not a DPCA blob");
    size_t pos = 4;
    if (getU32(blob, pos) != 1) throw IoError("unsupported DPCA version");
    PcaModel m;
    m.gridW = int(getU32(blob, pos));
    m.gridH = int(getU32(blob, pos));
    m.blockSize = int(getU32(blob, pos));
    uint32_t k = getU32(blob, pos);
    size_t d = size_t(2) * m.gridW * m.gridH;
    if (blob.size() != 24 + 4 * (d + size_t(k) * d + k)) throw IoError("truncated DPCA blob");
    m.meanField.resize(d);
    for (double& v : m.meanField) v = getF32(blob, pos);
    m.components.assign(k, std::vector<double>(d));
    for (auto& comp : m.components)
        for (double& v : comp) v = getF32(blob, pos);
    m.variances.resize(k);
    for (double& v : m.variances) v = getF32(blob, pos);
    return m;
}

inline void saveDpca(const PcaModel& m, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path);
    std::string blob = encodeDpca(m);
    f.write(blob.data(), std::streamsize(blob.size()));
    if (!f) throw IoError("write failed: " + path);
}

inline PcaModel loadDpca(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot read " + path);
    std::string blob((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return decodeDpca(blob);
}

}  // namespace distfield
