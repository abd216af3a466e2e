#pragma once

#include "qat/hilbert.hpp"

#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace qat {

// Named base frequencies in units of the secular frequency.
class BaseFrequencySet {
public:
    BaseFrequencySet() = default;
    explicit BaseFrequencySet(std::vector<std::pair<std::string, double>> bases);

    std::size_t size() const { return bases_.size(); }
    const std::string& name(std::size_t i) const { return bases_.at(i).first; }
    double value(std::size_t i) const { return bases_.at(i).second; }
    std::size_t index_of(const std::string& name) const;
    bool contains(const std::string& name) const;
    double value_of(const std::vector<int>& coeffs) const;
    const std::vector<std::pair<std::string, double>>& entries() const { return bases_; }

    bool operator==(const BaseFrequencySet& other) const { return bases_ == other.bases_; }

private:
    std::vector<std::pair<std::string, double>> bases_;
};

using BasesPtr = std::shared_ptr<const BaseFrequencySet>;

BasesPtr make_bases(std::vector<std::pair<std::string, double>> bases);

// Exact integer combination of base frequencies with its cached numeric value.
class FrequencyVector {
public:
    FrequencyVector() = default;
    FrequencyVector(BasesPtr bases, std::vector<int> coeffs);

    static FrequencyVector zero(const BasesPtr& bases);
    static FrequencyVector unit(const BasesPtr& bases, const std::string& name, int multiple = 1);

    const std::vector<int>& coeffs() const { return coeffs_; }
    const BasesPtr& bases() const { return bases_; }
    double value() const { return value_; }
    bool is_zero() const;
    std::string to_string() const;

    FrequencyVector operator-() const;
    FrequencyVector operator+(const FrequencyVector& other) const;
    FrequencyVector operator-(const FrequencyVector& other) const;
    FrequencyVector operator*(int k) const;
    bool operator==(const FrequencyVector& other) const { return coeffs_ == other.coeffs_; }

private:
    BasesPtr bases_;
    std::vector<int> coeffs_;
    double value_{0.0};
};

struct FourierMode {
    FrequencyVector freq;
    Matrix coeff;
};

// sum_k coeff_k e^{i Lambda_k s}. Modes are keyed by their exact frequency vector,
// so equal frequencies are merged on insertion and iteration order is deterministic.
class FourierSeries {
public:
    struct Entry {
        double value;
        Matrix coeff;
    };
    using Map = std::map<std::vector<int>, Entry>;

    FourierSeries() = default;
    FourierSeries(BasesPtr bases, Index dim);

    const BasesPtr& bases() const { return bases_; }
    Index dim() const { return dim_; }
    std::size_t size() const { return modes_.size(); }
    bool empty() const { return modes_.empty(); }
    const Map& entries() const { return modes_; }
    std::vector<FourierMode> modes() const;

    void add(const FrequencyVector& freq, const Matrix& coeff);
    void add(const std::vector<int>& key, const Matrix& coeff);
    // Adds (freq, coeff) and its conjugate partner (-freq, coeff†).
    void add_hermitian(const FrequencyVector& freq, const Matrix& coeff);
    const Matrix* find(const FrequencyVector& freq) const;
    const Matrix* find(const std::vector<int>& key) const;

    Matrix evaluate(double s) const;
    void evaluate_into(double s, Matrix& out) const;  // out += series(s)
    Matrix evaluate_derivative(double s) const;

    // Series conjugate (Lambda, h) -> (-Lambda, h†).
    FourierSeries adjoint() const;
    double max_coeff_norm() const;
    double min_abs_frequency() const;
    double max_abs_frequency() const;
    // max_k ||h_{-k} - h_k†|| relative to the largest coefficient; zero when paired.
    double hermitian_pairing_residual() const;
    bool compatible(const FourierSeries& other) const;

    FourierSeries& operator+=(const FourierSeries& other);
    FourierSeries& operator-=(const FourierSeries& other);
    FourierSeries& operator*=(Complex c);
    friend FourierSeries operator+(FourierSeries a, const FourierSeries& b) { return a += b; }
    friend FourierSeries operator-(FourierSeries a, const FourierSeries& b) { return a -= b; }
    friend FourierSeries operator*(Complex c, FourierSeries a) { return a *= c; }

private:
    void require_compatible(const FourierSeries& other, const char* where) const;

    BasesPtr bases_;
    Index dim_{0};
    Map modes_;
};

// Order-indexed stack; orders()[n] carries an implicit lambda^n prefactor.
struct PerturbativeSeries {
    std::vector<FourierSeries> orders;

    PerturbativeSeries() = default;
    PerturbativeSeries(const BasesPtr& bases, Index dim, int max_order);

    int max_order() const { return static_cast<int>(orders.size()) - 1; }
    const FourierSeries& at(int n) const;
    FourierSeries& at(int n);
    const BasesPtr& bases() const { return orders.at(0).bases(); }
    Index dim() const { return orders.at(0).dim(); }
};

inline constexpr double kDefaultRelativeAmpTol = 1e-14;

FourierSeries series_commutator(const FourierSeries& a, const FourierSeries& b);
FourierSeries partial_average(const FourierSeries& a, double cutoff);
FourierSeries fast_part(const FourierSeries& a, double cutoff);
FourierSeries antiderivative(const FourierSeries& a);
FourierSeries canonicalize(const FourierSeries& a, double amp_tol);
// Uses kDefaultRelativeAmpTol times the largest coefficient norm.
FourierSeries canonicalize(const FourierSeries& a);
Matrix evaluate(const FourierSeries& a, double s);

// sum_{n=first}^{last} lambda^n orders[n], merged into one series.
FourierSeries weighted_sum(const std::vector<FourierSeries>& orders, double lambda, int first, int last);

}  // namespace qat
