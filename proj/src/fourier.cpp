#include "qat/fourier.hpp"

#include "qat/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

namespace qat {

namespace {

constexpr double kFragilityWindow = 1e-6;
constexpr double kDegenerateFrequency = 1e-12;

std::vector<int> negated(const std::vector<int>& key) {
    std::vector<int> r(key.size());
    std::transform(key.begin(), key.end(), r.begin(), [](int c) { return -c; });
    return r;
}

bool is_zero_key(const std::vector<int>& key) {
    return std::all_of(key.begin(), key.end(), [](int c) { return c == 0; });
}

std::string key_string(const BaseFrequencySet& bases, const std::vector<int>& key) {
    std::ostringstream out;
    bool first = true;
    for (std::size_t i = 0; i < key.size(); ++i) {
        const int c = key[i];
        if (c == 0) {
            continue;
        }
        if (first) {
            if (c < 0) out << "-";
        } else {
            out << (c < 0 ? " - " : " + ");
        }
        if (std::abs(c) != 1) out << std::abs(c) << " ";
        out << bases.name(i);
        first = false;
    }
    if (first) out << "0";
    return out.str();
}

}  // namespace

BaseFrequencySet::BaseFrequencySet(std::vector<std::pair<std::string, double>> bases)
    : bases_(std::move(bases)) {
    std::set<std::string> seen;
    for (const auto& [name, value] : bases_) {
        if (name.empty()) {
            throw std::invalid_argument("BaseFrequencySet: empty base name");
        }
        if (!seen.insert(name).second) {
            throw std::invalid_argument("BaseFrequencySet: duplicate base '" + name + "'");
        }
        if (!std::isfinite(value)) {
            throw std::invalid_argument("BaseFrequencySet: base '" + name + "' is not finite");
        }
    }
}

std::size_t BaseFrequencySet::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < bases_.size(); ++i) {
        if (bases_[i].first == name) return i;
    }
    throw std::out_of_range("BaseFrequencySet: unknown base '" + name + "'");
}

bool BaseFrequencySet::contains(const std::string& name) const {
    return std::any_of(bases_.begin(), bases_.end(), [&](const auto& b) { return b.first == name; });
}

double BaseFrequencySet::value_of(const std::vector<int>& coeffs) const {
    if (coeffs.size() != bases_.size()) {
        throw std::invalid_argument("BaseFrequencySet: coefficient vector has wrong length");
    }
    double v = 0.0;
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        v += coeffs[i] * bases_[i].second;
    }
    return v;
}

BasesPtr make_bases(std::vector<std::pair<std::string, double>> bases) {
    return std::make_shared<const BaseFrequencySet>(std::move(bases));
}

FrequencyVector::FrequencyVector(BasesPtr bases, std::vector<int> coeffs)
    : bases_(std::move(bases)), coeffs_(std::move(coeffs)) {
    if (!bases_) {
        throw std::invalid_argument("FrequencyVector: null base set");
    }
    value_ = bases_->value_of(coeffs_);
}

FrequencyVector FrequencyVector::zero(const BasesPtr& bases) {
    return FrequencyVector(bases, std::vector<int>(bases->size(), 0));
}

FrequencyVector FrequencyVector::unit(const BasesPtr& bases, const std::string& name, int multiple) {
    std::vector<int> c(bases->size(), 0);
    c[bases->index_of(name)] = multiple;
    return FrequencyVector(bases, std::move(c));
}

bool FrequencyVector::is_zero() const { return is_zero_key(coeffs_); }

std::string FrequencyVector::to_string() const { return key_string(*bases_, coeffs_); }

FrequencyVector FrequencyVector::operator-() const { return FrequencyVector(bases_, negated(coeffs_)); }

FrequencyVector FrequencyVector::operator+(const FrequencyVector& other) const {
    if (coeffs_.size() != other.coeffs_.size()) {
        throw std::invalid_argument("FrequencyVector: incompatible base sets");
    }
    std::vector<int> c(coeffs_);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += other.coeffs_[i];
    return FrequencyVector(bases_, std::move(c));
}

FrequencyVector FrequencyVector::operator-(const FrequencyVector& other) const { return *this + (-other); }

FrequencyVector FrequencyVector::operator*(int k) const {
    std::vector<int> c(coeffs_);
    for (int& x : c) x *= k;
    return FrequencyVector(bases_, std::move(c));
}

FourierSeries::FourierSeries(BasesPtr bases, Index dim) : bases_(std::move(bases)), dim_(dim) {
    if (!bases_) {
        throw std::invalid_argument("FourierSeries: null base set");
    }
    if (dim_ <= 0) {
        throw std::invalid_argument("FourierSeries: dimension must be positive");
    }
}

std::vector<FourierMode> FourierSeries::modes() const {
    std::vector<FourierMode> r;
    r.reserve(modes_.size());
    for (const auto& [key, e] : modes_) {
        r.push_back({FrequencyVector(bases_, key), e.coeff});
    }
    return r;
}

void FourierSeries::add(const std::vector<int>& key, const Matrix& coeff) {
    if (coeff.rows() != dim_ || coeff.cols() != dim_) {
        throw std::invalid_argument("FourierSeries::add: coefficient dimension mismatch");
    }
    if (key.size() != bases_->size()) {
        throw std::invalid_argument("FourierSeries::add: frequency vector has wrong length");
    }
    auto it = modes_.find(key);
    if (it == modes_.end()) {
        modes_.emplace(key, Entry{bases_->value_of(key), coeff});
    } else {
        it->second.coeff += coeff;
    }
}

void FourierSeries::add(const FrequencyVector& freq, const Matrix& coeff) {
    if (freq.bases() != bases_ && !(*freq.bases() == *bases_)) {
        throw std::invalid_argument("FourierSeries::add: frequency uses a different base set");
    }
    add(freq.coeffs(), coeff);
}

void FourierSeries::add_hermitian(const FrequencyVector& freq, const Matrix& coeff) {
    add(freq, coeff);
    add(-freq, coeff.adjoint());
}

const Matrix* FourierSeries::find(const std::vector<int>& key) const {
    auto it = modes_.find(key);
    return it == modes_.end() ? nullptr : &it->second.coeff;
}

const Matrix* FourierSeries::find(const FrequencyVector& freq) const { return find(freq.coeffs()); }

Matrix FourierSeries::evaluate(double s) const {
    Matrix out = Matrix::Zero(dim_, dim_);
    evaluate_into(s, out);
    return out;
}

void FourierSeries::evaluate_into(double s, Matrix& out) const {
    for (const auto& [key, e] : modes_) {
        out += std::polar(1.0, e.value * s) * e.coeff;
    }
}

Matrix FourierSeries::evaluate_derivative(double s) const {
    Matrix out = Matrix::Zero(dim_, dim_);
    for (const auto& [key, e] : modes_) {
        out += Complex(0.0, e.value) * std::polar(1.0, e.value * s) * e.coeff;
    }
    return out;
}

FourierSeries FourierSeries::adjoint() const {
    FourierSeries r(bases_, dim_);
    for (const auto& [key, e] : modes_) {
        r.add(negated(key), e.coeff.adjoint());
    }
    return r;
}

double FourierSeries::max_coeff_norm() const {
    double m = 0.0;
    for (const auto& [key, e] : modes_) m = std::max(m, e.coeff.norm());
    return m;
}

double FourierSeries::min_abs_frequency() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& [key, e] : modes_) m = std::min(m, std::abs(e.value));
    return m;
}

double FourierSeries::max_abs_frequency() const {
    double m = 0.0;
    for (const auto& [key, e] : modes_) m = std::max(m, std::abs(e.value));
    return m;
}

double FourierSeries::hermitian_pairing_residual() const {
    const double scale = max_coeff_norm();
    if (scale == 0.0) return 0.0;
    double worst = 0.0;
    for (const auto& [key, e] : modes_) {
        const Matrix* partner = find(negated(key));
        const double r = partner ? (*partner - e.coeff.adjoint()).norm() : e.coeff.norm();
        worst = std::max(worst, r);
    }
    return worst / scale;
}

bool FourierSeries::compatible(const FourierSeries& other) const {
    if (dim_ != other.dim_) return false;
    return bases_ == other.bases_ || (bases_ && other.bases_ && *bases_ == *other.bases_);
}

void FourierSeries::require_compatible(const FourierSeries& other, const char* where) const {
    if (dim_ != other.dim_) {
        std::ostringstream msg;
        msg << where << ": dimension mismatch (" << dim_ << " vs " << other.dim_ << ")";
        throw std::invalid_argument(msg.str());
    }
    if (!compatible(other)) {
        throw std::invalid_argument(std::string(where) + ": series use different base sets");
    }
}

FourierSeries& FourierSeries::operator+=(const FourierSeries& other) {
    require_compatible(other, "FourierSeries::operator+=");
    for (const auto& [key, e] : other.modes_) add(key, e.coeff);
    return *this;
}

FourierSeries& FourierSeries::operator-=(const FourierSeries& other) {
    require_compatible(other, "FourierSeries::operator-=");
    for (const auto& [key, e] : other.modes_) add(key, -e.coeff);
    return *this;
}

FourierSeries& FourierSeries::operator*=(Complex c) {
    for (auto& [key, e] : modes_) e.coeff *= c;
    return *this;
}

PerturbativeSeries::PerturbativeSeries(const BasesPtr& bases, Index dim, int max_order) {
    if (max_order < 0) {
        throw std::invalid_argument("PerturbativeSeries: max order must be >= 0");
    }
    orders.assign(static_cast<std::size_t>(max_order) + 1, FourierSeries(bases, dim));
}

const FourierSeries& PerturbativeSeries::at(int n) const {
    if (n < 0 || n > max_order()) {
        throw std::out_of_range("PerturbativeSeries: order " + std::to_string(n) + " not present");
    }
    return orders[static_cast<std::size_t>(n)];
}

FourierSeries& PerturbativeSeries::at(int n) {
    return const_cast<FourierSeries&>(static_cast<const PerturbativeSeries&>(*this).at(n));
}

FourierSeries series_commutator(const FourierSeries& a, const FourierSeries& b) {
    if (a.dim() != b.dim()) {
        std::ostringstream msg;
        msg << "series_commutator: dimension mismatch (" << a.dim() << " vs " << b.dim() << ")";
        throw std::invalid_argument(msg.str());
    }
    if (!a.compatible(b)) {
        throw std::invalid_argument("series_commutator: series use different base sets");
    }
    FourierSeries r(a.bases(), a.dim());
    const std::size_t nb = a.bases()->size();
    std::map<std::vector<int>, Matrix> acc;
    std::vector<int> key(nb);
    for (const auto& [ka, ea] : a.entries()) {
        for (const auto& [kb, eb] : b.entries()) {
            for (std::size_t i = 0; i < nb; ++i) key[i] = ka[i] + kb[i];
            auto it = acc.find(key);
            if (it == acc.end()) {
                it = acc.emplace(key, Matrix::Zero(a.dim(), a.dim())).first;
            }
            it->second.noalias() += ea.coeff * eb.coeff;
            it->second.noalias() -= eb.coeff * ea.coeff;
        }
    }
    for (auto& [k, m] : acc) r.add(k, m);
    const double scale = 2.0 * a.max_coeff_norm() * b.max_coeff_norm();
    return canonicalize(r, kDefaultRelativeAmpTol * scale);
}

FourierSeries partial_average(const FourierSeries& a, double cutoff) {
    if (!(cutoff > 0.0 && cutoff < 1.0)) {
        throw std::invalid_argument("partial_average: cutoff must lie in (0, 1)");
    }
    FourierSeries r(a.bases(), a.dim());
    for (const auto& [key, e] : a.entries()) {
        const double f = std::abs(e.value);
        if (std::abs(f - cutoff) < kFragilityWindow) {
            std::ostringstream msg;
            msg << "partial_average: frequency " << key_string(*a.bases(), key) << " = " << e.value
                << " lies within " << kFragilityWindow << " of the cutoff " << cutoff
                << "; slow/fast classification is fragile";
            diag::warn(msg.str());
        }
        if (f <= cutoff) r.add(key, e.coeff);
    }
    return r;
}

FourierSeries fast_part(const FourierSeries& a, double cutoff) {
    if (!(cutoff > 0.0 && cutoff < 1.0)) {
        throw std::invalid_argument("fast_part: cutoff must lie in (0, 1)");
    }
    FourierSeries r(a.bases(), a.dim());
    for (const auto& [key, e] : a.entries()) {
        if (std::abs(e.value) > cutoff) r.add(key, e.coeff);
    }
    return r;
}

FourierSeries antiderivative(const FourierSeries& a) {
    FourierSeries r(a.bases(), a.dim());
    for (const auto& [key, e] : a.entries()) {
        if (is_zero_key(key)) {
            throw std::invalid_argument(
                "antiderivative: constant mode present; it belongs to the effective Hamiltonian");
        }
        if (std::abs(e.value) < kDegenerateFrequency) {
            throw std::invalid_argument("antiderivative: frequency " + key_string(*a.bases(), key) +
                                        " is numerically zero (degenerate denominator)");
        }
        r.add(key, e.coeff / Complex(0.0, e.value));
    }
    return r;
}

FourierSeries canonicalize(const FourierSeries& a, double amp_tol) {
    if (amp_tol < 0.0) {
        throw std::invalid_argument("canonicalize: amp_tol must be >= 0");
    }
    FourierSeries r(a.bases(), a.dim());
    std::set<std::vector<int>> dropped;
    for (const auto& [key, e] : a.entries()) {
        const double own = e.coeff.norm();
        const Matrix* partner = a.find(negated(key));
        const double pair = std::max(own, partner ? partner->norm() : 0.0);
        const bool drop = (pair < amp_tol) || (pair == 0.0);
        if (drop) {
            dropped.insert(key);
        } else {
            r.add(key, e.coeff);
        }
    }
    for (const auto& key : dropped) {
        if (r.find(negated(key)) != nullptr) {
            throw std::logic_error("canonicalize: Hermitian pairing broken for frequency " +
                                   key_string(*a.bases(), key));
        }
    }
    return r;
}

FourierSeries canonicalize(const FourierSeries& a) {
    return canonicalize(a, kDefaultRelativeAmpTol * a.max_coeff_norm());
}

Matrix evaluate(const FourierSeries& a, double s) { return a.evaluate(s); }

FourierSeries weighted_sum(const std::vector<FourierSeries>& orders, double lambda, int first, int last) {
    if (orders.empty()) {
        throw std::invalid_argument("weighted_sum: no orders");
    }
    FourierSeries r(orders.front().bases(), orders.front().dim());
    for (int n = std::max(first, 0); n <= last && n < static_cast<int>(orders.size()); ++n) {
        FourierSeries term = orders[static_cast<std::size_t>(n)];
        term *= std::pow(lambda, n);
        r += term;
    }
    return r;
}

}  // namespace qat
