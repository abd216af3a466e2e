#include "qat/msgate.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>

namespace qat {

namespace {

constexpr double kCollisionTol = 1e-9;

double reduce_phase(double phi) {
    const double two_pi = 2.0 * std::numbers::pi;
    double r = std::fmod(phi, two_pi);
    if (r < 0.0) r += two_pi;
    return r;
}

Matrix fock_a(int n_max) {
    Matrix a = Matrix::Zero(n_max + 1, n_max + 1);
    for (int n = 1; n <= n_max; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

Matrix power(const Matrix& m, int p) {
    Matrix r = Matrix::Identity(m.rows(), m.cols());
    for (int i = 0; i < p; ++i) r = r * m;
    return r;
}

double factorial(int n) { return std::tgamma(n + 1.0); }

using Lift = std::function<Matrix(const DriveTone&, const Matrix&)>;

// Adds tone contributions of order n: i^{n+1} e^{i phi_-} Lambda'_Omega c_h lift(C_{n,k})
// at frequency (n - 2k) nu - Lambda_Delta + h omega, plus the conjugate partner.
void add_tone_order(FourierSeries& out, const MsModel& model, const DriveTone& tone, int n,
                    const std::vector<Matrix>& adag_pow, const std::vector<Matrix>& a_pow, const Lift& lift) {
    const BasesPtr& bases = model.bases;
    const FrequencyVector nu = FrequencyVector::unit(bases, "nu");
    const double rabi_p = std::exp(-0.5 * model.eta * model.eta) * tone.rabi;
    const Complex prefactor = std::pow(kI, n + 1) * std::polar(1.0, tone.phi_minus) * rabi_p;
    for (int k = 0; k <= n; ++k) {
        const Matrix c = adag_pow[static_cast<std::size_t>(n - k)] * a_pow[static_cast<std::size_t>(k)] /
                         (factorial(n - k) * factorial(k));
        const Matrix lifted = lift(tone, c);
        const FrequencyVector bare = nu * (n - 2 * k) - tone.detuning;
        for (const auto& [h, ch] : tone.window.harmonics()) {
            FrequencyVector f = bare;
            if (h != 0) f = f + FrequencyVector::unit(bases, "omega", h);
            if (!f.is_zero() && std::abs(f.value()) < kCollisionTol) {
                std::ostringstream msg;
                msg << "build_interaction: order " << n << " frequency " << f.to_string()
                    << " is numerically zero (window harmonic " << h << " collides with the beat of a tone "
                    << "at Lambda_Delta = " << tone.detuning.to_string() << ")";
                throw MsConfigurationError(msg.str());
            }
            if (h != 0 && f.is_zero()) {
                std::ostringstream msg;
                msg << "build_interaction: window harmonic " << h << " is resonant with the beat of the tone "
                    << "at Lambda_Delta = " << tone.detuning.to_string() << " (order " << n << ")";
                throw MsConfigurationError(msg.str());
            }
            out.add_hermitian(f, prefactor * ch * lifted);
        }
    }
}

PerturbativeSeries build_series(const MsModel& model, Index dim, const Lift& lift) {
    model.validate();
    PerturbativeSeries h(model.bases, dim, model.max_order);
    const Matrix a = fock_a(model.n_max);
    const Matrix ad = a.adjoint();
    std::vector<Matrix> a_pow, ad_pow;
    for (int p = 0; p <= model.max_order; ++p) {
        a_pow.push_back(power(a, p));
        ad_pow.push_back(power(ad, p));
    }
    for (int n = model.include_carrier ? 0 : 1; n <= model.max_order; ++n) {
        for (const auto& tone : model.tones) {
            add_tone_order(h.at(n), model, tone, n, ad_pow, a_pow, lift);
        }
        h.at(n) = canonicalize(h.at(n));
    }
    return h;
}

Matrix tone_spin(const DriveTone& tone) { return qubit_spin_ops(2, tone.phi_plus).j_phi_y; }

// Lambda_Omega w(s) (f(s) (R D0' R†) + h.c.) on the Fock factor; D0' = D(i eta) minus the
// carrier constant unless it is kept.
class ToneReference {
public:
    ToneReference(const MsModel& model, const DriveTone& tone, bool include_carrier) : tone_(tone) {
        const Matrix a = fock_a(model.n_max);
        d0_ = matrix_exp(Complex(0.0, model.eta) * (a + a.adjoint()));
        if (!include_carrier) {
            d0_ -= std::exp(-0.5 * model.eta * model.eta) * Matrix::Identity(d0_.rows(), d0_.cols());
        }
        phase_.resize(model.n_max + 1);
    }

    void add_into(double s, double scale, Matrix& out) {
        const double w = tone_.window.value(s);
        if (w == 0.0) return;
        const Complex f = kI * std::polar(1.0, tone_.phi_minus - tone_.detuning.value() * s);
        for (Index n = 0; n < phase_.size(); ++n) phase_(n) = std::polar(1.0, s * static_cast<double>(n));
        const Complex c = scale * tone_.rabi * w * f;
        const Index d = d0_.rows();
        for (Index j = 0; j < d; ++j) {
            for (Index i = 0; i < d; ++i) {
                const Complex v = c * phase_(i) * std::conj(phase_(j)) * d0_(i, j);
                out(i, j) += v;
                out(j, i) += std::conj(v);
            }
        }
    }

private:
    DriveTone tone_;
    Matrix d0_;
    Vector phase_;
};

void require_single_flat_tone(const MsModel& model, const char* where) {
    if (model.tones.size() != 1 || model.tones[0].window.kind != WindowKind::flat ||
        model.tones[0].sideband != 1) {
        throw std::invalid_argument(std::string(where) + ": requires a single flat first-sideband tone");
    }
}

}  // namespace

std::string to_string(WindowKind kind) { return kind == WindowKind::flat ? "flat" : "sin4"; }

WindowKind window_kind_from_string(const std::string& name) {
    if (name == "flat") return WindowKind::flat;
    if (name == "sin4") return WindowKind::sin4;
    throw std::invalid_argument("unknown window kind '" + name + "' (expected flat or sin4)");
}

std::vector<std::pair<int, double>> PulseWindow::harmonics() const {
    if (kind == WindowKind::flat) return {{0, 1.0}};
    // sin^4(x/2) = (3 - 4 cos x + cos 2x) / 8
    return {{-2, 1.0 / 16.0}, {-1, -0.25}, {0, 3.0 / 8.0}, {1, -0.25}, {2, 1.0 / 16.0}};
}

double PulseWindow::value(double s) const {
    if (kind == WindowKind::flat) return 1.0;
    const double x = std::sin(0.5 * omega * s);
    return x * x * x * x;
}

void MsModel::validate() const {
    if (!(eta > 0.0 && eta < 1.0)) throw MsConfigurationError("MsModel: eta must lie in (0, 1)");
    if (n_max < 1) throw MsConfigurationError("MsModel: n_max must be >= 1");
    if (max_order < 1) throw MsConfigurationError("MsModel: max order must be >= 1");
    if (!bases || !bases->contains("nu") || bases->value(bases->index_of("nu")) != 1.0) {
        throw MsConfigurationError("MsModel: base set must contain nu = 1");
    }
    if (tones.empty()) throw MsConfigurationError("MsModel: at least one tone required");
    for (const auto& t : tones) {
        if (!(t.rabi > 0.0)) throw MsConfigurationError("MsModel: tone Rabi coupling must be positive");
        if (t.sideband != 1 && t.sideband != 2) throw MsConfigurationError("MsModel: sideband must be 1 or 2");
        if (t.window.kind == WindowKind::sin4) {
            if (!bases->contains("omega") || !(t.window.omega > 0.0)) {
                throw MsConfigurationError("MsModel: windowed tone needs a positive omega base");
            }
            if (std::abs(bases->value(bases->index_of("omega")) - t.window.omega) > 1e-15) {
                throw MsConfigurationError("MsModel: window frequency disagrees with the omega base");
            }
        }
    }
}

bool MsModel::shared_phi_plus() const {
    for (const auto& t : tones) {
        if (std::abs(t.phi_plus - tones.front().phi_plus) > 1e-15) return false;
    }
    return true;
}

MsModel make_model(double eta, int n_max, int max_order, const std::vector<ToneSpec>& tones,
                   std::optional<double> window_omega, bool include_carrier) {
    std::vector<std::pair<std::string, double>> b{{"nu", 1.0}};
    bool need_omega = window_omega.has_value();
    for (const auto& t : tones) need_omega = need_omega || t.windowed || t.beat_windows.has_value();
    if (need_omega) {
        if (!window_omega || !(*window_omega > 0.0)) {
            throw MsConfigurationError("make_model: windowed tones require a positive window frequency");
        }
        b.emplace_back("omega", *window_omega);
    }
    for (std::size_t i = 0; i < tones.size(); ++i) {
        if (!tones[i].beat_windows) {
            if (!(tones[i].beat > 0.0)) {
                throw MsConfigurationError("make_model: tone beat must be positive");
            }
            b.emplace_back("delta" + std::to_string(i + 1), tones[i].beat);
        }
    }
    MsModel m;
    m.eta = eta;
    m.n_max = n_max;
    m.max_order = max_order;
    m.include_carrier = include_carrier;
    m.bases = make_bases(std::move(b));
    for (std::size_t i = 0; i < tones.size(); ++i) {
        const ToneSpec& s = tones[i];
        DriveTone t;
        t.rabi = s.rabi;
        t.sideband = s.sideband;
        t.phi_plus = reduce_phase(s.phi_plus);
        t.phi_minus = reduce_phase(s.phi_minus);
        const FrequencyVector beat = s.beat_windows
                                         ? FrequencyVector::unit(m.bases, "omega", *s.beat_windows)
                                         : FrequencyVector::unit(m.bases, "delta" + std::to_string(i + 1));
        t.detuning = FrequencyVector::unit(m.bases, "nu", s.sideband) - beat;
        if (s.windowed) t.window = PulseWindow{WindowKind::sin4, *window_omega};
        m.tones.push_back(t);
    }
    m.validate();
    return m;
}

MsModel flat_model(double eta, double rabi, double delta, double phi_plus, double phi_minus, int n_max,
                   int max_order) {
    ToneSpec t;
    t.rabi = rabi;
    t.beat = delta;
    t.phi_plus = phi_plus;
    t.phi_minus = phi_minus;
    return make_model(eta, n_max, max_order, {t});
}

MsModel shaped_scenario(double eta, double rabi1, int n_max, int max_order, const ShapedParameters& p) {
    const double omega = p.delta2 / p.delta2_over_omega;
    ToneSpec t1;
    t1.rabi = rabi1;
    t1.sideband = 1;
    t1.beat_windows = p.delta1_over_delta2 * p.delta2_over_omega;
    t1.windowed = true;
    ToneSpec t2 = t1;
    t2.rabi = p.rabi_ratio * rabi1;
    t2.sideband = 2;
    t2.beat_windows = p.delta2_over_omega;
    return make_model(eta, n_max, max_order, {t1, t2}, omega);
}

double shaped_gate_time(const ShapedParameters& p) {
    return 2.0 * std::numbers::pi / (p.delta2 / p.delta2_over_omega);
}

PerturbativeSeries build_interaction(const MsModel& model) {
    const HilbertSpec spec = model.spec();
    return build_series(model, spec.dim(),
                        [](const DriveTone& t, const Matrix& c) { return kron(tone_spin(t), c); });
}

PerturbativeSeries build_sector_interaction(const MsModel& model, double m) {
    if (!model.shared_phi_plus()) {
        throw MsConfigurationError("build_sector_interaction: tones must share phi_plus");
    }
    return build_series(model, model.n_max + 1, [m](const DriveTone&, const Matrix& c) { return Matrix(m * c); });
}

HamiltonianFn reference_hamiltonian(const MsModel& model, bool include_carrier) {
    model.validate();
    struct State {
        std::vector<ToneReference> tones;
        std::vector<Matrix> spins;
        Matrix fock;
    };
    auto st = std::make_shared<State>();
    for (const auto& t : model.tones) {
        st->tones.emplace_back(model, t, include_carrier);
        st->spins.push_back(tone_spin(t));
    }
    st->fock = Matrix::Zero(model.n_max + 1, model.n_max + 1);
    return [st](double s, Matrix& out) {
        out.setZero();
        const Index fd = st->fock.rows();
        for (std::size_t i = 0; i < st->tones.size(); ++i) {
            st->fock.setZero();
            st->tones[i].add_into(s, 1.0, st->fock);
            const Matrix& j = st->spins[i];
            for (Index r = 0; r < j.rows(); ++r) {
                for (Index c = 0; c < j.cols(); ++c) {
                    if (j(r, c) != 0.0) out.block(r * fd, c * fd, fd, fd) += j(r, c) * st->fock;
                }
            }
        }
    };
}

HamiltonianFn sector_reference_hamiltonian(const MsModel& model, double m, bool include_carrier) {
    model.validate();
    if (!model.shared_phi_plus()) {
        throw MsConfigurationError("sector_reference_hamiltonian: tones must share phi_plus");
    }
    auto tones = std::make_shared<std::vector<ToneReference>>();
    for (const auto& t : model.tones) tones->emplace_back(model, t, include_carrier);
    return [tones, m](double s, Matrix& out) {
        out.setZero();
        for (auto& t : *tones) t.add_into(s, m, out);
    };
}

FirstOrderSolution analytic_first_order(const MsModel& model, double tau) {
    require_single_flat_tone(model, "analytic_first_order");
    const DriveTone& t = model.tones[0];
    const double rabi_p = std::exp(-0.5 * model.eta * model.eta) * t.rabi;
    const double eps = t.beat() / model.eta;  // Lambda_epsilon
    const Complex g_int = std::polar(1.0, t.phi_minus) * (std::polar(1.0, eps * tau) - 1.0) / Complex(0.0, eps);
    FirstOrderSolution sol;
    sol.alpha_ms = kI * rabi_p * g_int;
    sol.theta = rabi_p * rabi_p * (tau / eps - std::sin(eps * tau) / (eps * eps));

    const HilbertSpec spec = model.spec();
    const Matrix jq = tone_spin(t);
    const Matrix a = fock_a(model.n_max);
    const Matrix gen = kron(jq, sol.alpha_ms * a.adjoint() - std::conj(sol.alpha_ms) * a);
    const Matrix twist = expm_hermitian(jq * jq, -sol.theta);  // exp(i theta J^2)
    sol.u = matrix_exp(gen) * embed_qubit(spec, twist);
    return sol;
}

Matrix analytic_supplement(const MsModel& model, SupplementKind kind, int n, double s) {
    require_single_flat_tone(model, "analytic_supplement");
    const DriveTone& t = model.tones[0];
    const HilbertSpec spec = model.spec();
    const Matrix j = embed_qubit(spec, tone_spin(t));
    const Matrix j2 = j * j;
    const BosonOps b = build_boson_ops(spec);
    const Matrix& a = b.a;
    const Matrix& ad = b.a_dag;
    const Matrix id = Matrix::Identity(spec.dim(), spec.dim());
    const double L = std::exp(-0.5 * model.eta * model.eta) * t.rabi;
    const double d = t.beat();
    const double pm = t.phi_minus;
    const Complex g = std::polar(1.0, d * s + pm);
    const Complex gc = std::conj(g);
    auto e = [s](double f) { return std::polar(1.0, f * s); };
    auto herm = [](const Matrix& x) { return Matrix(x + x.adjoint()); };

    if (kind == SupplementKind::h_eff) {
        switch (n) {
            case 1: return -L * j * herm(ad * g);
            case 2: return L * L / (d - 2.0) * j2;
            case 3: return 0.5 * L * j * herm(ad * ad * a * g);
            case 4: {
                const Matrix nop = ad * a;
                const Complex c2 = (5.0 - 2.0 * d * d) * g * g / ((d * d - 1.0) * (d * d - 4.0));
                const Matrix inner = -2.0 / (d - 2.0) * nop + 4.0 / ((d - 3.0) * (d + 1.0)) * (nop + 0.5 * id) +
                                     herm(c2 * ad * ad);
                return L * L * j2 * inner;
            }
            default: throw std::out_of_range("analytic_supplement: H_eff order must be 1..4");
        }
    }
    switch (n) {
        case 1: return herm(Complex(0.0, -L / (d - 2.0)) * gc * e(2.0) * j * ad);
        case 2: {
            const Matrix x = -0.5 * L * (g * e(1.0) / (d + 1.0) + gc * e(3.0) / (d - 3.0)) * j * ad * ad;
            return -2.0 * L / (d - 1.0) * std::cos((d - 1.0) * s + pm) * j * ad * a + herm(x) +
                   L * L / ((d - 1.0) * (d - 2.0)) * std::sin(2.0 * ((d - 1.0) * s + pm)) * j2;
        }
        case 3: {
            const Complex c1 = kI * gc * e(2.0) / (2.0 * (d - 2.0));
            const Complex c3 = kI * (gc * e(4.0) / (6.0 * (d - 4.0)) - g * e(2.0) / (6.0 * (d + 2.0)));
            const Complex cj2 =
                0.5 * L *
                ((2.0 * d * d + d - 7.0) * g * g * e(-1.0) / ((d - 2.0) * (d * d - 1.0) * (2.0 * d - 1.0)) +
                 (2.0 * d * d - 5.0 * d + 1.0) * gc * gc * e(3.0) /
                     ((2.0 * d - 3.0) * (d - 3.0) * (d - 2.0) * (d - 1.0)) +
                 2.0 * (d - 7.0) * e(1.0) / ((d - 3.0) * (d * d - 1.0)));
            const Matrix y = L * (c1 * j * ad * ad * a + c3 * j * ad * ad * ad + cj2 * j2 * ad);
            return herm(y);
        }
        default: throw std::out_of_range("analytic_supplement: Phi order must be 1..3");
    }
}

Complex alpha_cr(const MsModel& model, double s) {
    const DriveTone& t = model.tones.at(0);
    const double rabi_p = std::exp(-0.5 * model.eta * model.eta) * t.rabi;
    const double d = t.beat();
    Complex sum = 0.0;
    for (const auto& [h, ch] : t.window.harmonics()) {
        const double f = 2.0 - d + h * t.window.omega;
        sum += ch * std::polar(1.0, f * s) / f;
    }
    return model.eta * rabi_p * std::polar(1.0, -t.phi_minus) * sum;
}

}  // namespace qat
