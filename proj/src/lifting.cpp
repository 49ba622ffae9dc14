#include "otrack/lifting.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>

namespace otrack {

namespace {

using cplx = std::complex<double>;

// Real 2D FFT pair on a P x Q buffer (x fastest).
class Fft2 {
public:
    Fft2(int P, int Q) : P_(P), Q_(Q), real_(std::size_t(P) * Q), spec_(std::size_t(P / 2 + 1) * Q) {
        auto* s = reinterpret_cast<fftw_complex*>(spec_.data());
        fwd_ = fftw_plan_dft_r2c_2d(Q, P, real_.data(), s, FFTW_ESTIMATE);
        inv_ = fftw_plan_dft_c2r_2d(Q, P, s, real_.data(), FFTW_ESTIMATE);
    }
    ~Fft2() {
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(inv_);
    }
    Fft2(const Fft2&) = delete;
    Fft2& operator=(const Fft2&) = delete;

    std::vector<double>& real() { return real_; }
    std::vector<cplx>& spec() { return spec_; }
    void forward() { fftw_execute(fwd_); }
    // Unnormalized inverse; spec() is destroyed.
    void inverse() { fftw_execute(inv_); }
    int width() const { return P_; }
    int height() const { return Q_; }

private:
    int P_, Q_;
    std::vector<double> real_;
    std::vector<cplx> spec_;
    fftw_plan fwd_, inv_;
};

int reflect(int i, int n) {
    while (i < 0 || i >= n) i = i < 0 ? -i - 1 : 2 * n - i - 1;
    return i;
}


// Spectra of the bank kernels on a P x Q periodic grid, kernel center at the origin.
std::vector<std::vector<cplx>> kernel_spectra(const WaveletBank& b, Fft2& fft) {
    const int P = fft.width(), Q = fft.height(), c = b.K / 2;
    std::vector<std::vector<cplx>> out;
    for (int k = 0; k < b.ntheta; ++k) {
        std::fill(fft.real().begin(), fft.real().end(), 0.0);
        for (int j = 0; j < b.K; ++j)
            for (int i = 0; i < b.K; ++i) {
                const int x = ((i - c) % P + P) % P, y = ((j - c) % Q + Q) % Q;
                fft.real()[std::size_t(y) * P + x] = b.at(k, i, j);
            }
        fft.forward();
        out.push_back(fft.spec());
    }
    return out;
}

// Even extension to a 2n x 2n periodic buffer; the circular correlation then matches reflective
// boundary handling without a wrap-around seam.
void load_padded(Fft2& fft, int nx, int ny, const double* src) {
    const int P = fft.width(), Q = fft.height();
    for (int y = 0; y < Q; ++y)
        for (int x = 0; x < P; ++x) fft.real()[std::size_t(y) * P + x] = src[std::size_t(reflect(y, ny)) * nx + reflect(x, nx)];
}

// Mirroring the plane maps orientation k to a mirrored channel, so the padded score of slice k
// reads the mirrored slice across each reflected border.
void load_padded_score(Fft2& fft, const LiftedField& U, int k) {
    const int P = fft.width(), Q = fft.height(), nx = U.grid.nx, ny = U.grid.ny, n = U.grid.ntheta;
    for (int y = 0; y < Q; ++y)
        for (int x = 0; x < P; ++x) {
            int kk = k;
            if (x >= nx) kk = ((n / 2 - kk) % n + n) % n;
            if (y >= ny) kk = (n - kk) % n;
            fft.real()[std::size_t(y) * P + x] = U(reflect(x, nx), reflect(y, ny), kk);
        }
}

std::vector<double> normalization(const std::vector<std::vector<cplx>>& spectra) {
    std::vector<double> N(spectra.front().size(), 0.0);
    for (const auto& s : spectra)
        for (std::size_t n = 0; n < N.size(); ++n) N[n] += std::norm(s[n]);
    return N;
}

}  // namespace

double bspline(int order, double x) {
    if (order == 0) {
        const double a = std::abs(x);
        return a < 0.5 ? 1.0 : a == 0.5 ? 0.5 : 0.0;
    }
    const int n = order;
    double sum = 0, binom = 1, fact = 1;
    for (int i = 2; i <= n; ++i) fact *= i;
    for (int j = 0; j <= n + 1; ++j) {
        const double t = x + 0.5 * (n + 1) - j;
        if (t > 0) sum += (j % 2 ? -1.0 : 1.0) * binom * std::pow(t, n);
        binom = binom * (n + 1 - j) / (j + 1);
    }
    return std::max(0.0, sum / fact);
}

double cake_angular_window(int k, int ntheta, int order, double phi) {
    const double h = kTwoPi / ntheta;
    double d = phi - (k * h + 0.5 * kPi);
    d -= kTwoPi * std::floor((d + kPi) / kTwoPi);
    return bspline(order, d / h);
}

double cake_radial_window(double rho, const CakeParams& p) {
    const double r0 = p.rho_flat * p.rho_max;
    if (rho >= p.rho_max) return 0.0;
    if (rho <= r0) return 1.0;
    return 0.5 * (1.0 + std::cos(kPi * (rho - r0) / (p.rho_max - r0)));
}

WaveletBank build_cake_bank(int ntheta, int K, const CakeParams& p) {
    require(ntheta >= 4 && ntheta % 2 == 0, ErrorKind::Config, "cake bank needs an even ntheta >= 4");
    require(ntheta >= p.spline_order + 1, ErrorKind::Config, "ntheta too small for the angular B-spline order");
    require(K >= 3 && K % 2 == 1, ErrorKind::Config, "kernel size K must be odd and >= 3");
    require(p.rho_max > 0 && p.rho_max <= 0.5 && p.rho_flat >= 0 && p.rho_flat < 1, ErrorKind::Config,
            "radial window parameters out of range");
    WaveletBank b;
    b.ntheta = ntheta;
    b.K = K;
    b.params = p;
    const int L = std::max(64, 4 * K + (4 * K) % 2);
    const int c = K / 2;
    std::vector<cplx> buf(std::size_t(L) * L);
    auto* data = reinterpret_cast<fftw_complex*>(buf.data());
    fftw_plan plan = fftw_plan_dft_2d(L, L, data, data, FFTW_BACKWARD, FFTW_ESTIMATE);
    for (int k = 0; k < ntheta; ++k) {
        for (int iv = 0; iv < L; ++iv)
            for (int iu = 0; iu < L; ++iu) {
                const double u = double(iu < L / 2 ? iu : iu - L) / L;
                const double v = double(iv < L / 2 ? iv : iv - L) / L;
                const double rho = std::hypot(u, v);
                double val = 0;
                if (rho > 0 || !p.remove_dc) {
                    const double phi = std::atan2(v, u);
                    val = 0.5 *
                          (cake_angular_window(k, ntheta, p.spline_order, phi) +
                           cake_angular_window((k + ntheta / 2) % ntheta, ntheta, p.spline_order, phi)) *
                          cake_radial_window(rho, p);
                }
                buf[std::size_t(iv) * L + iu] = val;
            }
        fftw_execute(plan);
        std::vector<double> ker(std::size_t(K) * K);
        double mean = 0;
        for (int j = 0; j < K; ++j)
            for (int i = 0; i < K; ++i) {
                const int x = (i - c + L) % L, y = (j - c + L) % L;
                ker[std::size_t(j) * K + i] = buf[std::size_t(y) * L + x].real() / (double(L) * L);
                mean += ker[std::size_t(j) * K + i];
            }
        if (p.remove_dc) {
            mean /= double(K) * K;
            for (double& v : ker) v -= mean;
        }
        b.kernels.push_back(std::move(ker));
    }
    fftw_destroy_plan(plan);
    return b;
}

LiftedField orientation_score(const Image2D& f, const WaveletBank& bank) {
    require(bank.ntheta > 0 && int(bank.kernels.size()) == bank.ntheta, ErrorKind::Config, "empty wavelet bank");
    require(bank.K <= f.nx && bank.K <= f.ny, ErrorKind::Config, "wavelet kernel larger than the image");
    Fft2 fft(2 * f.nx, 2 * f.ny);
    const auto spectra = kernel_spectra(bank, fft);
    load_padded(fft, f.nx, f.ny, f.values.data());
    fft.forward();
    const std::vector<cplx> F = fft.spec();
    const double norm = 1.0 / (double(fft.width()) * fft.height());
    LiftedField U(GridM2(f.nx, f.ny, bank.ntheta));
    for (int k = 0; k < bank.ntheta; ++k) {
        for (std::size_t n = 0; n < F.size(); ++n) fft.spec()[n] = F[n] * std::conj(spectra[k][n]);
        fft.inverse();
        for (int j = 0; j < f.ny; ++j)
            for (int i = 0; i < f.nx; ++i)
                U(i, j, k) = fft.real()[std::size_t(j) * fft.width() + i] * norm;
    }
    return U;
}

Image2D reconstruct_approx(const LiftedField& U, const WaveletBank& bank, double rel_floor) {
    require(U.grid.ntheta == bank.ntheta, ErrorKind::Config, "score and bank orientation counts differ");
    require(bank.K <= U.grid.nx && bank.K <= U.grid.ny, ErrorKind::Config, "wavelet kernel larger than the image");
    const int nx = U.grid.nx, ny = U.grid.ny;
    Fft2 fft(2 * nx, 2 * ny);
    const auto spectra = kernel_spectra(bank, fft);
    const std::vector<double> N = normalization(spectra);
    const double floor = rel_floor * *std::max_element(N.begin(), N.end());
    std::vector<cplx> acc(N.size(), 0.0);
    for (int k = 0; k < bank.ntheta; ++k) {
        load_padded_score(fft, U, k);
        fft.forward();
        for (std::size_t n = 0; n < N.size(); ++n) acc[n] += fft.spec()[n] * spectra[k][n];
    }
    for (std::size_t n = 0; n < N.size(); ++n) fft.spec()[n] = N[n] > floor ? acc[n] / N[n] : 0.0;
    fft.inverse();
    const double norm = 1.0 / (double(fft.width()) * fft.height());
    Image2D out(nx, ny);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) out(i, j) = fft.real()[std::size_t(j) * fft.width() + i] * norm;
    return out;
}

Image2D band_pass(const Image2D& f, const WaveletBank& bank, double rel_floor) {
    Fft2 fft(2 * f.nx, 2 * f.ny);
    const std::vector<double> N = normalization(kernel_spectra(bank, fft));
    const double floor = rel_floor * *std::max_element(N.begin(), N.end());
    load_padded(fft, f.nx, f.ny, f.values.data());
    fft.forward();
    for (std::size_t n = 0; n < N.size(); ++n)
        if (!(N[n] > floor)) fft.spec()[n] = 0.0;
    fft.inverse();
    const double norm = 1.0 / (double(fft.width()) * fft.height());
    Image2D out(f.nx, f.ny);
    for (int j = 0; j < f.ny; ++j)
        for (int i = 0; i < f.nx; ++i) out(i, j) = fft.real()[std::size_t(j) * fft.width() + i] * norm;
    return out;
}

double relative_l2(const Image2D& a, const Image2D& ref) {
    require(a.nx == ref.nx && a.ny == ref.ny, ErrorKind::Config, "image sizes differ");
    double num = 0, den = 0;
    for (std::size_t n = 0; n < a.values.size(); ++n) {
        num += (a.values[n] - ref.values[n]) * (a.values[n] - ref.values[n]);
        den += ref.values[n] * ref.values[n];
    }
    return den > 0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace otrack
