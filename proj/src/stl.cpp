#include "jamdet/stl.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "jamdet/error.hpp"

namespace jamdet {

namespace {

// The routines below keep the 1-based position arithmetic of the reference
// Fortran STL so that window and bandwidth choices match it exactly. Arrays
// are 0-based; position j lives at index j - 1.

// Local fit at position xs using points nleft..nright (1-based, inclusive).
bool estimate(const double* y, std::size_t n, std::size_t len, int degree, double xs, double& ys, std::size_t nleft,
              std::size_t nright, double* w, const double* rw) {
    const double range = static_cast<double>(n) - 1.0;
    double h = std::max(xs - static_cast<double>(nleft), static_cast<double>(nright) - xs);
    if (len > n) h += static_cast<double>((len - n) / 2);
    const double h9 = 0.999 * h;
    const double h1 = 0.001 * h;

    double a = 0.0;
    for (std::size_t j = nleft; j <= nright; ++j) {
        double wj = 0.0;
        const double r = std::abs(static_cast<double>(j) - xs);
        if (r <= h9) {
            if (r <= h1) {
                wj = 1.0;
            } else {
                const double q = r / h;
                const double t = 1.0 - q * q * q;
                wj = t * t * t;
            }
            if (rw != nullptr) wj *= rw[j - 1];
            a += wj;
        }
        w[j - 1] = wj;
    }
    if (a <= 0.0) return false;

    for (std::size_t j = nleft; j <= nright; ++j) w[j - 1] /= a;
    if (h > 0.0 && degree > 0) {
        double mean = 0.0;
        for (std::size_t j = nleft; j <= nright; ++j) mean += w[j - 1] * static_cast<double>(j);
        double b = xs - mean;
        double c = 0.0;
        for (std::size_t j = nleft; j <= nright; ++j) {
            const double d = static_cast<double>(j) - mean;
            c += w[j - 1] * d * d;
        }
        if (std::sqrt(c) > 0.001 * range) {
            b /= c;
            for (std::size_t j = nleft; j <= nright; ++j) w[j - 1] *= b * (static_cast<double>(j) - mean) + 1.0;
        }
    }
    double value = 0.0;
    for (std::size_t j = nleft; j <= nright; ++j) value += w[j - 1] * y[j - 1];
    ys = value;
    return true;
}

// Loess smoothing of y[0..n) into ys, evaluating every `jump` points.
void smooth(const double* y, std::size_t n, std::size_t len, int degree, std::size_t jump, const double* rw, double* ys,
            double* work) {
    if (n < 2) {
        ys[0] = y[0];
        return;
    }
    const std::size_t step = std::min(jump, n - 1);
    std::size_t nleft = 1;
    std::size_t nright = n;
    auto fit = [&](std::size_t i) {
        if (!estimate(y, n, len, degree, static_cast<double>(i), ys[i - 1], nleft, nright, work, rw)) ys[i - 1] = y[i - 1];
    };

    if (len >= n) {
        nleft = 1;
        nright = n;
        for (std::size_t i = 1; i <= n; i += step) fit(i);
    } else if (step == 1) {
        const std::size_t half = (len + 1) / 2;
        nleft = 1;
        nright = len;
        for (std::size_t i = 1; i <= n; ++i) {
            if (i > half && nright != n) {
                ++nleft;
                ++nright;
            }
            fit(i);
        }
    } else {
        const std::size_t half = (len + 1) / 2;
        for (std::size_t i = 1; i <= n; i += step) {
            if (i < half) {
                nleft = 1;
                nright = len;
            } else if (i >= n - half + 1) {
                nleft = n - len + 1;
                nright = n;
            } else {
                nleft = i - half + 1;
                nright = len + i - half;
            }
            fit(i);
        }
    }

    if (step != 1) {
        for (std::size_t i = 1; i + step <= n; i += step) {
            const double delta = (ys[i + step - 1] - ys[i - 1]) / static_cast<double>(step);
            for (std::size_t j = i + 1; j < i + step; ++j) ys[j - 1] = ys[i - 1] + delta * static_cast<double>(j - i);
        }
        const std::size_t k = ((n - 1) / step) * step + 1;
        if (k != n) {
            fit(n);
            if (k != n - 1) {
                const double delta = (ys[n - 1] - ys[k - 1]) / static_cast<double>(n - k);
                for (std::size_t j = k + 1; j < n; ++j) ys[j - 1] = ys[k - 1] + delta * static_cast<double>(j - k);
            }
        }
    }
}

// Moving average of length len; output has n - len + 1 points.
void moving_average(const double* x, std::size_t n, std::size_t len, double* out) {
    const std::size_t count = n - len + 1;
    const double flen = static_cast<double>(len);
    double v = 0.0;
    for (std::size_t i = 0; i < len; ++i) v += x[i];
    out[0] = v / flen;
    for (std::size_t j = 1; j < count; ++j) {
        v = v - x[j - 1] + x[len + j - 1];
        out[j] = v / flen;
    }
}

struct Workspace {
    std::vector<double> w1, w2, w3, w4, w5;
    std::vector<double> sub, sub_rw, sub_fit, sub_work;

    Workspace(std::size_t n, std::size_t period) {
        const std::size_t m = n + 2 * period;
        w1.assign(m, 0.0);
        w2.assign(m, 0.0);
        w3.assign(m, 0.0);
        w4.assign(m, 0.0);
        w5.assign(m, 0.0);
        const std::size_t k = n / period + 3;
        sub.assign(k, 0.0);
        sub_rw.assign(k, 0.0);
        sub_fit.assign(k, 0.0);
        sub_work.assign(k, 0.0);
    }
};

// Smooths each cycle-subseries of y and extrapolates one point on either end;
// season receives n + 2 * period values.
void seasonal_smooth(const double* y, std::size_t n, const StlParams& p, const double* rw, double* season,
                     Workspace& ws) {
    const std::size_t np = p.period;
    const std::size_t ns = p.seasonal_span;
    for (std::size_t j = 1; j <= np; ++j) {
        const std::size_t k = (n - j) / np + 1;
        for (std::size_t i = 1; i <= k; ++i) {
            ws.sub[i - 1] = y[(i - 1) * np + j - 1];
            if (rw != nullptr) ws.sub_rw[i - 1] = rw[(i - 1) * np + j - 1];
        }
        const double* sub_rw = rw != nullptr ? ws.sub_rw.data() : nullptr;
        double* fit = ws.sub_fit.data();
        smooth(ws.sub.data(), k, ns, p.seasonal_degree, p.seasonal_jump, sub_rw, fit + 1, ws.sub_work.data());

        const std::size_t nright = std::min(ns, k);
        if (!estimate(ws.sub.data(), k, ns, p.seasonal_degree, 0.0, fit[0], 1, nright, ws.sub_work.data(), sub_rw))
            fit[0] = fit[1];
        const std::size_t nleft = (k >= ns) ? k - ns + 1 : 1;
        if (!estimate(ws.sub.data(), k, ns, p.seasonal_degree, static_cast<double>(k + 1), fit[k + 1], nleft, k,
                      ws.sub_work.data(), sub_rw))
            fit[k + 1] = fit[k];
        for (std::size_t m = 1; m <= k + 2; ++m) season[(m - 1) * np + j - 1] = fit[m - 1];
    }
}

void inner_loop(std::span<const double> y, const StlParams& p, const double* rw, std::vector<double>& season,
                std::vector<double>& trend, Workspace& ws) {
    const std::size_t n = y.size();
    const std::size_t np = p.period;
    for (int it = 0; it < p.inner_iterations; ++it) {
        for (std::size_t i = 0; i < n; ++i) ws.w1[i] = y[i] - trend[i];
        seasonal_smooth(ws.w1.data(), n, p, rw, ws.w2.data(), ws);

        // low-pass of the provisional seasonal: MA(np), MA(np), MA(3), Loess
        const std::size_t m = n + 2 * np;
        moving_average(ws.w2.data(), m, np, ws.w3.data());
        moving_average(ws.w3.data(), m - np + 1, np, ws.w1.data());
        moving_average(ws.w1.data(), m - 2 * np + 2, 3, ws.w3.data());
        smooth(ws.w3.data(), n, p.lowpass_span, p.lowpass_degree, p.lowpass_jump, nullptr, ws.w1.data(),
               ws.w5.data());

        for (std::size_t i = 0; i < n; ++i) season[i] = ws.w2[np + i] - ws.w1[i];
        for (std::size_t i = 0; i < n; ++i) ws.w1[i] = y[i] - season[i];
        smooth(ws.w1.data(), n, p.trend_span, p.trend_degree, p.trend_jump, rw, trend.data(), ws.w3.data());
    }
}

void robustness_weights(std::span<const double> y, const std::vector<double>& fit, std::vector<double>& rw) {
    const std::size_t n = y.size();
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = std::abs(y[i] - fit[i]);
    std::vector<double> sorted = r;
    const std::size_t mid1 = n / 2 + 1;
    const std::size_t mid2 = n - mid1 + 1;
    std::nth_element(sorted.begin(), sorted.begin() + (mid1 - 1), sorted.end());
    const double a = sorted[mid1 - 1];
    std::nth_element(sorted.begin(), sorted.begin() + (mid2 - 1), sorted.end());
    const double b = sorted[mid2 - 1];
    const double cmad = 3.0 * (a + b);  // six times the median absolute residual
    const double c9 = 0.999 * cmad;
    const double c1 = 0.001 * cmad;
    rw.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (r[i] <= c1) {
            rw[i] = 1.0;
        } else if (r[i] <= c9) {
            const double u = r[i] / cmad;
            rw[i] = (1.0 - u * u) * (1.0 - u * u);
        } else {
            rw[i] = 0.0;
        }
    }
}

std::size_t odd_at_least(double x) {
    auto v = static_cast<std::size_t>(std::ceil(x));
    if (v % 2 == 0) ++v;
    return std::max<std::size_t>(v, 3);
}

void check_finite(std::span<const double> series, const char* who) {
    for (double v : series)
        if (!std::isfinite(v)) throw DomainError(std::string(who) + ": non-finite input");
}

}  // namespace

bool loess_fit_at(std::span<const double> series, std::size_t span, int degree, double position, std::size_t left,
                  std::size_t right, std::span<const double> robustness_weights, double& value) {
    if (right < left || right >= series.size()) throw ConfigError("loess_fit_at: window out of range");
    std::vector<double> work(series.size());
    const double* rw = robustness_weights.empty() ? nullptr : robustness_weights.data();
    return estimate(series.data(), series.size(), span, degree, position + 1.0, value, left + 1, right + 1, work.data(),
                    rw);
}

std::vector<double> loess_smooth(std::span<const double> series, const LoessParams& params) {
    if (params.degree != 0 && params.degree != 1) throw ConfigError("loess: degree must be 0 or 1");
    if (params.span < static_cast<std::size_t>(params.degree) + 1) throw ConfigError("loess: span must be >= degree + 1");
    if (params.span % 2 == 0) throw ConfigError("loess: span must be odd");
    if (params.jump < 1) throw ConfigError("loess: jump must be >= 1");
    if (!params.robustness_weights.empty()) {
        if (params.robustness_weights.size() != series.size())
            throw ConfigError("loess: robustness_weights length must match the series");
        for (double w : params.robustness_weights)
            if (!(w >= 0.0 && w <= 1.0)) throw ConfigError("loess: robustness weights must lie in [0, 1]");
    }
    check_finite(series, "loess");
    if (series.empty()) return {};

    std::vector<double> out(series.size());
    std::vector<double> work(series.size());
    const double* rw = params.robustness_weights.empty() ? nullptr : params.robustness_weights.data();
    smooth(series.data(), series.size(), params.span, params.degree, params.jump, rw, out.data(), work.data());
    return out;
}

StlParams StlParams::resolved(std::size_t n) const {
    StlParams p = *this;
    if (p.seasonal_span == 0) p.seasonal_span = 10 * n + 1;
    if (p.trend_span == 0) p.trend_span = odd_at_least(1.5 * static_cast<double>(period));
    if (p.lowpass_span == 0) p.lowpass_span = odd_at_least(static_cast<double>(period));
    return p;
}

void validate(const StlParams& params, std::size_t series_length) {
    if (params.period < 2) throw ConfigError("stl: period must be >= 2");
    if (series_length < 2 * params.period) throw ConfigError("stl: series must cover at least two periods");
    const StlParams p = params.resolved(series_length);
    auto span_ok = [](std::size_t s, const char* name) {
        if (s < 3 || s % 2 == 0) throw ConfigError(std::string("stl: ") + name + " must be odd and >= 3");
    };
    span_ok(p.seasonal_span, "seasonal_span");
    span_ok(p.trend_span, "trend_span");
    span_ok(p.lowpass_span, "lowpass_span");
    for (int d : {p.seasonal_degree, p.trend_degree, p.lowpass_degree})
        if (d != 0 && d != 1) throw ConfigError("stl: degrees must be 0 or 1");
    if (p.seasonal_jump < 1 || p.trend_jump < 1 || p.lowpass_jump < 1) throw ConfigError("stl: jumps must be >= 1");
    if (p.inner_iterations < 1) throw ConfigError("stl: inner_iterations must be >= 1");
    if (p.outer_iterations < 0) throw ConfigError("stl: outer_iterations must be >= 0");
}

StlDecomposition stl_decompose(std::span<const double> series, const StlParams& params) {
    validate(params, series.size());
    check_finite(series, "stl");
    const StlParams p = params.resolved(series.size());
    const std::size_t n = series.size();

    StlDecomposition out;
    out.trend.assign(n, 0.0);
    out.seasonal.assign(n, 0.0);
    Workspace ws(n, p.period);

    std::vector<double> rw;
    std::vector<double> fit(n);
    for (int k = 0;; ++k) {
        inner_loop(series, p, rw.empty() ? nullptr : rw.data(), out.seasonal, out.trend, ws);
        if (k + 1 > p.outer_iterations) break;
        for (std::size_t i = 0; i < n; ++i) fit[i] = out.trend[i] + out.seasonal[i];
        robustness_weights(series, fit, rw);
    }
    if (p.outer_iterations <= 0) rw.assign(n, 1.0);
    out.robustness_weights = std::move(rw);

    out.residual.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.residual[i] = series[i] - out.trend[i] - out.seasonal[i];
    return out;
}

std::vector<double> reconstruct(const StlDecomposition& d) {
    std::vector<double> out(d.trend.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = d.trend[i] + d.seasonal[i];
    return out;
}

double reconstruction_rmse(std::span<const double> original, std::span<const double> reconstructed) {
    if (original.size() != reconstructed.size()) throw DomainError("reconstruction_rmse: length mismatch");
    if (original.empty()) throw DomainError("reconstruction_rmse: empty input");
    double sum = 0.0;
    for (std::size_t i = 0; i < original.size(); ++i) {
        const double e = original[i] - reconstructed[i];
        sum += e * e;
    }
    return std::sqrt(sum / static_cast<double>(original.size()));
}

}  // namespace jamdet
