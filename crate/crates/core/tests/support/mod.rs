//! Numerical oracles shared by the integration tests: quadrature rules built
//! from scratch (Newton on the orthogonal-polynomial recurrences, plus a
//! tanh-sinh rule for endpoint singularities) so expected values come from a
//! route independent of the library code.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Gauss-Hermite nodes and weights for ∫ f(x) e^{-x²} dx, highest node first.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    let mut z = 0.0f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * nodes[0],
            3 => 1.91 * z - 0.91 * nodes[1],
            _ => 2.0 * z - nodes[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..200 {
            // Orthonormal Hermite recurrence keeps values in range.
            let mut p1 = PI.powf(-0.25);
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = z;
        nodes[n - 1 - i] = -z;
        weights[i] = 2.0 / (pp * pp);
        weights[n - 1 - i] = weights[i];
    }
    (nodes, weights)
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..200 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf + 1.0) * z * p2 - jf * p3) / (jf + 1.0);
            }
            pp = nf * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        weights[n - 1 - i] = weights[i];
    }
    (nodes, weights)
}

/// ∫_a^b f via Gauss-Legendre with `n` nodes.
pub fn gl_integral(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let (xs, ws) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in xs.iter().zip(&ws) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// ∫_0^1 f(x) dx by tanh-sinh quadrature. The integrand receives both x and
/// 1-x computed without cancellation, so endpoint singularities like
/// x^(k-1) (1-x)^(k-1) are handled to near machine precision.
pub fn ts_integral_01(f: impl Fn(f64, f64) -> f64) -> f64 {
    let h = 1.0 / 64.0;
    let mut acc = 0.0;
    let mut j = -((6.0 / h) as i64);
    while j <= (6.0 / h) as i64 {
        let t = j as f64 * h;
        let y = 0.5 * PI * t.sinh();
        let x = 1.0 / (1.0 + (-2.0 * y).exp());
        let omx = 1.0 / (1.0 + (2.0 * y).exp());
        let w = 0.25 * PI * h * t.cosh() / (y.cosh() * y.cosh());
        if w > 0.0 && w.is_finite() {
            let v = f(x, omx);
            if v.is_finite() {
                acc += w * v;
            }
        }
        j += 1;
    }
    acc
}

/// E[f(X, Y)] for standard bivariate normals with correlation r, via the
/// substitution Y = rX + sqrt(1-r²) Z on a tensor Gauss-Hermite grid.
pub fn bivariate_normal_expectation(r: f64, n: usize, f: impl Fn(f64, f64) -> f64) -> f64 {
    let (xs, ws) = gauss_hermite(n);
    let s = (1.0 - r * r).max(0.0).sqrt();
    let root2 = 2.0f64.sqrt();
    let mut acc = 0.0;
    for (xi, wi) in xs.iter().zip(&ws) {
        let x = root2 * xi;
        let mut inner = 0.0;
        for (zj, wj) in xs.iter().zip(&ws) {
            inner += wj * f(x, r * x + s * root2 * zj);
        }
        acc += wi * inner;
    }
    acc / PI
}

/// Density of the centered marginal on [-1, 1]: (1-t²)^(k-1) / (2^(2k-1) B(k,k)).
pub fn nu_density(t: f64, k: f64) -> f64 {
    if t.abs() >= 1.0 {
        return 0.0;
    }
    let ln_beta =
        statrs::function::gamma::ln_gamma(k) * 2.0 - statrs::function::gamma::ln_gamma(2.0 * k);
    ((k - 1.0) * (1.0 - t * t).ln() - (2.0 * k - 1.0) * 2.0f64.ln() - ln_beta).exp()
}

/// Integrates g(x, y) over the ellipse x² - 2 x y cos c + y² < sin²c through
/// the angle substitution x = sin ψ, y = x cos c + |sin c| cos ψ sin φ, whose
/// Jacobian is |sin c| cos²ψ cos φ on (ψ, φ) ∈ (-π/2, π/2)².
pub fn ellipse_integral(cos_c: f64, n: usize, g: impl Fn(f64, f64) -> f64) -> f64 {
    let sin_c = (1.0 - cos_c * cos_c).sqrt();
    let (ts, ws) = gauss_legendre(n);
    let half = 0.5 * PI;
    let mut acc = 0.0;
    for (tp, wp) in ts.iter().zip(&ws) {
        let psi = half * tp;
        let (sp, cp) = psi.sin_cos();
        let mut inner = 0.0;
        for (tf, wf) in ts.iter().zip(&ws) {
            let phi = half * tf;
            let (sf, cf) = phi.sin_cos();
            let x = sp;
            let y = x * cos_c + sin_c * cp * sf;
            inner += wf * g(x, y) * cf;
        }
        acc += wp * inner * sin_c * cp * cp;
    }
    acc * half * half
}

#[cfg(test)]
mod self_checks {
    use super::*;

    #[test]
    fn hermite_rule_moments() {
        let (xs, ws) = gauss_hermite(40);
        let total: f64 = ws.iter().sum();
        assert!((total - PI.sqrt()).abs() < 1e-13);
        let m2: f64 = xs.iter().zip(&ws).map(|(x, w)| w * x * x).sum();
        assert!((m2 - PI.sqrt() / 2.0).abs() < 1e-13);
        let m4: f64 = xs.iter().zip(&ws).map(|(x, w)| w * x * x * x * x).sum();
        assert!((m4 - 0.75 * PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn legendre_rule_moments() {
        let v = gl_integral(0.0, 1.0, 32, |x| x * x);
        assert!((v - 1.0 / 3.0).abs() < 1e-14);
        let w = gl_integral(0.0, PI, 48, |x| x.sin());
        assert!((w - 2.0).abs() < 1e-13);
    }

    #[test]
    fn tanh_sinh_handles_endpoint_singularities() {
        let v = ts_integral_01(|x, _| 1.0 / x.sqrt());
        assert!((v - 2.0).abs() < 1e-12, "{v}");
        // B(1/2, 1/2) = π with inverse-sqrt blowups at both ends.
        let b = ts_integral_01(|x, omx| 1.0 / (x.sqrt() * omx.sqrt()));
        assert!((b - PI).abs() < 1e-11, "{b}");
    }

    #[test]
    fn bivariate_rule_matches_known_moments() {
        let r = 0.37;
        let exy = bivariate_normal_expectation(r, 48, |x, y| x * y);
        assert!((exy - r).abs() < 1e-13);
        let ex2y2 = bivariate_normal_expectation(r, 48, |x, y| x * x * y * y);
        assert!((ex2y2 - (1.0 + 2.0 * r * r)).abs() < 1e-12);
    }

    #[test]
    fn nu_density_normalizes() {
        for k in [0.5, 1.0, 2.0, 3.5] {
            // 1 - t² = 4 x (1-x) avoids cancellation at the endpoints.
            let ln_beta = statrs::function::gamma::ln_gamma(k) * 2.0
                - statrs::function::gamma::ln_gamma(2.0 * k);
            let total = ts_integral_01(|x, omx| {
                2.0 * ((k - 1.0) * (4.0 * x * omx).ln() - (2.0 * k - 1.0) * 2.0f64.ln() - ln_beta)
                    .exp()
            });
            assert!((total - 1.0).abs() < 1e-12, "k={k}: {total}");
        }
        // Interior agreement between the two forms.
        for t in [-0.9, -0.3, 0.0, 0.55] {
            let k = 2.5;
            let x = (t + 1.0) / 2.0;
            let direct = nu_density(t, k);
            let viabeta = ((k - 1.0) * (4.0 * x * (1.0 - x)).ln()
                - (2.0 * k - 1.0) * 2.0f64.ln()
                - statrs::function::gamma::ln_gamma(k) * 2.0
                + statrs::function::gamma::ln_gamma(2.0 * k))
            .exp();
            assert!((direct - viabeta).abs() < 1e-14 * viabeta.max(1.0));
        }
    }
}
