use std::collections::BTreeMap;
use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

/// Finite trigonometric sum
/// `constant + Σ cos_coeffs[k] cos(kθ) + Σ sin_coeffs[k] sin(kθ)`.
///
/// On the disc θ is the polar angle of the unit circle. On the strip the
/// argument is `2πx/P`, one spec per edge.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundarySpec {
    pub constant: f64,
    pub cos_coeffs: BTreeMap<u32, f64>,
    pub sin_coeffs: BTreeMap<u32, f64>,
}

impl BoundarySpec {
    pub fn constant(c: f64) -> Self {
        BoundarySpec {
            constant: c,
            ..Default::default()
        }
    }

    /// Disc data of the affine potential `βx + γy + δ`.
    pub fn affine(beta: f64, gamma: f64, delta: f64) -> Self {
        BoundarySpec::constant(delta).with_cos(1, beta).with_sin(1, gamma)
    }

    /// `α cos θ − cos 3θ`.
    pub fn vhat(alpha: f64) -> Self {
        BoundarySpec::default().with_cos(1, alpha).with_cos(3, -1.0)
    }

    /// `α cos θ − cos nθ`, the higher-multiplicity sampler.
    pub fn vhat_order(alpha: f64, n: u32) -> Self {
        BoundarySpec::default().with_cos(1, alpha).with_cos(n, -1.0)
    }

    /// `b + t cos(2πx/P)`.
    pub fn strip_cosine(b: f64, t: f64) -> Self {
        BoundarySpec::constant(b).with_cos(1, t)
    }

    pub fn with_cos(mut self, k: u32, c: f64) -> Self {
        if k == 0 {
            self.constant += c;
        } else if c != 0.0 {
            *self.cos_coeffs.entry(k).or_insert(0.0) += c;
        }
        self
    }

    pub fn with_sin(mut self, k: u32, c: f64) -> Self {
        if k != 0 && c != 0.0 {
            *self.sin_coeffs.entry(k).or_insert(0.0) += c;
        }
        self
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let mut s = self.constant;
        for (&k, &c) in &self.cos_coeffs {
            s += c * (k as f64 * theta).cos();
        }
        for (&k, &c) in &self.sin_coeffs {
            s += c * (k as f64 * theta).sin();
        }
        s
    }

    pub fn derivative(&self, theta: f64) -> f64 {
        let mut s = 0.0;
        for (&k, &c) in &self.cos_coeffs {
            let k = k as f64;
            s -= c * k * (k * theta).sin();
        }
        for (&k, &c) in &self.sin_coeffs {
            let k = k as f64;
            s += c * k * (k * theta).cos();
        }
        s
    }

    pub fn max_harmonic(&self) -> u32 {
        let a = self.cos_coeffs.keys().next_back().copied().unwrap_or(0);
        let b = self.sin_coeffs.keys().next_back().copied().unwrap_or(0);
        a.max(b)
    }

    pub fn is_finite(&self) -> bool {
        self.constant.is_finite()
            && self.cos_coeffs.values().all(|c| c.is_finite())
            && self.sin_coeffs.values().all(|c| c.is_finite())
    }

    /// Coefficient-wise sum `self + s·other`.
    pub fn add_scaled(&self, other: &BoundarySpec, s: f64) -> BoundarySpec {
        let mut out = self.clone();
        out.constant += s * other.constant;
        for (&k, &c) in &other.cos_coeffs {
            out = out.with_cos(k, s * c);
        }
        for (&k, &c) in &other.sin_coeffs {
            out = out.with_sin(k, s * c);
        }
        out
    }

    /// `θ ↦ φ(−θ)`.
    pub fn reflected(&self) -> BoundarySpec {
        let mut out = self.clone();
        for c in out.sin_coeffs.values_mut() {
            *c = -*c;
        }
        out
    }

    /// Fourier fit of samples `g(2πm/M)`, keeping harmonics with magnitude
    /// above `drop_below`.
    pub fn from_samples(samples: &[f64], drop_below: f64) -> BoundarySpec {
        let m = samples.len();
        let mut buf: Vec<Complex<f64>> = samples.iter().map(|&s| Complex::new(s, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(m).process(&mut buf);
        let mut spec = BoundarySpec::constant(buf[0].re / m as f64);
        for k in 1..(m + 1) / 2 {
            let c = 2.0 * buf[k].re / m as f64;
            let s = -2.0 * buf[k].im / m as f64;
            if c.abs() > drop_below {
                spec = spec.with_cos(k as u32, c);
            }
            if s.abs() > drop_below {
                spec = spec.with_sin(k as u32, s);
            }
        }
        spec
    }

    /// Data whose derivative is the given periodic function, fixing the
    /// value at θ=0 to `value_at_zero`. The mean of `derivative` must vanish.
    pub fn integrate_derivative(
        derivative: impl Fn(f64) -> f64,
        samples: usize,
        value_at_zero: f64,
        drop_below: f64,
    ) -> BoundarySpec {
        let g: Vec<f64> = (0..samples)
            .map(|m| derivative(2.0 * PI * m as f64 / samples as f64))
            .collect();
        let d = BoundarySpec::from_samples(&g, 0.0);
        // ∫ cos kθ = sin kθ / k, ∫ sin kθ = −cos kθ / k
        let mut out = BoundarySpec::default();
        for (&k, &c) in &d.cos_coeffs {
            let v = c / k as f64;
            if v.abs() > drop_below {
                out = out.with_sin(k, v);
            }
        }
        for (&k, &c) in &d.sin_coeffs {
            let v = -c / k as f64;
            if v.abs() > drop_below {
                out = out.with_cos(k, v);
            }
        }
        out.constant = value_at_zero - out.eval(0.0);
        out
    }

    /// Number of strict local maxima on the circle, by a sampled scan.
    pub fn local_maxima_count(&self, samples: usize) -> usize {
        let vals: Vec<f64> = (0..samples)
            .map(|m| self.eval(2.0 * PI * m as f64 / samples as f64))
            .collect();
        let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        let tol = 1e-12 * scale;
        // collapse plateaus so each run of equal samples is one entry
        let mut runs: Vec<f64> = Vec::with_capacity(vals.len());
        for &v in &vals {
            if runs.last().is_none_or(|&l: &f64| (v - l).abs() > tol) {
                runs.push(v);
            }
        }
        while runs.len() > 1 && (runs[0] - runs[runs.len() - 1]).abs() <= tol {
            runs.pop();
        }
        let n = runs.len();
        if n < 3 {
            return 0;
        }
        (0..n)
            .filter(|&i| runs[i] > runs[(i + n - 1) % n] && runs[i] > runs[(i + 1) % n])
            .count()
    }

    /// Stable text key for caches.
    pub fn key(&self) -> String {
        let mut s = format!("c{:e}", self.constant);
        for (k, c) in &self.cos_coeffs {
            s.push_str(&format!(";C{k}:{c:e}"));
        }
        for (k, c) in &self.sin_coeffs {
            s.push_str(&format!(";S{k}:{c:e}"));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vhat_values() {
        let b = BoundarySpec::vhat(1.5);
        assert!((b.eval(0.0) - 0.5).abs() < 1e-15);
        assert!((b.derivative(PI / 2.0) + 4.5).abs() < 1e-13);
        assert_eq!(b.max_harmonic(), 3);
    }

    #[test]
    fn fft_fit_recovers_coefficients() {
        let b = BoundarySpec::constant(0.25).with_cos(2, 1.5).with_sin(5, -0.75);
        let samples: Vec<f64> = (0..64).map(|m| b.eval(2.0 * PI * m as f64 / 64.0)).collect();
        let fit = BoundarySpec::from_samples(&samples, 1e-12);
        assert_eq!(fit.cos_coeffs.len(), 1);
        assert!((fit.cos_coeffs[&2] - 1.5).abs() < 1e-13);
        assert!((fit.sin_coeffs[&5] + 0.75).abs() < 1e-13);
        assert!((fit.constant - 0.25).abs() < 1e-14);
    }

    #[test]
    fn integrate_derivative_inverts_differentiation() {
        let b = BoundarySpec::constant(0.0).with_cos(1, 0.3).with_sin(4, 0.2);
        let c = BoundarySpec::integrate_derivative(|t| b.derivative(t), 128, b.eval(0.0), 1e-14);
        for m in 0..20 {
            let t = 0.31 * m as f64;
            assert!((c.eval(t) - b.eval(t)).abs() < 1e-13);
        }
    }

    #[test]
    fn maxima_of_vhat_family() {
        assert_eq!(BoundarySpec::vhat(0.0).local_maxima_count(4096), 3);
        assert_eq!(BoundarySpec::affine(1.0, 0.0, 0.0).local_maxima_count(4096), 1);
        assert_eq!(BoundarySpec::vhat_order(0.0, 2).local_maxima_count(4096), 2);
    }
}
