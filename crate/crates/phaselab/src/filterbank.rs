//! Filter families Ψ = (ψ_λ) on Z_N, stored by their frequency profiles.
//!
//! A bank satisfies the Calderón condition (C) when
//! `Σ_λ ν_λ |ψ̂_λ(ξ)|² = 1` at every frequency bin; this is exactly the
//! isometry property of the analysis transform. The spectral injectivity
//! condition (SI) is checked as a finite rank test on the matrix
//! `M[λ,ξ] = |ψ̂_λ(ξ)|²`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harmonic::{self, Field, Signal, Spectrum};

/// Indexed family of frequency-domain filter profiles with measure weights.
#[derive(Debug, Clone)]
pub struct FilterBank {
    n: usize,
    labels: Vec<String>,
    /// ψ̂_λ per label, each of length n.
    profiles: Vec<Vec<Complex64>>,
    /// Measure weight ν_λ > 0 per label.
    nu: Vec<f64>,
    field: Field,
    /// Exact frequency support per filter (bins with ψ̂_λ(ξ) ≠ 0), kept
    /// explicit so zero-overlap logic needs no floating-point thresholds.
    supports: Vec<Vec<usize>>,
}

/// Result of the Calderón condition check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalderonReport {
    pub max_deviation: f64,
    pub tol: f64,
    pub satisfied: bool,
}

/// Result of the spectral injectivity rank test.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SiReport {
    pub rank: usize,
    pub full_rank: bool,
    pub n: usize,
    pub filters: usize,
}

/// Outcome of the Fourier-magnitude consequence check: if the premise
/// |W_Ψf| = |W_Ψg| holds and the bank is spectrally injective, then
/// (i) |f̂| = |ĝ| and (ii) all per-filter moduli agree in time and frequency.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FourierMagnitudeReport {
    pub premise_holds: bool,
    pub conclusion_i: bool,
    pub conclusion_ii: bool,
}

/// Cyclic frequency magnitude |ξ|_cyc = min(ξ, n−ξ).
fn cyc(xi: usize, n: usize) -> usize {
    let x = xi % n;
    x.min(n - x)
}

fn is_power_of_two(n: usize) -> bool {
    n != 0 && n & (n - 1) == 0
}

impl FilterBank {
    /// Bank from explicit parts; validates every invariant.
    pub fn custom(
        labels: Vec<String>,
        profiles: Vec<Vec<Complex64>>,
        nu: Vec<f64>,
        field: Field,
    ) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptyBank);
        }
        if profiles.len() != labels.len() || nu.len() != labels.len() {
            return Err(Error::DimensionMismatch { expected: labels.len(), got: profiles.len().max(nu.len()) });
        }
        let n = profiles[0].len();
        if n == 0 {
            return Err(Error::UnsupportedOrder("group order must be positive".into()));
        }
        for p in &profiles {
            if p.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: p.len() });
            }
            for v in p {
                if !v.re.is_finite() || !v.im.is_finite() {
                    return Err(Error::InvalidValue("non-finite profile entry".into()));
                }
            }
        }
        for (i, w) in nu.iter().enumerate() {
            if !(*w > 0.0) || !w.is_finite() {
                return Err(Error::NonPositiveWeight(i));
            }
        }
        if field == Field::Real {
            let scale = profiles
                .iter()
                .flat_map(|p| p.iter())
                .map(|v| v.norm())
                .fold(0.0f64, f64::max)
                .max(1.0);
            for p in &profiles {
                for xi in 0..n {
                    let dev = (p[(n - xi) % n] - p[xi].conj()).norm();
                    if dev > 1e-12 * scale {
                        return Err(Error::InvalidValue(format!(
                            "real bank lacks Hermitian symmetry at bin {xi} (deviation {dev:.3e})"
                        )));
                    }
                }
            }
        }
        let supports = profiles
            .iter()
            .map(|p| (0..n).filter(|&xi| p[xi] != Complex64::ZERO).collect())
            .collect();
        Ok(Self { n, labels, profiles, nu, field, supports })
    }

    /// Dyadic Shannon bank: band j carries the indicator of
    /// `{ξ : 2^{j−1} ≤ |ξ|_cyc < 2^j}`. The DC and Nyquist bins go to a
    /// dedicated low-pass filter when `with_lowpass`; without it the bank
    /// fails (C) on exactly those two bins.
    pub fn shannon(n: usize, with_lowpass: bool) -> Result<Self> {
        if !is_power_of_two(n) || n < 4 {
            return Err(Error::UnsupportedOrder(format!(
                "shannon bank needs a power-of-two order ≥ 4, got {n}"
            )));
        }
        let bands = n.trailing_zeros() as usize - 1;
        let mut labels = Vec::new();
        let mut profiles = Vec::new();
        for j in 1..=bands {
            let lo = 1usize << (j - 1);
            let hi = 1usize << j;
            let profile: Vec<Complex64> = (0..n)
                .map(|xi| {
                    let c = cyc(xi, n);
                    if c >= lo && c < hi {
                        Complex64::ONE
                    } else {
                        Complex64::ZERO
                    }
                })
                .collect();
            labels.push(format!("band{j}"));
            profiles.push(profile);
        }
        if with_lowpass {
            let profile: Vec<Complex64> = (0..n)
                .map(|xi| if xi == 0 || xi == n / 2 { Complex64::ONE } else { Complex64::ZERO })
                .collect();
            labels.push("low".to_string());
            profiles.push(profile);
        }
        let nu = vec![1.0; labels.len()];
        Self::custom(labels, profiles, nu, Field::Real)
    }

    /// Overlapping Shannon bank: dyadic bands widened to
    /// `[2^{j−1}(1−eps), 2^j(1+eps))` on the |ξ|_cyc axis, rounded outward
    /// to whole bins, then normalized so (C) holds exactly:
    /// `ψ̂_j = φ̂_j / sqrt(Σ_k |φ̂_k|²)`. `paper_literal` divides by the sum
    /// itself instead of its square root, which breaks (C) wherever bins
    /// are covered more than once; it exists for side-by-side comparison.
    pub fn overlapping_shannon(
        n: usize,
        eps: f64,
        with_lowpass: bool,
        paper_literal: bool,
    ) -> Result<Self> {
        if !is_power_of_two(n) || n < 8 {
            return Err(Error::DegenerateOverlap(format!(
                "need a power-of-two order ≥ 8 so that at least two bands can overlap, got {n}"
            )));
        }
        if !(0.0..1.0).contains(&eps) {
            return Err(Error::InvalidValue(format!("overlap fraction must lie in [0,1), got {eps}")));
        }
        let bands = n.trailing_zeros() as usize - 1;
        let mut lohi = Vec::new();
        for j in 1..=bands {
            let lo = ((1u64 << (j - 1)) as f64 * (1.0 - eps)).floor() as usize;
            let hi = ((1u64 << j) as f64 * (1.0 + eps)).ceil() as usize;
            lohi.push((lo, hi.min(n / 2 + 1)));
        }
        if eps > 0.0 {
            for j in 0..bands - 1 {
                let (_, hi) = lohi[j];
                let (lo_next, _) = lohi[j + 1];
                if lo_next >= hi {
                    return Err(Error::DegenerateOverlap(format!(
                        "bands {} and {} share no bin at eps={eps}",
                        j + 1,
                        j + 2
                    )));
                }
            }
        }
        let mut labels: Vec<String> = (1..=bands).map(|j| format!("band{j}")).collect();
        let mut indicators: Vec<Vec<f64>> = lohi
            .iter()
            .map(|&(lo, hi)| {
                (0..n)
                    .map(|xi| {
                        let c = cyc(xi, n);
                        if c >= lo && c < hi {
                            1.0
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        if with_lowpass {
            labels.push("low".to_string());
            indicators.push((0..n).map(|xi| if xi == 0 || xi == n / 2 { 1.0 } else { 0.0 }).collect());
        }
        let mut denom = vec![0.0f64; n];
        for ind in &indicators {
            for (d, v) in denom.iter_mut().zip(ind) {
                *d += v * v;
            }
        }
        let profiles: Vec<Vec<Complex64>> = indicators
            .iter()
            .map(|ind| {
                (0..n)
                    .map(|xi| {
                        if denom[xi] == 0.0 || ind[xi] == 0.0 {
                            Complex64::ZERO
                        } else if paper_literal {
                            Complex64::new(ind[xi] / denom[xi], 0.0)
                        } else {
                            Complex64::new(ind[xi] / denom[xi].sqrt(), 0.0)
                        }
                    })
                    .collect()
            })
            .collect();
        let nu = vec![1.0; labels.len()];
        Self::custom(labels, profiles, nu, Field::Real)
    }

    /// Smooth overlapping bank of `count` raised-cosine magnitude bumps,
    /// normalized so (C) holds exactly; works at any order n ≥ 2. With the
    /// real field the bumps live on the |ξ|_cyc axis (profiles even, filters
    /// real); with the complex field they tile the full frequency circle.
    pub fn smooth(n: usize, count: usize, field: Field) -> Result<Self> {
        if n < 2 {
            return Err(Error::UnsupportedOrder(format!("need order ≥ 2, got {n}")));
        }
        if count < 2 {
            return Err(Error::InvalidValue("need at least two filters".into()));
        }
        let mut mags: Vec<Vec<f64>> = Vec::with_capacity(count);
        match field {
            Field::Real => {
                let half = n as f64 / 2.0;
                let spacing = half / (count - 1) as f64;
                let width = 1.25 * spacing;
                for j in 0..count {
                    let center = j as f64 * spacing;
                    mags.push(
                        (0..n)
                            .map(|xi| {
                                let t = cyc(xi, n) as f64;
                                raised_cosine((t - center).abs(), width)
                            })
                            .collect(),
                    );
                }
            }
            Field::Complex => {
                let spacing = n as f64 / count as f64;
                let width = 1.25 * spacing;
                for j in 0..count {
                    let center = j as f64 * spacing;
                    mags.push(
                        (0..n)
                            .map(|xi| raised_cosine(dist_to(xi, center, n), width))
                            .collect(),
                    );
                }
            }
        }
        let mut denom = vec![0.0f64; n];
        for m in &mags {
            for (d, v) in denom.iter_mut().zip(m) {
                *d += v * v;
            }
        }
        if denom.iter().any(|&d| d == 0.0) {
            return Err(Error::DegenerateOverlap("bump layout leaves a frequency bin uncovered".into()));
        }
        let profiles: Vec<Vec<Complex64>> = mags
            .iter()
            .map(|m| {
                (0..n)
                    .map(|xi| Complex64::new(m[xi] / denom[xi].sqrt(), 0.0))
                    .collect()
            })
            .collect();
        let labels = (0..count).map(|j| format!("bump{j}")).collect();
        let nu = vec![1.0; count];
        Self::custom(labels, profiles, nu, field)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn profile(&self, l: usize) -> &[Complex64] {
        &self.profiles[l]
    }

    pub fn support(&self, l: usize) -> &[usize] {
        &self.supports[l]
    }

    pub fn supports_disjoint(&self, a: usize, b: usize) -> bool {
        let (sa, sb) = (&self.supports[a], &self.supports[b]);
        let mut i = 0;
        let mut j = 0;
        while i < sa.len() && j < sb.len() {
            match sa[i].cmp(&sb[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return false,
            }
        }
        true
    }

    /// Time-domain filter ψ_λ = idft(ψ̂_λ).
    pub fn psi(&self, l: usize) -> Signal {
        harmonic::idft(&Spectrum::new(self.profiles[l].clone()).expect("validated profile"))
    }

    pub fn psi_norm_sq(&self, l: usize) -> f64 {
        self.profiles[l].iter().map(|v| v.norm_sqr()).sum::<f64>() / self.n as f64
    }

    /// Max over λ of ‖ψ_λ‖₂; scale reference for positivity thresholds.
    pub fn max_psi_norm(&self) -> f64 {
        (0..self.len()).map(|l| self.psi_norm_sq(l).sqrt()).fold(0.0, f64::max)
    }

    /// Max over all bins of |Σ_λ ν_λ|ψ̂_λ(ξ)|² − 1|.
    pub fn check_calderon(&self, tol: f64) -> CalderonReport {
        let mut max_deviation: f64 = 0.0;
        for xi in 0..self.n {
            let mut s = 0.0;
            for (p, w) in self.profiles.iter().zip(&self.nu) {
                s += w * p[xi].norm_sqr();
            }
            max_deviation = max_deviation.max((s - 1.0).abs());
        }
        CalderonReport { max_deviation, tol, satisfied: max_deviation <= tol }
    }

    /// Rank of the |Λ|×N matrix M[λ,ξ] = |ψ̂_λ(ξ)|², with a relative
    /// singular-value cutoff of 1e−10. Full column rank requires |Λ| ≥ N.
    pub fn spectral_injectivity(&self) -> SiReport {
        let rows = self.len();
        let mat = nalgebra::DMatrix::from_fn(rows, self.n, |l, xi| self.profiles[l][xi].norm_sqr());
        let svals = mat.singular_values();
        let smax = svals.iter().cloned().fold(0.0f64, f64::max);
        let rank = if smax == 0.0 {
            0
        } else {
            svals.iter().filter(|&&s| s > 1e-10 * smax).count()
        };
        SiReport { rank, full_rank: rank == self.n, n: self.n, filters: rows }
    }

    /// Checks the premise |W_Ψf| = |W_Ψg| (sup-norm ≤ tol) together with its
    /// two consequences under spectral injectivity: (i) |f̂| = |ĝ| and
    /// (ii) per-filter moduli agree in time and frequency. Frequency-side
    /// comparisons are scaled by √N to account for the unnormalized DFT.
    pub fn fourier_magnitude_consequences(
        &self,
        f: &Signal,
        g: &Signal,
        tol: f64,
    ) -> Result<FourierMagnitudeReport> {
        if f.n() != self.n || g.n() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: f.n().max(g.n()) });
        }
        let sqrt_n = (self.n as f64).sqrt();
        let fs = harmonic::dft(f);
        let gs = harmonic::dft(g);

        let mut premise_dev: f64 = 0.0;
        let mut time_dev: f64 = 0.0;
        let mut freq_dev: f64 = 0.0;
        for l in 0..self.len() {
            let pf = self.filtered_spectrum(&fs, l);
            let pg = self.filtered_spectrum(&gs, l);
            for (a, b) in pf.iter().zip(&pg) {
                freq_dev = freq_dev.max((a.norm() - b.norm()).abs());
            }
            let tf = inverse(pf);
            let tg = inverse(pg);
            for (a, b) in tf.iter().zip(&tg) {
                let d = (a.norm() - b.norm()).abs();
                premise_dev = premise_dev.max(d);
                time_dev = time_dev.max(d);
            }
        }
        let mut spec_dev: f64 = 0.0;
        for (a, b) in fs.values().iter().zip(gs.values()) {
            spec_dev = spec_dev.max((a.norm() - b.norm()).abs());
        }
        Ok(FourierMagnitudeReport {
            premise_holds: premise_dev <= tol,
            conclusion_i: spec_dev <= tol * sqrt_n,
            conclusion_ii: time_dev <= tol && freq_dev <= tol * sqrt_n,
        })
    }

    /// Spectrum of f ∗ ψ_λ*, i.e. f̂ · conj(ψ̂_λ).
    pub(crate) fn filtered_spectrum(&self, fs: &Spectrum, l: usize) -> Vec<Complex64> {
        fs.values()
            .iter()
            .zip(&self.profiles[l])
            .map(|(a, b)| a * b.conj())
            .collect()
    }
}

fn inverse(mut buf: Vec<Complex64>) -> Vec<Complex64> {
    harmonic::fft_inverse(&mut buf);
    buf
}

fn raised_cosine(dist: f64, width: f64) -> f64 {
    if dist >= width {
        0.0
    } else {
        let c = (std::f64::consts::PI * dist / (2.0 * width)).cos();
        c * c
    }
}

fn dist_to(xi: usize, center: f64, n: usize) -> f64 {
    let d = (xi as f64 - center).rem_euclid(n as f64);
    d.min(n as f64 - d)
}
