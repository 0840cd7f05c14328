//! The generalized wavelet transform W_Ψ on X = Z_N × Λ, its adjoint, and
//! the reproducing-kernel projection K_Ψ = W_Ψ W_Ψ*.
//!
//! Coefficient fields live in L²(A×Λ) with the ν-weighted inner product
//! `⟨F,G⟩ = Σ_λ ν_λ Σ_x F(x,λ)·conj(G(x,λ))`; all norms downstream inherit
//! these weights. Flat storage is x-major: point p = x·|Λ| + λ.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::filterbank::FilterBank;
use crate::harmonic::{self, Signal, Spectrum};

/// An N×|Λ| array of transform values with the bank's measure weights.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField {
    n: usize,
    labels: Vec<String>,
    nu: Vec<f64>,
    /// x-major: values[x * labels.len() + l] = F(x, λ_l).
    values: Vec<Complex64>,
}

impl CoefficientField {
    pub fn new(n: usize, labels: Vec<String>, nu: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != n * labels.len() || nu.len() != labels.len() {
            return Err(Error::DimensionMismatch { expected: n * labels.len(), got: values.len() });
        }
        for v in &values {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::InvalidValue("non-finite coefficient".into()));
            }
        }
        Ok(Self { n, labels, nu, values })
    }

    pub fn zero_like(other: &CoefficientField) -> Self {
        Self {
            n: other.n,
            labels: other.labels.clone(),
            nu: other.nu.clone(),
            values: vec![Complex64::ZERO; other.values.len()],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_labels(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    /// Number of points in X = Z_N × Λ.
    pub fn num_points(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    #[inline]
    pub fn index(&self, x: usize, l: usize) -> usize {
        x * self.labels.len() + l
    }

    #[inline]
    pub fn at(&self, x: usize, l: usize) -> Complex64 {
        self.values[self.index(x, l)]
    }

    /// Measure weight of point p (the ν of its label).
    #[inline]
    pub fn point_weight(&self, p: usize) -> f64 {
        self.nu[p % self.labels.len()]
    }

    pub fn same_shape(&self, other: &CoefficientField) -> bool {
        self.n == other.n && self.labels.len() == other.labels.len()
    }

    pub fn norm_sq(&self) -> f64 {
        let nl = self.labels.len();
        let mut acc = 0.0;
        for (p, v) in self.values.iter().enumerate() {
            acc += self.nu[p % nl] * v.norm_sqr();
        }
        acc
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn inner(&self, other: &CoefficientField) -> Result<Complex64> {
        if !self.same_shape(other) {
            return Err(Error::DimensionMismatch { expected: self.values.len(), got: other.values.len() });
        }
        let nl = self.labels.len();
        let mut acc = Complex64::ZERO;
        for (p, (a, b)) in self.values.iter().zip(&other.values).enumerate() {
            acc += self.nu[p % nl] * a * b.conj();
        }
        Ok(acc)
    }

    pub fn add(&self, other: &CoefficientField) -> Result<CoefficientField> {
        if !self.same_shape(other) {
            return Err(Error::DimensionMismatch { expected: self.values.len(), got: other.values.len() });
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(CoefficientField { n: self.n, labels: self.labels.clone(), nu: self.nu.clone(), values })
    }

    pub fn sub(&self, other: &CoefficientField) -> Result<CoefficientField> {
        if !self.same_shape(other) {
            return Err(Error::DimensionMismatch { expected: self.values.len(), got: other.values.len() });
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(CoefficientField { n: self.n, labels: self.labels.clone(), nu: self.nu.clone(), values })
    }

    pub fn scaled(&self, c: Complex64) -> CoefficientField {
        CoefficientField {
            n: self.n,
            labels: self.labels.clone(),
            nu: self.nu.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// Pointwise modulus |F| as a coefficient field.
    pub fn modulus(&self) -> CoefficientField {
        CoefficientField {
            n: self.n,
            labels: self.labels.clone(),
            nu: self.nu.clone(),
            values: self.values.iter().map(|v| Complex64::new(v.norm(), 0.0)).collect(),
        }
    }

    /// ‖ |F| − |G| ‖ in the weighted norm.
    pub fn modulus_distance(&self, other: &CoefficientField) -> Result<f64> {
        if !self.same_shape(other) {
            return Err(Error::DimensionMismatch { expected: self.values.len(), got: other.values.len() });
        }
        let nl = self.labels.len();
        let mut acc = 0.0;
        for (p, (a, b)) in self.values.iter().zip(&other.values).enumerate() {
            let d = a.norm() - b.norm();
            acc += self.nu[p % nl] * d * d;
        }
        Ok(acc.sqrt())
    }

    /// min over unimodular α of ‖F − αG‖²; α ∈ {±1} for the real field.
    pub fn phase_min_dist_sq(&self, other: &CoefficientField, field: crate::harmonic::Field) -> Result<f64> {
        let ip = self.inner(other)?;
        let cross = match field {
            crate::harmonic::Field::Real => ip.re.abs(),
            crate::harmonic::Field::Complex => ip.norm(),
        };
        Ok((self.norm_sq() + other.norm_sq() - 2.0 * cross).max(0.0))
    }
}

/// F(x,λ) = (f ∗ ψ_λ*)(x), computed per label by spectral multiplication.
pub fn analyze(bank: &FilterBank, f: &Signal) -> Result<CoefficientField> {
    if f.n() != bank.n() {
        return Err(Error::DimensionMismatch { expected: bank.n(), got: f.n() });
    }
    let n = bank.n();
    let nl = bank.len();
    let fs = harmonic::dft(f);
    let mut values = vec![Complex64::ZERO; n * nl];
    for l in 0..nl {
        let mut buf = bank.filtered_spectrum(&fs, l);
        harmonic::fft_inverse(&mut buf);
        for (x, v) in buf.into_iter().enumerate() {
            values[x * nl + l] = v;
        }
    }
    CoefficientField::new(n, bank.labels().to_vec(), bank.nu().to_vec(), values)
}

/// Adjoint of [`analyze`]: W_Ψ*F = Σ_λ ν_λ F(·,λ) ∗ ψ_λ.
pub fn synthesize(bank: &FilterBank, field: &CoefficientField) -> Result<Signal> {
    check_shape(bank, field)?;
    let n = bank.n();
    let nl = bank.len();
    let mut acc = vec![Complex64::ZERO; n];
    let mut buf = vec![Complex64::ZERO; n];
    for l in 0..nl {
        for x in 0..n {
            buf[x] = field.at(x, l);
        }
        harmonic::fft_forward(&mut buf);
        let profile = bank.profile(l);
        let w = bank.nu()[l];
        for (a, (b, p)) in acc.iter_mut().zip(buf.iter().zip(profile)) {
            *a += w * b * p;
        }
    }
    harmonic::fft_inverse(&mut acc);
    Signal::complex(acc)
}

/// Orthogonal projection K_Ψ = W_Ψ W_Ψ* onto the transform range,
/// applied matrix-free as analyze ∘ synthesize.
pub fn apply_kernel(bank: &FilterBank, field: &CoefficientField) -> Result<CoefficientField> {
    let f = synthesize(bank, field)?;
    analyze(bank, &f)
}

/// Reproducing kernel entry k((x,λ),(x',λ')) = (ψ_{λ'} ∗ ψ_λ*)(x − x').
pub fn kernel_entry(
    bank: &FilterBank,
    x: usize,
    l: usize,
    x2: usize,
    l2: usize,
) -> Result<Complex64> {
    let n = bank.n();
    if x >= n || x2 >= n || l >= bank.len() || l2 >= bank.len() {
        return Err(Error::IndexOutOfRange(format!(
            "point ({x},{l})/({x2},{l2}) outside Z_{n} × Λ of size {}",
            bank.len()
        )));
    }
    let table = cross_correlation(bank, l2, l);
    Ok(table[(x + n - x2) % n])
}

/// Time-domain table r_{a,b}(t) = (ψ_a ∗ ψ_b*)(t) = idft(ψ̂_a · conj(ψ̂_b)).
pub(crate) fn cross_correlation(bank: &FilterBank, a: usize, b: usize) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = bank
        .profile(a)
        .iter()
        .zip(bank.profile(b))
        .map(|(pa, pb)| pa * pb.conj())
        .collect();
    harmonic::fft_inverse(&mut buf);
    buf
}

/// Reproducing-kernel projection with an optional dense materialization.
pub struct KernelOperator {
    bank: FilterBank,
    dense: Option<Vec<Complex64>>,
    m: usize,
}

impl KernelOperator {
    pub fn new(bank: FilterBank) -> Self {
        let m = bank.n() * bank.len();
        Self { bank, dense: None, m }
    }

    /// Materialize the |X|×|X| matrix of kernel entries (row-major; entry
    /// (p,q) = k(p,q)). Only for |X| ≤ 4096.
    pub fn with_dense(bank: FilterBank) -> Result<Self> {
        let m = bank.n() * bank.len();
        if m > 4096 {
            return Err(Error::BudgetExceeded { needed: m as u64, cap: 4096 });
        }
        let dense = dense_kernel_matrix(&bank);
        Ok(Self { bank, dense: Some(dense), m })
    }

    pub fn bank(&self) -> &FilterBank {
        &self.bank
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn dense(&self) -> Option<&[Complex64]> {
        self.dense.as_deref()
    }

    pub fn apply(&self, field: &CoefficientField) -> Result<CoefficientField> {
        apply_kernel(&self.bank, field)
    }

    /// Apply via the explicit integral-operator form
    /// (KG)(p) = Σ_q μ_q k(p,q) G(q); requires the dense materialization.
    pub fn apply_dense(&self, field: &CoefficientField) -> Result<CoefficientField> {
        let dense = self
            .dense
            .as_ref()
            .ok_or_else(|| Error::InvalidValue("kernel operator has no dense materialization".into()))?;
        if field.num_points() != self.m {
            return Err(Error::DimensionMismatch { expected: self.m, got: field.num_points() });
        }
        let nl = self.bank.len();
        let mut out = CoefficientField::zero_like(field);
        let src = field.values();
        for p in 0..self.m {
            let row = &dense[p * self.m..(p + 1) * self.m];
            let mut acc = Complex64::ZERO;
            for (q, (k, v)) in row.iter().zip(src).enumerate() {
                acc += self.bank.nu()[q % nl] * k * v;
            }
            out.values_mut()[p] = acc;
        }
        Ok(out)
    }
}

/// Row-major dense kernel matrix over X (x-major point order).
pub fn dense_kernel_matrix(bank: &FilterBank) -> Vec<Complex64> {
    let n = bank.n();
    let nl = bank.len();
    let m = n * nl;
    let mut tables = Vec::with_capacity(nl * nl);
    for a in 0..nl {
        for b in 0..nl {
            tables.push(cross_correlation(bank, a, b));
        }
    }
    let mut dense = vec![Complex64::ZERO; m * m];
    for p in 0..m {
        let (x, l) = (p / nl, p % nl);
        for q in 0..m {
            let (x2, l2) = (q / nl, q % nl);
            // k((x,l),(x2,l2)) = r_{l2,l}(x − x2)
            dense[p * m + q] = tables[l2 * nl + l][(x + n - x2) % n];
        }
    }
    dense
}

/// Coefficient field with iid standard-normal entries (complex parts drawn
/// independently for complex banks), shaped to match the bank.
pub fn random_field<R: rand::Rng>(bank: &FilterBank, rng: &mut R) -> CoefficientField {
    let m = bank.n() * bank.len();
    let values: Vec<Complex64> = (0..m)
        .map(|_| match bank.field() {
            crate::harmonic::Field::Real => Complex64::new(harmonic::gauss(rng), 0.0),
            crate::harmonic::Field::Complex => {
                Complex64::new(harmonic::gauss(rng), harmonic::gauss(rng))
            }
        })
        .collect();
    CoefficientField::new(bank.n(), bank.labels().to_vec(), bank.nu().to_vec(), values)
        .expect("shape is consistent by construction")
}

/// Max over `trials` random unit-norm signals of the relative isometry
/// defect | ‖W_Ψ f‖ − ‖f‖ | / ‖f‖.
pub fn isometry_defect(bank: &FilterBank, trials: usize, seed: u64) -> Result<f64> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let f = Signal::random(bank.n(), bank.field(), &mut rng);
        let nf = harmonic::norm(&f);
        if nf == 0.0 {
            continue;
        }
        let coeff = analyze(bank, &f)?;
        worst = worst.max((coeff.norm() - nf).abs() / nf);
    }
    Ok(worst)
}

/// Max over `trials` random signals of the relative inversion residual
/// ‖W_Ψ* W_Ψ f − f‖ / ‖f‖.
pub fn inversion_residual(bank: &FilterBank, trials: usize, seed: u64) -> Result<f64> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let f = Signal::random(bank.n(), bank.field(), &mut rng);
        let nf = harmonic::norm(&f);
        if nf == 0.0 {
            continue;
        }
        let back = synthesize(bank, &analyze(bank, &f)?)?;
        worst = worst.max(harmonic::norm(&back.sub(&f)?) / nf);
    }
    Ok(worst)
}

fn check_shape(bank: &FilterBank, field: &CoefficientField) -> Result<()> {
    if field.n() != bank.n() || field.num_labels() != bank.len() {
        return Err(Error::DimensionMismatch {
            expected: bank.n() * bank.len(),
            got: field.num_points(),
        });
    }
    Ok(())
}

/// Spectrum helper reused by modules that need f ∗ ψ_λ* as a signal.
pub(crate) fn filtered_signal(bank: &FilterBank, fs: &Spectrum, l: usize) -> Signal {
    let mut buf = bank.filtered_spectrum(fs, l);
    harmonic::fft_inverse(&mut buf);
    Signal::complex(buf).expect("finite by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic::{dft, involute, norm, Field};
    use rand::SeedableRng;

    fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
        rand_chacha::ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn analyze_disjoint_bands_vanish_off_band() {
        let bank = FilterBank::shannon(16, true).unwrap();
        let f = bank.psi(0); // ψ_{band1}
        let coeff = analyze(&bank, &f).unwrap();
        for l in 1..3 {
            for x in 0..16 {
                assert!(coeff.at(x, l).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn analyze_delta_yields_involuted_filters() {
        let bank = FilterBank::shannon(16, true).unwrap();
        let coeff = analyze(&bank, &Signal::delta(16, 0)).unwrap();
        for l in 0..bank.len() {
            let expected = involute(&bank.psi(l));
            for x in 0..16 {
                assert!((coeff.at(x, l) - expected.values()[x]).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn analyze_is_isometry_under_calderon() {
        let bank = FilterBank::shannon(64, true).unwrap();
        let mut r = rng(3);
        for _ in 0..10 {
            let f = Signal::random(64, Field::Complex, &mut r);
            let coeff = analyze(&bank, &f).unwrap();
            assert!((coeff.norm() - norm(&f)).abs() <= 1e-10 * norm(&f));
        }
    }

    #[test]
    fn synthesize_inverts_analyze() {
        for bank in [
            FilterBank::shannon(64, true).unwrap(),
            FilterBank::overlapping_shannon(64, 0.25, true, false).unwrap(),
            FilterBank::smooth(17, 5, Field::Real).unwrap(),
        ] {
            let mut r = rng(5);
            let f = Signal::random(bank.n(), Field::Complex, &mut r);
            let back = synthesize(&bank, &analyze(&bank, &f).unwrap()).unwrap();
            assert!(norm(&back.sub(&f).unwrap()) <= 1e-10 * norm(&f));

            let zero = CoefficientField::zero_like(&analyze(&bank, &f).unwrap());
            let z = synthesize(&bank, &zero).unwrap();
            assert!(norm(&z) == 0.0);
        }
    }

    #[test]
    fn adjointness_of_analyze_and_synthesize() {
        let bank = FilterBank::smooth(12, 4, Field::Complex).unwrap();
        let mut r = rng(7);
        for _ in 0..10 {
            let f = Signal::random(12, Field::Complex, &mut r);
            let g = random_field(&bank, &mut r);
            let lhs = analyze(&bank, &f).unwrap().inner(&g).unwrap();
            let rhs = crate::harmonic::inner(&f, &synthesize(&bank, &g).unwrap()).unwrap();
            assert!((lhs - rhs).norm() <= 1e-9 * (1.0 + norm(&f)) * (1.0 + g.norm()));
        }
    }

    #[test]
    fn kernel_projection_identities() {
        let bank = FilterBank::overlapping_shannon(32, 0.25, true, false).unwrap();
        let mut r = rng(11);
        let f = Signal::random(32, Field::Complex, &mut r);
        let coeff = analyze(&bank, &f).unwrap();

        // fixes its range
        let once = apply_kernel(&bank, &coeff).unwrap();
        assert!(once.sub(&coeff).unwrap().norm() <= 1e-10 * coeff.norm());

        // idempotent and self-adjoint on random fields
        let raw = random_field(&bank, &mut r);
        let k1 = apply_kernel(&bank, &raw).unwrap();
        let k2 = apply_kernel(&bank, &k1).unwrap();
        assert!(k2.sub(&k1).unwrap().norm() <= 1e-9 * raw.norm());

        let other = analyze(&bank, &Signal::random(32, Field::Complex, &mut r)).unwrap();
        let a = k1.inner(&other).unwrap();
        let b = raw.inner(&apply_kernel(&bank, &other).unwrap()).unwrap();
        assert!((a - b).norm() <= 1e-9 * raw.norm() * other.norm());
    }

    #[test]
    fn shannon_kernel_is_block_diagonal_across_bands() {
        let bank = FilterBank::shannon(16, true).unwrap();
        let mut r = rng(13);
        let raw = random_field(&bank, &mut r);
        // zero all labels except band2, apply K, check it stays in the slab
        let mut slab = CoefficientField::zero_like(&raw);
        for x in 0..16 {
            let p = slab.index(x, 1);
            slab.values_mut()[p] = raw.values()[raw.index(x, 1)];
        }
        let out = apply_kernel(&bank, &slab).unwrap();
        for x in 0..16 {
            for l in 0..bank.len() {
                if l != 1 {
                    assert!(out.at(x, l).norm() <= 1e-12 * (1.0 + raw.norm()));
                }
            }
        }
    }

    #[test]
    fn kernel_entries() {
        let bank = FilterBank::shannon(16, true).unwrap();
        // disjoint bands give exactly zero entries
        let v = kernel_entry(&bank, 3, 0, 7, 2).unwrap();
        assert!(v.norm() <= 1e-14);
        // diagonal equals the squared filter norm
        for l in 0..bank.len() {
            let v = kernel_entry(&bank, 5, l, 5, l).unwrap();
            assert!((v.re - bank.psi_norm_sq(l)).abs() <= 1e-12);
            assert!(v.im.abs() <= 1e-14);
        }
        // Hermitian symmetry on a few pairs
        let ov = FilterBank::overlapping_shannon(16, 0.25, true, false).unwrap();
        for (x, l, x2, l2) in [(0usize, 0usize, 5usize, 1usize), (3, 2, 9, 0), (15, 1, 2, 1)] {
            let a = kernel_entry(&ov, x, l, x2, l2).unwrap();
            let b = kernel_entry(&ov, x2, l2, x, l).unwrap();
            assert!((a - b.conj()).norm() <= 1e-12);
        }
        assert!(kernel_entry(&bank, 16, 0, 0, 0).is_err());
    }

    #[test]
    fn dense_kernel_agrees_with_matrix_free() {
        let bank = FilterBank::smooth(8, 4, Field::Complex).unwrap();
        let op = KernelOperator::with_dense(bank.clone()).unwrap();
        let mut r = rng(17);
        let raw = random_field(&bank, &mut r);
        let a = op.apply(&raw).unwrap();
        let b = op.apply_dense(&raw).unwrap();
        assert!(a.sub(&b).unwrap().norm() <= 1e-9 * raw.norm());
    }

    #[test]
    fn isometry_defect_values() {
        let good = FilterBank::shannon(64, true).unwrap();
        assert!(isometry_defect(&good, 20, 0).unwrap() <= 1e-10);

        let sh = FilterBank::shannon(16, true).unwrap();
        let doubled = FilterBank::custom(
            sh.labels().to_vec(),
            (0..sh.len()).map(|l| sh.profile(l).iter().map(|v| v * 2.0).collect()).collect(),
            sh.nu().to_vec(),
            Field::Real,
        )
        .unwrap();
        let d = isometry_defect(&doubled, 20, 0).unwrap();
        assert!((d - 1.0).abs() <= 1e-10);

        let zero = FilterBank::custom(
            vec!["z".into()],
            vec![vec![Complex64::ZERO; 16]],
            vec![1.0],
            Field::Real,
        )
        .unwrap();
        assert!((isometry_defect(&zero, 5, 0).unwrap() - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn calderon_isometry_inversion_equivalence_chain() {
        // (C) ⟺ isometry ⟺ inversion, checked both ways on built-in and
        // perturbed banks
        let builtins = vec![
            FilterBank::shannon(32, true).unwrap(),
            FilterBank::overlapping_shannon(32, 0.25, true, false).unwrap(),
            FilterBank::smooth(20, 5, Field::Real).unwrap(),
        ];
        for bank in &builtins {
            assert!(bank.check_calderon(1e-10).satisfied);
            assert!(isometry_defect(bank, 10, 1).unwrap() <= 1e-9);
            assert!(inversion_residual(bank, 10, 1).unwrap() <= 1e-9);
        }
        for (i, bank) in builtins.iter().enumerate() {
            let scale = 1.0 + 0.05 * (i + 1) as f64;
            let bad = FilterBank::custom(
                bank.labels().to_vec(),
                (0..bank.len()).map(|l| bank.profile(l).iter().map(|v| v * scale).collect()).collect(),
                bank.nu().to_vec(),
                bank.field(),
            )
            .unwrap();
            assert!(!bad.check_calderon(1e-10).satisfied);
            assert!(isometry_defect(&bad, 10, 1).unwrap() > 1e-9);
            assert!(inversion_residual(&bad, 10, 1).unwrap() > 1e-9);
        }
    }
}
