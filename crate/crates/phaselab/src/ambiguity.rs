//! Constructive modulus ambiguities: band projections f_U, multi-sign
//! recombinations g = Σ_j σ_j f_{U_j}, and per-class phase recovery.
//!
//! When each part U_j is a union of equivalence classes, the recombined
//! signal g has |W_Ψ g| = |W_Ψ f| exactly, with the transform on the slab
//! of U_j multiplied by σ_j. Phase propagation inverts the construction:
//! it extracts a unimodular factor per active label and checks constancy
//! on each class.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cheeger_graph::EquivalenceDecomposition;
use crate::error::{Error, Result};
use crate::filterbank::FilterBank;
use crate::harmonic::{self, Signal};
use crate::transform;

/// A sign pattern over a partition of the active labels. Parts hold label
/// indices into the bank; each sign must be unimodular.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AmbiguitySpec {
    pub parts: Vec<Vec<usize>>,
    pub signs: Vec<Complex64>,
}

impl AmbiguitySpec {
    pub fn new(parts: Vec<Vec<usize>>, signs: Vec<Complex64>) -> Result<Self> {
        if parts.len() != signs.len() {
            return Err(Error::InvalidSpec(format!(
                "{} parts but {} signs",
                parts.len(),
                signs.len()
            )));
        }
        if parts.is_empty() {
            return Err(Error::InvalidSpec("empty partition".into()));
        }
        for s in &signs {
            if (s.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidSpec(format!("sign {s} is not unimodular")));
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for part in &parts {
            for &l in part {
                if !seen.insert(l) {
                    return Err(Error::InvalidSpec(format!("label index {l} appears twice")));
                }
            }
        }
        Ok(Self { parts, signs })
    }

    /// Real two-part spec (+1 on `first`, −1 on the rest of the labels).
    pub fn sign_flip(first: Vec<usize>, rest: Vec<usize>) -> Result<Self> {
        Self::new(vec![first, rest], vec![Complex64::ONE, -Complex64::ONE])
    }

    /// Checks the partition against a class decomposition: parts must
    /// cover every active label and never split a class.
    pub fn validate_against(&self, decomp: &EquivalenceDecomposition) -> Result<()> {
        let covered: std::collections::BTreeSet<usize> =
            self.parts.iter().flatten().cloned().collect();
        for class in &decomp.classes {
            for &l in class {
                if !covered.contains(&l) {
                    return Err(Error::InvalidSpec(format!(
                        "active label index {l} is not covered by the partition"
                    )));
                }
            }
            let holders: std::collections::BTreeSet<usize> = class
                .iter()
                .filter_map(|l| self.parts.iter().position(|p| p.contains(l)))
                .collect();
            if holders.len() > 1 {
                return Err(Error::InvalidSpec(format!(
                    "equivalence class {class:?} is split across parts {holders:?}"
                )));
            }
        }
        Ok(())
    }
}

/// Band projection f_U = Σ_{λ∈U} ν_λ · f∗ψ_λ*∗ψ_λ, evaluated spectrally
/// as idft(f̂ · H_U). When U is a union of equivalence classes this
/// reproduces f∗ψ_{λ'}* for λ' ∈ U and annihilates the rest.
pub fn band_projection(bank: &FilterBank, f: &Signal, labels_in_u: &[usize]) -> Result<Signal> {
    if f.n() != bank.n() {
        return Err(Error::DimensionMismatch { expected: bank.n(), got: f.n() });
    }
    let profile = crate::cheeger_graph::band_profile(bank, labels_in_u)?;
    let fs = harmonic::dft(f);
    let values: Vec<Complex64> = fs
        .values()
        .iter()
        .zip(&profile.values)
        .map(|(v, h)| v * h)
        .collect();
    Ok(harmonic::idft(&harmonic::Spectrum::new(values)?))
}

/// g = Σ_j σ_j f_{U_j}. The partition is validated against the class
/// decomposition unless `expert` is set (useful to demonstrate how the
/// projection identity fails on split classes).
pub fn synthesize_ambiguity(
    bank: &FilterBank,
    f: &Signal,
    spec: &AmbiguitySpec,
    expert: bool,
) -> Result<Signal> {
    if !expert {
        let decomp =
            crate::cheeger_graph::equivalence_decomposition(bank, f, crate::cheeger_graph::DEFAULT_POSITIVITY_TOL)?;
        spec.validate_against(&decomp)?;
    }
    let mut acc = Signal::zero(bank.n(), crate::harmonic::Field::Complex);
    for (part, sign) in spec.parts.iter().zip(&spec.signs) {
        let proj = band_projection(bank, f, part)?;
        acc = acc.add(&proj.scaled(*sign))?;
    }
    Ok(acc)
}

/// Per-class unimodular factors extracted from a pair with matching
/// transform moduli.
#[derive(Debug, Clone, Serialize)]
pub struct PhasePropagation {
    /// (class label indices, recovered σ) per equivalence class.
    pub class_sigmas: Vec<(Vec<usize>, Complex64)>,
    /// Worst per-label residual ‖g∗ψ_λ* − σ_λ·f∗ψ_λ*‖ / ‖f∗ψ_λ*‖.
    pub worst_residual: f64,
}

/// Verifies that g is related to f by per-band unimodular factors and
/// that the factors are constant on equivalence classes. Fails with a
/// modulus mismatch when |W_Ψf| and |W_Ψg| differ beyond `tol`, and with
/// a local-consistency error when some band of g leaves the ray of f's.
pub fn verify_phase_propagation(
    bank: &FilterBank,
    f: &Signal,
    g: &Signal,
    tol: f64,
) -> Result<PhasePropagation> {
    let ff = transform::analyze(bank, f)?;
    let gg = transform::analyze(bank, g)?;
    let gap = ff.modulus_distance(&gg)?;
    if gap > tol * harmonic::norm(f).max(1.0) {
        return Err(Error::InvalidValue(format!(
            "transform moduli differ by {gap:.3e}, beyond tolerance"
        )));
    }
    let decomp =
        crate::cheeger_graph::equivalence_decomposition(bank, f, crate::cheeger_graph::DEFAULT_POSITIVITY_TOL)?;
    let n = bank.n();
    let nl = bank.len();
    let mut sigma: Vec<Option<Complex64>> = vec![None; nl];
    let mut worst_residual: f64 = 0.0;
    for class in &decomp.classes {
        for &l in class {
            let mut ip = Complex64::ZERO;
            let mut f_energy = 0.0;
            let mut g_energy = 0.0;
            for x in 0..n {
                let a = gg.at(x, l);
                let b = ff.at(x, l);
                ip += a * b.conj();
                f_energy += b.norm_sqr();
                g_energy += a.norm_sqr();
            }
            let f_norm = f_energy.sqrt();
            if ip.norm() <= f64::MIN_POSITIVE {
                return Err(Error::LocalConsistency {
                    label: bank.labels()[l].clone(),
                    residual: (f_energy + g_energy).sqrt() / f_norm.max(f64::MIN_POSITIVE),
                });
            }
            let s = ip / ip.norm();
            // residual of g's band against the ray through f's band
            let mut res = 0.0;
            for x in 0..n {
                res += (gg.at(x, l) - s * ff.at(x, l)).norm_sqr();
            }
            let res = res.sqrt() / f_norm.max(f64::MIN_POSITIVE);
            worst_residual = worst_residual.max(res);
            if res > tol.max(1e-12) {
                return Err(Error::LocalConsistency { label: bank.labels()[l].clone(), residual: res });
            }
            sigma[l] = Some(s);
        }
    }
    let mut class_sigmas = Vec::new();
    for class in &decomp.classes {
        let sigmas: Vec<Complex64> = class.iter().map(|&l| sigma[l].unwrap()).collect();
        let first = sigmas[0];
        for (&l, s) in class.iter().zip(&sigmas) {
            if (s - first).norm() > tol.max(1e-9) {
                return Err(Error::LocalConsistency {
                    label: bank.labels()[l].clone(),
                    residual: (s - first).norm(),
                });
            }
        }
        class_sigmas.push((class.clone(), first));
    }
    Ok(PhasePropagation { class_sigmas, worst_residual })
}
