//! Kernel Cheeger constant of a coefficient field over X = Z_N × Λ.
//!
//! For the orthogonal projection K onto the transform range and a subset
//! S ⊆ X, the commutator energy ‖[K,P_S]F‖² measures how much kernel mass
//! crosses the cut; the Cheeger constant is the infimum of
//! `‖[K,P_S]F‖² / min(‖P_S F‖², ‖P_{S^c} F‖²)` over admissible S. On a
//! finite X every subset is measurable, so exhaustive search is exact.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filterbank::FilterBank;
use crate::harmonic::Field;
use crate::transform::{self, CoefficientField};

/// Hard cap on exhaustive enumeration: 2^23 complementary pairs.
pub const EXHAUSTIVE_CAP_BITS: usize = 24;

/// Default evaluation budget for searches.
pub const DEFAULT_BUDGET: u64 = 1 << 23;

/// Relative floor below which a masked norm counts as zero.
pub const ADMISSIBILITY_FLOOR: f64 = 1e-12;

/// Boolean mask over the points of X (x-major order: p = x·|Λ| + λ).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetMask {
    bits: Vec<bool>,
}

impl SubsetMask {
    pub fn empty(len: usize) -> Self {
        Self { bits: vec![false; len] }
    }

    pub fn full(len: usize) -> Self {
        Self { bits: vec![true; len] }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn from_indices(len: usize, indices: &[usize]) -> Result<Self> {
        let mut bits = vec![false; len];
        for &i in indices {
            if i >= len {
                return Err(Error::IndexOutOfRange(format!("mask index {i} ≥ {len}")));
            }
            bits[i] = true;
        }
        Ok(Self { bits })
    }

    /// Product mask A×S for a label subset S ⊆ Λ.
    pub fn product(n: usize, num_labels: usize, labels_in_s: &[usize]) -> Result<Self> {
        let mut bits = vec![false; n * num_labels];
        for &l in labels_in_s {
            if l >= num_labels {
                return Err(Error::IndexOutOfRange(format!("label index {l} ≥ {num_labels}")));
            }
            for x in 0..n {
                bits[x * num_labels + l] = true;
            }
        }
        Ok(Self { bits })
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    #[inline]
    pub fn get(&self, p: usize) -> bool {
        self.bits[p]
    }

    pub fn set(&mut self, p: usize, value: bool) {
        self.bits[p] = value;
    }

    pub fn flip(&mut self, p: usize) {
        self.bits[p] = !self.bits[p];
    }

    pub fn complement(&self) -> Self {
        Self { bits: self.bits.iter().map(|b| !b).collect() }
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Lowercase hex over little-endian bytes: bit p lives in byte p/8,
    /// position p%8.
    pub fn to_hex(&self) -> String {
        let nbytes = self.bits.len().div_ceil(8);
        let mut bytes = vec![0u8; nbytes];
        for (p, &b) in self.bits.iter().enumerate() {
            if b {
                bytes[p / 8] |= 1 << (p % 8);
            }
        }
        bytes.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn from_hex(hex: &str, len: usize) -> Result<Self> {
        let nbytes = len.div_ceil(8);
        if hex.len() != 2 * nbytes {
            return Err(Error::InvalidValue(format!(
                "hex mask length {} does not match {} points",
                hex.len(),
                len
            )));
        }
        let mut bits = vec![false; len];
        for (i, chunk) in hex.as_bytes().chunks(2).enumerate() {
            let s = std::str::from_utf8(chunk).map_err(|_| Error::InvalidValue("bad hex".into()))?;
            let byte = u8::from_str_radix(s, 16)
                .map_err(|_| Error::InvalidValue(format!("bad hex byte `{s}`")))?;
            for j in 0..8 {
                let p = i * 8 + j;
                if p < len {
                    bits[p] = byte & (1 << j) != 0;
                } else if byte & (1 << j) != 0 {
                    return Err(Error::InvalidValue("hex mask has bits past the end".into()));
                }
            }
        }
        Ok(Self { bits })
    }
}

/// Search strategy for Cheeger infima.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// All complementary pairs of subsets; exact, certified.
    Exhaustive,
    /// Masks of the form A×S over label subsets S ⊆ Λ.
    ProductSets,
    /// Steepest single-bit-flip descent from seeded starts.
    LocalSearch,
}

/// Certified (or best-found) Cheeger value with its witness subset.
#[derive(Debug, Clone)]
pub struct CheegerResult {
    pub value: f64,
    /// Mask attaining (exhaustive) or best approximating the infimum;
    /// `None` when no admissible subset exists and the value is the
    /// degenerate-case convention.
    pub witness: Option<SubsetMask>,
    pub strategy: Strategy,
    pub certified: bool,
}

pub(crate) fn mask_field(fld: &CoefficientField, mask: &SubsetMask, keep_in_s: bool) -> CoefficientField {
    let mut out = fld.clone();
    for (p, v) in out.values_mut().iter_mut().enumerate() {
        if mask.get(p) != keep_in_s {
            *v = Complex64::ZERO;
        }
    }
    out
}

/// ‖P_S K P_{S^c}F‖² + ‖P_{S^c} K P_S F‖², the symmetric commutator energy.
/// Agrees with ‖K(P_S F) − P_S(K F)‖² whenever F lies in the kernel range.
pub fn commutator_norm_sq(
    bank: &FilterBank,
    fld: &CoefficientField,
    mask: &SubsetMask,
) -> Result<f64> {
    check_mask(bank, fld, mask)?;
    let kf = transform::apply_kernel(bank, fld)?;
    let u = transform::apply_kernel(bank, &mask_field(fld, mask, true))?;
    Ok(symmetric_commutator(fld, &kf, &u, mask))
}

/// Direct commutator form ‖K(P_S F) − P_S(K F)‖².
pub fn commutator_norm_sq_direct(
    bank: &FilterBank,
    fld: &CoefficientField,
    mask: &SubsetMask,
) -> Result<f64> {
    check_mask(bank, fld, mask)?;
    let kf = transform::apply_kernel(bank, fld)?;
    let u = transform::apply_kernel(bank, &mask_field(fld, mask, true))?;
    let nl = fld.num_labels();
    let mut acc = 0.0;
    for p in 0..fld.num_points() {
        let masked_kf = if mask.get(p) { kf.values()[p] } else { Complex64::ZERO };
        acc += fld.nu()[p % nl] * (u.values()[p] - masked_kf).norm_sqr();
    }
    Ok(acc)
}

fn symmetric_commutator(
    fld: &CoefficientField,
    kf: &CoefficientField,
    u: &CoefficientField,
    mask: &SubsetMask,
) -> f64 {
    let nl = fld.num_labels();
    let mut acc = 0.0;
    for p in 0..fld.num_points() {
        let w = fld.nu()[p % nl];
        if mask.get(p) {
            acc += w * (kf.values()[p] - u.values()[p]).norm_sqr();
        } else {
            acc += w * u.values()[p].norm_sqr();
        }
    }
    acc
}

fn check_mask(bank: &FilterBank, fld: &CoefficientField, mask: &SubsetMask) -> Result<()> {
    let m = bank.n() * bank.len();
    if fld.num_points() != m || mask.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: fld.num_points().max(mask.len()) });
    }
    Ok(())
}

/// Evaluation context carrying K F, the per-point measure weights, and the
/// cross-correlation tables needed for O(|X|) incremental flips.
struct SearchCtx<'a> {
    fld: &'a CoefficientField,
    n: usize,
    nl: usize,
    m: usize,
    mu: Vec<f64>,
    energy: Vec<f64>,
    kf: Vec<Complex64>,
    tables: Vec<Vec<Complex64>>,
    total_mass: f64,
    floor_sq: f64,
    evals: u64,
    budget: u64,
}

impl<'a> SearchCtx<'a> {
    fn new(bank: &FilterBank, fld: &'a CoefficientField, budget: u64) -> Result<Self> {
        let n = bank.n();
        let nl = bank.len();
        let m = n * nl;
        let kf = transform::apply_kernel(bank, fld)?;
        let mut tables = Vec::with_capacity(nl * nl);
        for a in 0..nl {
            for b in 0..nl {
                tables.push(transform::cross_correlation(bank, a, b));
            }
        }
        let mu: Vec<f64> = (0..m).map(|p| fld.nu()[p % nl]).collect();
        let energy: Vec<f64> = (0..m).map(|p| mu[p] * fld.values()[p].norm_sqr()).collect();
        let total_mass: f64 = energy.iter().sum();
        let floor = ADMISSIBILITY_FLOOR * total_mass.sqrt();
        Ok(Self {
            fld,
            n,
            nl,
            m,
            mu,
            energy,
            kf: kf.values().to_vec(),
            tables,
            total_mass,
            floor_sq: floor * floor,
            evals: 0,
            budget,
        })
    }

    #[inline]
    fn k_entry(&self, p: usize, q: usize) -> Complex64 {
        let (xp, lp) = (p / self.nl, p % self.nl);
        let (xq, lq) = (q / self.nl, q % self.nl);
        self.tables[lq * self.nl + lp][(xp + self.n - xq) % self.n]
    }

    fn admissible(&self, mass_s: f64) -> bool {
        mass_s > self.floor_sq && (self.total_mass - mass_s) > self.floor_sq
    }

    fn quotient(&self, comm_sq: f64, mass_s: f64) -> f64 {
        comm_sq / mass_s.min(self.total_mass - mass_s)
    }

    /// u = K P_S F computed from the tables (exact zeros preserved).
    fn compute_u(&self, mask: &SubsetMask) -> Vec<Complex64> {
        let mut u = vec![Complex64::ZERO; self.m];
        for q in 0..self.m {
            if mask.get(q) {
                let c = self.mu[q] * self.fld.values()[q];
                if c == Complex64::ZERO {
                    continue;
                }
                for (p, uv) in u.iter_mut().enumerate() {
                    *uv += c * self.k_entry(p, q);
                }
            }
        }
        u
    }

    fn comm_sq_from_u(&self, u: &[Complex64], mask: &SubsetMask) -> f64 {
        let mut acc = 0.0;
        for p in 0..self.m {
            if mask.get(p) {
                acc += self.mu[p] * (self.kf[p] - u[p]).norm_sqr();
            } else {
                acc += self.mu[p] * u[p].norm_sqr();
            }
        }
        acc
    }

    fn mass(&self, mask: &SubsetMask) -> f64 {
        (0..self.m).filter(|&p| mask.get(p)).map(|p| self.energy[p]).sum()
    }

    /// Fresh quotient at a mask; `None` when inadmissible.
    fn eval(&mut self, mask: &SubsetMask) -> Option<f64> {
        self.evals += 1;
        let mass_s = self.mass(mask);
        if !self.admissible(mass_s) {
            return None;
        }
        let u = self.compute_u(mask);
        Some(self.quotient(self.comm_sq_from_u(&u, mask), mass_s))
    }

    /// Gray-code walk over all complementary pairs (last point pinned to
    /// S^c). Returns the best admissible (value, mask), if any.
    fn exhaustive(&mut self) -> Result<Option<(f64, SubsetMask)>> {
        if self.m > EXHAUSTIVE_CAP_BITS {
            return Err(Error::BudgetExceeded {
                needed: 1u64 << (self.m.min(63) - 1),
                cap: 1u64 << (EXHAUSTIVE_CAP_BITS - 1),
            });
        }
        let steps: u64 = 1u64 << (self.m - 1);
        if steps > self.budget {
            return Err(Error::BudgetExceeded { needed: steps, cap: self.budget });
        }
        let mut mask = SubsetMask::empty(self.m);
        let mut u = vec![Complex64::ZERO; self.m];
        let mut mass_s = 0.0f64;
        let mut best: Option<(f64, SubsetMask)> = None;
        for i in 1..steps {
            let q = i.trailing_zeros() as usize;
            let entering = !mask.get(q);
            mask.flip(q);
            let c = self.mu[q] * self.fld.values()[q];
            let sign = if entering { 1.0 } else { -1.0 };
            if c != Complex64::ZERO {
                for (p, uv) in u.iter_mut().enumerate() {
                    *uv += sign * c * self.k_entry(p, q);
                }
            }
            mass_s += sign * self.energy[q];
            self.evals += 1;
            if !self.admissible(mass_s) {
                continue;
            }
            let val = self.quotient(self.comm_sq_from_u(&u, &mask), mass_s);
            if best.as_ref().is_none_or(|(b, _)| val < *b) {
                best = Some((val, mask.clone()));
            }
        }
        // re-evaluate the winner from scratch so the reported value is the
        // exact quotient at the witness
        if let Some((_, mask)) = &best {
            let mask = mask.clone();
            let val = self.eval(&mask).expect("witness stays admissible");
            return Ok(Some((val, mask)));
        }
        Ok(None)
    }

    /// Enumerate product masks A×S over label subsets (complement pairs
    /// once, label nl−1 pinned out).
    fn product_sets(&mut self) -> Result<Option<(f64, SubsetMask)>> {
        if self.nl > EXHAUSTIVE_CAP_BITS {
            return Err(Error::BudgetExceeded {
                needed: 1u64 << (self.nl.min(63) - 1),
                cap: 1u64 << (EXHAUSTIVE_CAP_BITS - 1),
            });
        }
        let count: u64 = 1u64 << (self.nl - 1);
        let mut best: Option<(f64, SubsetMask)> = None;
        for code in 1..count {
            if self.evals >= self.budget {
                break;
            }
            let labels: Vec<usize> = (0..self.nl).filter(|l| code & (1u64 << l) != 0).collect();
            let mask = SubsetMask::product(self.n, self.nl, &labels)?;
            self.evals += 1;
            let mass_s = self.mass(&mask);
            if !self.admissible(mass_s) {
                continue;
            }
            let u = self.compute_u(&mask);
            let val = self.quotient(self.comm_sq_from_u(&u, &mask), mass_s);
            if best.as_ref().is_none_or(|(b, _)| val < *b) {
                best = Some((val, mask));
            }
        }
        Ok(best)
    }

    /// Steepest-descent polish of one seed.
    fn descend(&mut self, seed_mask: SubsetMask) -> Option<(f64, SubsetMask)> {
        let mut mask = seed_mask;
        let mut u = self.compute_u(&mask);
        let mut mass_s = self.mass(&mask);
        self.evals += 1;
        if !self.admissible(mass_s) {
            return None;
        }
        let mut current = self.quotient(self.comm_sq_from_u(&u, &mask), mass_s);
        loop {
            if self.evals >= self.budget {
                break;
            }
            let mut best_q: Option<(usize, f64)> = None;
            for q in 0..self.m {
                if self.evals >= self.budget {
                    break;
                }
                self.evals += 1;
                let entering = !mask.get(q);
                let sign = if entering { 1.0 } else { -1.0 };
                let new_mass = mass_s + sign * self.energy[q];
                if !self.admissible(new_mass) {
                    continue;
                }
                let c = self.mu[q] * self.fld.values()[q];
                let mut comm = 0.0;
                for p in 0..self.m {
                    let up = u[p] + sign * c * self.k_entry(p, q);
                    let in_s = if p == q { entering } else { mask.get(p) };
                    if in_s {
                        comm += self.mu[p] * (self.kf[p] - up).norm_sqr();
                    } else {
                        comm += self.mu[p] * up.norm_sqr();
                    }
                }
                let val = self.quotient(comm, new_mass);
                if val < current - 1e-15 * (1.0 + current)
                    && best_q.as_ref().is_none_or(|(_, b)| val < *b)
                {
                    best_q = Some((q, val));
                }
            }
            match best_q {
                None => break,
                Some((q, val)) => {
                    let entering = !mask.get(q);
                    let sign = if entering { 1.0 } else { -1.0 };
                    let c = self.mu[q] * self.fld.values()[q];
                    if c != Complex64::ZERO {
                        for (p, uv) in u.iter_mut().enumerate() {
                            *uv += sign * c * self.k_entry(p, q);
                        }
                    }
                    mass_s += sign * self.energy[q];
                    mask.flip(q);
                    current = val;
                }
            }
        }
        Some((current, mask))
    }

    /// Local search: 32 random restarts plus structured seeds (spatial
    /// windows and label slabs), steepest descent under the budget.
    fn local_search(&mut self, seed: u64) -> Result<Option<(f64, SubsetMask)>> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut seeds: Vec<SubsetMask> = Vec::new();
        // spatial half-windows at a few cyclic offsets
        let step = (self.n / 16).max(1);
        let mut off = 0;
        while off < self.n {
            let mut bits = vec![false; self.m];
            for dx in 0..self.n / 2 {
                let x = (off + dx) % self.n;
                for l in 0..self.nl {
                    bits[x * self.nl + l] = true;
                }
            }
            seeds.push(SubsetMask::from_bits(bits));
            off += step;
        }
        // single-label slabs
        for l in 0..self.nl {
            seeds.push(SubsetMask::product(self.n, self.nl, &[l])?);
        }
        // random restarts
        for _ in 0..32 {
            let bits: Vec<bool> = (0..self.m).map(|_| rng.random::<bool>()).collect();
            seeds.push(SubsetMask::from_bits(bits));
        }

        // rank seeds by their fresh quotient, then polish the best few
        let mut ranked: Vec<(f64, usize)> = Vec::new();
        for (i, s) in seeds.iter().enumerate() {
            if self.evals >= self.budget {
                break;
            }
            if let Some(val) = self.eval(s) {
                ranked.push((val, i));
            }
        }
        ranked.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        let mut best: Option<(f64, SubsetMask)> = ranked.first().map(|&(v, i)| (v, seeds[i].clone()));
        for &(_, i) in ranked.iter().take(8) {
            if self.evals >= self.budget {
                break;
            }
            if let Some((val, mask)) = self.descend(seeds[i].clone()) {
                if best.as_ref().is_none_or(|(b, _)| val < *b) {
                    best = Some((val, mask));
                }
            }
        }
        Ok(best)
    }
}

/// Kernel Cheeger constant of `fld` with the requested search strategy.
/// When no admissible subset exists the value is 1 by convention and the
/// witness is absent.
pub fn kernel_cheeger(
    bank: &FilterBank,
    fld: &CoefficientField,
    strategy: Strategy,
    budget: u64,
    seed: u64,
) -> Result<CheegerResult> {
    let m = bank.n() * bank.len();
    if fld.num_points() != m {
        return Err(Error::DimensionMismatch { expected: m, got: fld.num_points() });
    }
    if fld.norm_sq() == 0.0 {
        return Err(Error::UndefinedInput("kernel Cheeger constant of the zero field".into()));
    }
    let mut ctx = SearchCtx::new(bank, fld, budget)?;
    let found = match strategy {
        Strategy::Exhaustive => ctx.exhaustive()?,
        Strategy::ProductSets => ctx.product_sets()?,
        Strategy::LocalSearch => ctx.local_search(seed)?,
    };
    Ok(match found {
        Some((value, witness)) => CheegerResult {
            value,
            witness: Some(witness),
            strategy,
            certified: strategy == Strategy::Exhaustive,
        },
        None => CheegerResult {
            value: 1.0,
            witness: None,
            strategy,
            certified: strategy == Strategy::Exhaustive,
        },
    })
}

/// Quotient of the defining infimand at one mask: commutator energy over
/// the smaller masked energy. `None` when the mask is inadmissible.
pub fn cheeger_quotient(
    bank: &FilterBank,
    fld: &CoefficientField,
    mask: &SubsetMask,
) -> Result<Option<f64>> {
    check_mask(bank, fld, mask)?;
    let mut ctx = SearchCtx::new(bank, fld, u64::MAX)?;
    Ok(ctx.eval(mask))
}

/// G_S := K(P_S F − P_{S^c} F); requires F to lie in the kernel range.
pub fn build_test_function(
    bank: &FilterBank,
    fld: &CoefficientField,
    mask: &SubsetMask,
) -> Result<CoefficientField> {
    check_mask(bank, fld, mask)?;
    let kf = transform::apply_kernel(bank, fld)?;
    let defect = kf.sub(fld)?.norm();
    let scale = fld.norm();
    if defect > 1e-9 * scale {
        return Err(Error::NotInRkhs { defect: defect / scale });
    }
    let mut signed = fld.clone();
    for (p, v) in signed.values_mut().iter_mut().enumerate() {
        if !mask.get(p) {
            *v = -*v;
        }
    }
    transform::apply_kernel(bank, &signed)
}

/// Both sides of the two test-function identities:
/// (i)  ‖|F|−|G_S|‖² ≤ 4‖[K,P_S]F‖²
/// (ii) inf_α‖F−αG_S‖² = 4·(min(‖P_S F‖²,‖P_{S^c}F‖²) − ‖[K,P_S]F‖²)
#[derive(Debug, Clone, Serialize)]
pub struct GsIdentities {
    pub lemma_i_lhs: f64,
    pub lemma_i_rhs: f64,
    pub lemma_ii_lhs: f64,
    pub lemma_ii_rhs: f64,
}

pub fn verify_gs_identities(
    bank: &FilterBank,
    fld: &CoefficientField,
    mask: &SubsetMask,
) -> Result<GsIdentities> {
    let gs = build_test_function(bank, fld, mask)?;
    let comm = commutator_norm_sq(bank, fld, mask)?;
    let mass_s = mask_field(fld, mask, true).norm_sq();
    let mass_sc = fld.norm_sq() - mass_s;
    Ok(GsIdentities {
        lemma_i_lhs: fld.modulus_distance(&gs)?.powi(2),
        lemma_i_rhs: 4.0 * comm,
        lemma_ii_lhs: fld.phase_min_dist_sq(&gs, bank.field())?,
        lemma_ii_rhs: 4.0 * (mass_s.min(mass_sc) - comm),
    })
}

/// Lower bound on the local stability constant: √(1/ℭ − 1); +∞ at ℭ = 0.
pub fn stability_lower_bound(cheeger_value: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&cheeger_value) {
        return Err(Error::InvalidValue(format!(
            "Cheeger value must lie in [0,1], got {cheeger_value}"
        )));
    }
    if cheeger_value == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((1.0 / cheeger_value - 1.0).max(0.0).sqrt())
}

/// Real-field upper bound on the local stability constant:
/// 2√(1/ℭ − 1) + 1; +∞ at ℭ = 0. Only valid for the real scalar field.
pub fn stability_upper_bound_real(cheeger_value: f64, field: Field) -> Result<f64> {
    if field != Field::Real {
        return Err(Error::InapplicableBound(
            "the sign-retrieval upper bound requires the real scalar field".into(),
        ));
    }
    if !(0.0..=1.0).contains(&cheeger_value) {
        return Err(Error::InvalidValue(format!(
            "Cheeger value must lie in [0,1], got {cheeger_value}"
        )));
    }
    if cheeger_value == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(2.0 * (1.0 / cheeger_value - 1.0).max(0.0).sqrt() + 1.0)
}

/// Symmetric nonnegative weight on X×X with its uniform L¹ bound
/// (computed against the measure weights of the points).
#[derive(Debug, Clone)]
pub struct Weight {
    m: usize,
    omega: Vec<f64>,
    row_sums: Vec<f64>,
    uniform_l1: f64,
}

impl Weight {
    pub fn new(m: usize, omega: Vec<f64>, mu: &[f64]) -> Result<Self> {
        if omega.len() != m * m || mu.len() != m {
            return Err(Error::DimensionMismatch { expected: m * m, got: omega.len() });
        }
        let scale = omega.iter().cloned().fold(0.0f64, f64::max).max(1.0);
        for p in 0..m {
            for q in 0..m {
                let v = omega[p * m + q];
                if v < 0.0 || !v.is_finite() {
                    return Err(Error::InvalidValue("weight entries must be finite and ≥ 0".into()));
                }
                if (v - omega[q * m + p]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidValue(format!("weight is not symmetric at ({p},{q})")));
                }
            }
        }
        let row_sums: Vec<f64> =
            (0..m).map(|y| (0..m).map(|x| mu[x] * omega[x * m + y]).sum()).collect();
        let uniform_l1 = row_sums.iter().cloned().fold(0.0, f64::max);
        if uniform_l1 == 0.0 {
            return Err(Error::InvalidValue("weight has empty support".into()));
        }
        Ok(Self { m, omega, row_sums, uniform_l1 })
    }

    /// ω = |k_Ψ| pointwise, built from the dense kernel matrix.
    pub fn from_kernel_modulus(bank: &FilterBank) -> Result<Self> {
        let m = bank.n() * bank.len();
        let dense = transform::dense_kernel_matrix(bank);
        let omega: Vec<f64> = dense.iter().map(|v| v.norm()).collect();
        let mu: Vec<f64> = (0..m).map(|p| bank.nu()[p % bank.len()]).collect();
        Self::new(m, omega, &mu)
    }

    pub fn uniform_l1(&self) -> f64 {
        self.uniform_l1
    }

    #[inline]
    pub fn at(&self, p: usize, q: usize) -> f64 {
        self.omega[p * self.m + q]
    }
}

struct WeightedCtx<'a> {
    m: usize,
    mu: Vec<f64>,
    energy: Vec<f64>, // μ_y |F_y|²
    weight: &'a Weight,
    total_weighted: f64,
    floor: f64,
    evals: u64,
    budget: u64,
}

impl<'a> WeightedCtx<'a> {
    fn new(fld: &CoefficientField, weight: &'a Weight, budget: u64) -> Result<Self> {
        let m = fld.num_points();
        if weight.m != m {
            return Err(Error::DimensionMismatch { expected: m, got: weight.m });
        }
        let nl = fld.num_labels();
        let mu: Vec<f64> = (0..m).map(|p| fld.nu()[p % nl]).collect();
        let energy: Vec<f64> = (0..m).map(|p| mu[p] * fld.values()[p].norm_sqr()).collect();
        let total_weighted: f64 = (0..m).map(|y| energy[y] * weight.row_sums[y]).sum();
        Ok(Self {
            m,
            mu,
            energy,
            weight,
            total_weighted,
            floor: (ADMISSIBILITY_FLOOR * ADMISSIBILITY_FLOOR) * total_weighted,
            evals: 0,
            budget,
        })
    }

    /// numerator and S-side weighted mass, given σ_y = Σ_{x∈S} μ_x ω(x,y)
    fn num_and_mass(&self, sigma: &[f64], mask: &SubsetMask) -> (f64, f64) {
        let mut num = 0.0;
        let mut mass_s = 0.0;
        for y in 0..self.m {
            if mask.get(y) {
                num += self.energy[y] * (self.weight.row_sums[y] - sigma[y]);
                mass_s += self.energy[y] * self.weight.row_sums[y];
            } else {
                num += self.energy[y] * sigma[y];
            }
        }
        (num, mass_s)
    }

    fn sigma(&self, mask: &SubsetMask) -> Vec<f64> {
        let mut sigma = vec![0.0; self.m];
        for x in 0..self.m {
            if mask.get(x) {
                for (y, s) in sigma.iter_mut().enumerate() {
                    *s += self.mu[x] * self.weight.at(x, y);
                }
            }
        }
        sigma
    }

    fn admissible(&self, mass_s: f64) -> bool {
        mass_s > self.floor && (self.total_weighted - mass_s) > self.floor
    }

    fn quotient(&self, num: f64, mass_s: f64) -> f64 {
        num / mass_s.min(self.total_weighted - mass_s)
    }

    fn eval(&mut self, mask: &SubsetMask) -> Option<f64> {
        self.evals += 1;
        let sigma = self.sigma(mask);
        let (num, mass) = self.num_and_mass(&sigma, mask);
        if !self.admissible(mass) {
            return None;
        }
        Some(self.quotient(num, mass))
    }

    fn exhaustive(&mut self) -> Result<Option<(f64, SubsetMask)>> {
        if self.m > EXHAUSTIVE_CAP_BITS {
            return Err(Error::BudgetExceeded {
                needed: 1u64 << (self.m.min(63) - 1),
                cap: 1u64 << (EXHAUSTIVE_CAP_BITS - 1),
            });
        }
        let steps: u64 = 1u64 << (self.m - 1);
        if steps > self.budget {
            return Err(Error::BudgetExceeded { needed: steps, cap: self.budget });
        }
        let mut mask = SubsetMask::empty(self.m);
        let mut sigma = vec![0.0f64; self.m];
        let mut best: Option<(f64, SubsetMask)> = None;
        for i in 1..steps {
            let q = i.trailing_zeros() as usize;
            let entering = !mask.get(q);
            mask.flip(q);
            let sign = if entering { 1.0 } else { -1.0 };
            for (y, s) in sigma.iter_mut().enumerate() {
                *s += sign * self.mu[q] * self.weight.at(q, y);
            }
            self.evals += 1;
            let (num, mass) = self.num_and_mass(&sigma, &mask);
            if !self.admissible(mass) {
                continue;
            }
            let val = self.quotient(num, mass);
            if best.as_ref().is_none_or(|(b, _)| val < *b) {
                best = Some((val, mask.clone()));
            }
        }
        if let Some((_, mask)) = &best {
            let mask = mask.clone();
            let val = self.eval(&mask).expect("witness stays admissible");
            return Ok(Some((val, mask)));
        }
        Ok(None)
    }

    fn local_search(&mut self, seed: u64) -> Option<(f64, SubsetMask)> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut best: Option<(f64, SubsetMask)> = None;
        for _ in 0..32 {
            if self.evals >= self.budget {
                break;
            }
            let mut mask = SubsetMask::from_bits((0..self.m).map(|_| rng.random::<bool>()).collect());
            let mut sigma = self.sigma(&mask);
            let (num, mass) = self.num_and_mass(&sigma, &mask);
            self.evals += 1;
            if !self.admissible(mass) {
                continue;
            }
            let mut current = self.quotient(num, mass);
            loop {
                if self.evals >= self.budget {
                    break;
                }
                let mut best_q: Option<(usize, f64)> = None;
                for q in 0..self.m {
                    self.evals += 1;
                    let entering = !mask.get(q);
                    mask.set(q, entering);
                    let sign = if entering { 1.0 } else { -1.0 };
                    for (y, s) in sigma.iter_mut().enumerate() {
                        *s += sign * self.mu[q] * self.weight.at(q, y);
                    }
                    let (num, mass) = self.num_and_mass(&sigma, &mask);
                    if self.admissible(mass) {
                        let val = self.quotient(num, mass);
                        if val < current - 1e-15 * (1.0 + current)
                            && best_q.as_ref().is_none_or(|(_, b)| val < *b)
                        {
                            best_q = Some((q, val));
                        }
                    }
                    // undo
                    mask.set(q, !entering);
                    for (y, s) in sigma.iter_mut().enumerate() {
                        *s -= sign * self.mu[q] * self.weight.at(q, y);
                    }
                }
                match best_q {
                    None => break,
                    Some((q, val)) => {
                        let entering = !mask.get(q);
                        mask.set(q, entering);
                        let sign = if entering { 1.0 } else { -1.0 };
                        for (y, s) in sigma.iter_mut().enumerate() {
                            *s += sign * self.mu[q] * self.weight.at(q, y);
                        }
                        current = val;
                    }
                }
            }
            if best.as_ref().is_none_or(|(b, _)| current < *b) {
                best = Some((current, mask));
            }
        }
        best
    }
}

/// Weighted kernel Cheeger constant ℭ_{F,ω}; depends on |F| only. When no
/// admissible subset exists the value is ‖ω‖_{L∞(L¹)}^{−2} by convention.
pub fn weighted_kernel_cheeger(
    fld: &CoefficientField,
    weight: &Weight,
    strategy: Strategy,
    budget: u64,
    seed: u64,
) -> Result<CheegerResult> {
    if fld.norm_sq() == 0.0 {
        return Err(Error::UndefinedInput("weighted Cheeger constant of the zero field".into()));
    }
    let mut ctx = WeightedCtx::new(fld, weight, budget)?;
    let found = match strategy {
        Strategy::Exhaustive => ctx.exhaustive()?,
        Strategy::ProductSets => {
            return Err(Error::InvalidValue(
                "product-set search is defined for the kernel Cheeger constant only".into(),
            ))
        }
        Strategy::LocalSearch => ctx.local_search(seed),
    };
    Ok(match found {
        Some((value, witness)) => CheegerResult {
            value,
            witness: Some(witness),
            strategy,
            certified: strategy == Strategy::Exhaustive,
        },
        None => CheegerResult {
            value: weight.uniform_l1().powi(-2),
            witness: None,
            strategy,
            certified: strategy == Strategy::Exhaustive,
        },
    })
}

/// S := {p : F(p)·H(p) ≥ 0}; zeros count as aligned. Real field only.
pub fn sign_alignment_mask(
    fld: &CoefficientField,
    h: &CoefficientField,
    field: Field,
) -> Result<SubsetMask> {
    if field != Field::Real {
        return Err(Error::InapplicableBound(
            "sign alignment requires the real scalar field".into(),
        ));
    }
    if !fld.same_shape(h) {
        return Err(Error::DimensionMismatch { expected: fld.num_points(), got: h.num_points() });
    }
    let bits = fld
        .values()
        .iter()
        .zip(h.values())
        .map(|(a, b)| a.re * b.re >= 0.0)
        .collect();
    Ok(SubsetMask::from_bits(bits))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic::Signal;
    use crate::transform::{analyze, random_field};
    use rand::Rng;

    fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
        rand_chacha::ChaCha8Rng::seed_from_u64(seed)
    }

    fn rkhs_field(bank: &FilterBank, seed: u64) -> CoefficientField {
        let mut r = rng(seed);
        let f = Signal::random(bank.n(), bank.field(), &mut r);
        analyze(bank, &f).unwrap()
    }

    fn random_mask(m: usize, r: &mut impl Rng) -> SubsetMask {
        SubsetMask::from_bits((0..m).map(|_| r.random::<bool>()).collect())
    }

    #[test]
    fn mask_hex_round_trip() {
        let mut r = rng(1);
        for len in [1usize, 7, 8, 9, 20, 64] {
            let mask = random_mask(len, &mut r);
            let hex = mask.to_hex();
            let back = SubsetMask::from_hex(&hex, len).unwrap();
            assert_eq!(mask, back);
        }
        assert_eq!(
            SubsetMask::from_indices(4, &[0]).unwrap().complement().complement(),
            SubsetMask::from_indices(4, &[0]).unwrap()
        );
    }

    #[test]
    fn commutator_vanishes_on_trivial_masks() {
        let bank = FilterBank::smooth(6, 3, Field::Real).unwrap();
        let fld = rkhs_field(&bank, 2);
        let m = fld.num_points();
        let c0 = commutator_norm_sq(&bank, &fld, &SubsetMask::empty(m)).unwrap();
        let c1 = commutator_norm_sq(&bank, &fld, &SubsetMask::full(m)).unwrap();
        assert!(c0 <= 1e-18 * fld.norm_sq());
        assert!(c1 <= 1e-18 * fld.norm_sq());
    }

    #[test]
    fn commutator_complement_symmetry_and_direct_form() {
        let bank = FilterBank::smooth(6, 3, Field::Complex).unwrap();
        let fld = rkhs_field(&bank, 3);
        let mut r = rng(4);
        for _ in 0..10 {
            let mask = random_mask(fld.num_points(), &mut r);
            let a = commutator_norm_sq(&bank, &fld, &mask).unwrap();
            let b = commutator_norm_sq(&bank, &fld, &mask.complement()).unwrap();
            assert!((a - b).abs() <= 1e-12 * fld.norm_sq());
            let d = commutator_norm_sq_direct(&bank, &fld, &mask).unwrap();
            assert!((a - d).abs() <= 1e-9 * fld.norm_sq());
        }
    }

    #[test]
    fn disjoint_band_commutator_is_zero_on_slab() {
        let bank = FilterBank::shannon(8, true).unwrap();
        let f = bank.psi(0).add(&bank.psi(1)).unwrap();
        let fld = analyze(&bank, &f).unwrap();
        let slab = SubsetMask::product(8, bank.len(), &[0]).unwrap();
        let c = commutator_norm_sq(&bank, &fld, &slab).unwrap();
        assert!(c <= 1e-20 * fld.norm_sq());
    }

    #[test]
    fn kernel_cheeger_disjoint_two_band_vanishes() {
        let bank = FilterBank::shannon(8, true).unwrap(); // m = 24
        let f = bank.psi(0).add(&bank.psi(1)).unwrap();
        let fld = analyze(&bank, &f).unwrap();
        let res = kernel_cheeger(&bank, &fld, Strategy::Exhaustive, DEFAULT_BUDGET, 0).unwrap();
        assert!(res.certified);
        assert!(res.value <= 1e-18);
        // the witness separates the two active slabs
        let witness = res.witness.unwrap();
        let floor = 1e-9 * fld.norm();
        let mut sides = std::collections::BTreeMap::new();
        for p in 0..fld.num_points() {
            if fld.values()[p].norm() > floor {
                sides.entry(p % bank.len()).or_insert_with(Vec::new).push(witness.get(p));
            }
        }
        let band_sides: Vec<bool> = sides
            .into_iter()
            .map(|(_, v)| {
                assert!(v.iter().all(|&b| b == v[0]), "active slab split by witness");
                v[0]
            })
            .collect();
        assert_eq!(band_sides.len(), 2);
        assert_ne!(band_sides[0], band_sides[1]);
    }

    #[test]
    fn kernel_cheeger_single_point_support_convention() {
        let bank = FilterBank::smooth(4, 3, Field::Real).unwrap();
        let mut fld = CoefficientField::zero_like(&rkhs_field(&bank, 5));
        fld.values_mut()[5] = Complex64::new(2.0, 0.0);
        let res = kernel_cheeger(&bank, &fld, Strategy::Exhaustive, DEFAULT_BUDGET, 0).unwrap();
        assert_eq!(res.value, 1.0);
        assert!(res.witness.is_none());
        assert!(res.certified);
    }

    #[test]
    fn kernel_cheeger_zero_field_rejected() {
        let bank = FilterBank::smooth(4, 3, Field::Real).unwrap();
        let fld = CoefficientField::zero_like(&rkhs_field(&bank, 5));
        assert!(matches!(
            kernel_cheeger(&bank, &fld, Strategy::Exhaustive, DEFAULT_BUDGET, 0),
            Err(Error::UndefinedInput(_))
        ));
    }

    #[test]
    fn restricted_searches_upper_bound_exhaustive() {
        let bank = FilterBank::smooth(5, 4, Field::Real).unwrap(); // m = 20
        let fld = rkhs_field(&bank, 7);
        let exact = kernel_cheeger(&bank, &fld, Strategy::Exhaustive, DEFAULT_BUDGET, 0).unwrap();
        let local = kernel_cheeger(&bank, &fld, Strategy::LocalSearch, 200_000, 11).unwrap();
        let product = kernel_cheeger(&bank, &fld, Strategy::ProductSets, DEFAULT_BUDGET, 0).unwrap();
        assert!(!local.certified);
        assert!(local.value >= exact.value - 1e-12);
        assert!(product.value >= exact.value - 1e-12);
    }

    #[test]
    fn exhaustive_cap_is_enforced() {
        let bank = FilterBank::shannon(16, true).unwrap(); // m = 64
        let fld = rkhs_field(&bank, 8);
        assert!(matches!(
            kernel_cheeger(&bank, &fld, Strategy::Exhaustive, DEFAULT_BUDGET, 0),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn witness_quotient_matches_reported_value() {
        let bank = FilterBank::smooth(5, 4, Field::Complex).unwrap();
        let fld = rkhs_field(&bank, 9);
        let res = kernel_cheeger(&bank, &fld, Strategy::Exhaustive, DEFAULT_BUDGET, 0).unwrap();
        let witness = res.witness.as_ref().unwrap();
        let again = cheeger_quotient(&bank, &fld, witness).unwrap().unwrap();
        assert!((again - res.value).abs() <= 1e-12 * (1.0 + res.value));
    }

    #[test]
    fn scale_invariance_of_kernel_cheeger() {
        let bank = FilterBank::smooth(5, 4, Field::Real).unwrap();
        let fld = rkhs_field(&bank, 10);
        let scaled = fld.scaled(Complex64::new(-3.7, 0.0));
        let a = kernel_cheeger(&bank, &fld, Strategy::Exhaustive, DEFAULT_BUDGET, 0).unwrap();
        let b = kernel_cheeger(&bank, &scaled, Strategy::Exhaustive, DEFAULT_BUDGET, 0).unwrap();
        assert!((a.value - b.value).abs() <= 1e-12 * (1.0 + a.value));
    }

    #[test]
    fn test_function_endpoints() {
        let bank = FilterBank::smooth(6, 3, Field::Real).unwrap();
        let fld = rkhs_field(&bank, 11);
        let m = fld.num_points();
        let gs_full = build_test_function(&bank, &fld, &SubsetMask::full(m)).unwrap();
        assert!(gs_full.sub(&fld).unwrap().norm() <= 1e-10 * fld.norm());
        let gs_empty = build_test_function(&bank, &fld, &SubsetMask::empty(m)).unwrap();
        assert!(gs_empty.add(&fld).unwrap().norm() <= 1e-10 * fld.norm());

        // a raw random field is rejected
        let mut r = rng(12);
        let raw = random_field(&bank, &mut r);
        assert!(matches!(
            build_test_function(&bank, &raw, &SubsetMask::full(m)),
            Err(Error::NotInRkhs { .. })
        ));
    }

    #[test]
    fn gs_identities_hold_on_random_sweep() {
        let bank = FilterBank::smooth(5, 4, Field::Complex).unwrap();
        let mut r = rng(13);
        for trial in 0..8 {
            let fld = rkhs_field(&bank, 100 + trial);
            let mask = random_mask(fld.num_points(), &mut r);
            let ids = verify_gs_identities(&bank, &fld, &mask).unwrap();
            let scale = fld.norm_sq();
            assert!(ids.lemma_i_lhs <= ids.lemma_i_rhs + 1e-9 * scale);
            assert!((ids.lemma_ii_lhs - ids.lemma_ii_rhs).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn gs_identities_zero_commutator_case() {
        let bank = FilterBank::shannon(8, true).unwrap();
        let f = bank.psi(0).add(&bank.psi(1)).unwrap();
        let fld = analyze(&bank, &f).unwrap();
        let slab = SubsetMask::product(8, bank.len(), &[0]).unwrap();
        let ids = verify_gs_identities(&bank, &fld, &slab).unwrap();
        let mass_s = mask_field(&fld, &slab, true).norm_sq();
        let mass_sc = fld.norm_sq() - mass_s;
        assert!(ids.lemma_i_lhs <= 1e-18 * fld.norm_sq());
        assert!((ids.lemma_ii_lhs - 4.0 * mass_s.min(mass_sc)).abs() <= 1e-9 * fld.norm_sq());
    }

    #[test]
    fn bound_arithmetic() {
        assert_eq!(stability_lower_bound(1.0).unwrap(), 0.0);
        assert!((stability_lower_bound(0.5).unwrap() - 1.0).abs() <= 1e-15);
        assert!(stability_lower_bound(0.0).unwrap().is_infinite());
        assert!(stability_lower_bound(1.5).is_err());

        assert_eq!(stability_upper_bound_real(1.0, Field::Real).unwrap(), 1.0);
        assert!((stability_upper_bound_real(0.5, Field::Real).unwrap() - 3.0).abs() <= 1e-15);
        assert!(stability_upper_bound_real(0.0, Field::Real).unwrap().is_infinite());
        assert!(matches!(
            stability_upper_bound_real(0.5, Field::Complex),
            Err(Error::InapplicableBound(_))
        ));
    }

    #[test]
    fn weighted_cheeger_against_kernel_modulus() {
        // ℭ_F ≤ ‖ω‖² ℭ_{F,ω} for ω = |k|
        let bank = FilterBank::smooth(4, 3, Field::Real).unwrap(); // m = 12
        let weight = Weight::from_kernel_modulus(&bank).unwrap();
        for seed in 0..4 {
            let fld = rkhs_field(&bank, 200 + seed);
            let plain = kernel_cheeger(&bank, &fld, Strategy::Exhaustive, DEFAULT_BUDGET, 0).unwrap();
            let weighted =
                weighted_kernel_cheeger(&fld, &weight, Strategy::Exhaustive, DEFAULT_BUDGET, 0)
                    .unwrap();
            assert!(
                plain.value <= weight.uniform_l1().powi(2) * weighted.value + 1e-9,
                "seed {seed}: {} vs {}",
                plain.value,
                weight.uniform_l1().powi(2) * weighted.value
            );
        }
    }

    #[test]
    fn weighted_cheeger_depends_only_on_modulus() {
        let bank = FilterBank::smooth(4, 3, Field::Complex).unwrap();
        let weight = Weight::from_kernel_modulus(&bank).unwrap();
        let fld = rkhs_field(&bank, 300);
        let a =
            weighted_kernel_cheeger(&fld, &weight, Strategy::Exhaustive, DEFAULT_BUDGET, 0).unwrap();
        let b = weighted_kernel_cheeger(&fld.modulus(), &weight, Strategy::Exhaustive, DEFAULT_BUDGET, 0)
            .unwrap();
        assert!((a.value - b.value).abs() <= 1e-12 * (1.0 + a.value));
    }

    #[test]
    fn weight_validation() {
        let mu = vec![1.0; 2];
        assert!(Weight::new(2, vec![0.0, 1.0, 0.5, 0.0], &mu).is_err()); // asymmetric
        assert!(Weight::new(2, vec![0.0, -1.0, -1.0, 0.0], &mu).is_err()); // negative
        assert!(Weight::new(2, vec![0.0; 4], &mu).is_err()); // empty support
        assert!(Weight::new(2, vec![0.0, 1.0, 1.0, 0.0], &mu).is_ok());
    }

    #[test]
    fn sign_alignment_masks() {
        let bank = FilterBank::smooth(6, 3, Field::Real).unwrap();
        let fld = rkhs_field(&bank, 400);
        let s = sign_alignment_mask(&fld, &fld, Field::Real).unwrap();
        assert_eq!(s.count_ones(), fld.num_points());
        let neg = fld.scaled(Complex64::new(-1.0, 0.0));
        let s = sign_alignment_mask(&fld, &neg, Field::Real).unwrap();
        for p in 0..fld.num_points() {
            assert_eq!(s.get(p), fld.values()[p].re == 0.0);
        }
        assert!(sign_alignment_mask(&fld, &fld, Field::Complex).is_err());
    }

    #[test]
    fn sign_alignment_commutator_bound() {
        // ‖[K,P_S]F‖ ≤ ‖|F|−|H|‖ at the alignment mask, real field
        let bank = FilterBank::smooth(6, 4, Field::Real).unwrap();
        for seed in 0..6 {
            let fld = rkhs_field(&bank, 500 + seed);
            let h = rkhs_field(&bank, 600 + seed);
            let s = sign_alignment_mask(&fld, &h, Field::Real).unwrap();
            let comm = commutator_norm_sq(&bank, &fld, &s).unwrap().sqrt();
            let gap = fld.modulus_distance(&h).unwrap();
            assert!(comm <= gap + 1e-9 * fld.norm(), "seed {seed}: {comm} vs {gap}");
        }
    }

    #[test]
    fn real_upper_bound_end_to_end() {
        let bank = FilterBank::smooth(5, 4, Field::Real).unwrap();
        let fld = rkhs_field(&bank, 700);
        let cheeger = kernel_cheeger(&bank, &fld, Strategy::Exhaustive, DEFAULT_BUDGET, 0).unwrap();
        let bound = stability_upper_bound_real(cheeger.value, Field::Real).unwrap();
        let mut r = rng(701);
        for _ in 0..50 {
            let h = analyze(&bank, &Signal::random(5, Field::Real, &mut r)).unwrap();
            let lhs = fld.phase_min_dist_sq(&h, Field::Real).unwrap().sqrt();
            let rhs = bound * fld.modulus_distance(&h).unwrap() + 1e-9;
            assert!(lhs <= rhs, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn witness_inequality_from_certified_search() {
        // at the certified witness, G_S achieves quotient ≥ √(1/ℭ − 1)
        let bank = FilterBank::smooth(5, 4, Field::Real).unwrap();
        for seed in 0..4 {
            let fld = rkhs_field(&bank, 800 + seed);
            let res = kernel_cheeger(&bank, &fld, Strategy::Exhaustive, DEFAULT_BUDGET, 0).unwrap();
            if res.value <= 0.0 || res.value >= 1.0 {
                continue;
            }
            let witness = res.witness.as_ref().unwrap();
            let ids = verify_gs_identities(&bank, &fld, witness).unwrap();
            let denom = ids.lemma_i_lhs.sqrt();
            let quotient = if denom > 1e-12 * fld.norm() {
                ids.lemma_ii_lhs.sqrt() / denom
            } else {
                f64::INFINITY
            };
            let target = stability_lower_bound(res.value).unwrap();
            assert!(quotient >= target - 1e-6, "seed {seed}: {quotient} vs {target}");
        }
    }
}
