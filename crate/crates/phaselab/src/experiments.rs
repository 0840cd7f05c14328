//! Scripted reproductions of the qualitative stability phenomena:
//! Monte-Carlo lower estimation of the local stability constant,
//! separation-induced collapse of the kernel Cheeger constant under
//! growing shifts (while the graph Cheeger constant persists), and
//! two-bump instability witnesses at growing order.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};

use crate::ambiguity::{self, AmbiguitySpec};
use crate::cheeger_graph::{self, DEFAULT_POSITIVITY_TOL};
use crate::cheeger_kernel::{self, Strategy, SubsetMask};
use crate::error::{Error, Result};
use crate::filterbank::FilterBank;
use crate::harmonic::{self, Field, Signal};
use crate::transform::{self, CoefficientField};

/// A bound that may be infinite (degenerate Cheeger value) or unavailable
/// (the method does not apply or is not certified on this instance).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundValue {
    Finite(f64),
    Infinite,
    Unavailable,
}

impl BoundValue {
    pub fn from_value(v: f64) -> Self {
        if v.is_finite() {
            BoundValue::Finite(v)
        } else {
            BoundValue::Infinite
        }
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            BoundValue::Finite(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, BoundValue::Infinite)
    }
}

/// Certified bracket for the local stability constant plus the best
/// sampled lower estimate and the pair that achieved it.
#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub cheeger: f64,
    pub cheeger_certified: bool,
    pub lower_bound: BoundValue,
    pub upper_bound: BoundValue,
    pub empirical_lower: f64,
    pub witness_kind: String,
    pub witness_pair: Option<(CoefficientField, CoefficientField)>,
    pub seed: u64,
}

/// min_α‖F−αG‖ / ‖|F|−|G|‖ with a denominator floor; `None` when the
/// moduli already agree to the floor.
pub fn stability_quotient(
    fld: &CoefficientField,
    g: &CoefficientField,
    field: Field,
) -> Result<Option<f64>> {
    let den = fld.modulus_distance(g)?;
    if den <= 1e-12 * fld.norm() {
        return Ok(None);
    }
    Ok(Some(fld.phase_min_dist_sq(g, field)?.sqrt() / den))
}

/// Best kernel Cheeger estimate within the size caps: exhaustive (and
/// certified) when |X| ≤ 24, otherwise the better of the product-set and
/// local-search values.
pub fn best_kernel_cheeger(
    bank: &FilterBank,
    fld: &CoefficientField,
    budget: u64,
    seed: u64,
) -> Result<cheeger_kernel::CheegerResult> {
    let m = bank.n() * bank.len();
    if m <= cheeger_kernel::EXHAUSTIVE_CAP_BITS && (1u64 << (m - 1)) <= budget {
        return cheeger_kernel::kernel_cheeger(bank, fld, Strategy::Exhaustive, budget, seed);
    }
    let product = cheeger_kernel::kernel_cheeger(bank, fld, Strategy::ProductSets, budget, seed)?;
    let local = cheeger_kernel::kernel_cheeger(bank, fld, Strategy::LocalSearch, budget, seed)?;
    Ok(if local.value <= product.value { local } else { product })
}

/// Monte-Carlo lower estimation of the local stability constant of
/// F = W_Ψ f, with certified bounds where available. Samples G from the
/// G_S family, from ambiguity-adjacent perturbations, and from random
/// kernel-range elements near F.
pub fn empirical_stability(
    bank: &FilterBank,
    f: &Signal,
    budget: u64,
    seed: u64,
) -> Result<StabilityReport> {
    if harmonic::norm_sq(f) == 0.0 {
        return Err(Error::UndefinedInput("stability of the zero signal".into()));
    }
    let fld = transform::analyze(bank, f)?;
    let m = fld.num_points();
    // `budget` caps the sampler; the Cheeger search keeps its own cap
    let search_budget = budget.max(cheeger_kernel::DEFAULT_BUDGET);
    let cheeger = best_kernel_cheeger(bank, &fld, search_budget, seed)?;

    let lower_bound = BoundValue::from_value(cheeger_kernel::stability_lower_bound(cheeger.value)?);
    let upper_bound = match bank.field() {
        Field::Real => {
            if cheeger.certified {
                BoundValue::from_value(cheeger_kernel::stability_upper_bound_real(
                    cheeger.value,
                    Field::Real,
                )?)
            } else {
                BoundValue::Unavailable
            }
        }
        Field::Complex => {
            match cheeger_graph::temporal_algebraic_connectivity(bank, f, DEFAULT_POSITIVITY_TOL) {
                Ok(t) => {
                    let graph = cheeger_graph::build_graph(bank, f, DEFAULT_POSITIVITY_TOL)?;
                    BoundValue::from_value(cheeger_graph::complex_upper_bound(graph.max_degree(), t))
                }
                Err(_) => BoundValue::Unavailable,
            }
        }
    };

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, String, CoefficientField)> = None;
    let mut consider = |q: Option<f64>, kind: &str, g: &CoefficientField, best: &mut Option<(f64, String, CoefficientField)>| {
        if let Some(q) = q {
            if best.as_ref().is_none_or(|(b, _, _)| q > *b) {
                *best = Some((q, kind.to_string(), g.clone()));
            }
        }
    };

    let samples = (budget / 3).max(8) as usize;

    // (a) G_S family: the search witness plus random masks
    let mut gs_masks: Vec<(String, SubsetMask)> = Vec::new();
    if let Some(w) = &cheeger.witness {
        gs_masks.push(("gs_witness".into(), w.clone()));
    }
    for i in 0..samples.min(64) {
        let bits: Vec<bool> = (0..m).map(|_| rng.random::<bool>()).collect();
        gs_masks.push((format!("gs_random_{i}"), SubsetMask::from_bits(bits)));
    }
    for (kind, mask) in &gs_masks {
        if let Ok(gs) = cheeger_kernel::build_test_function(bank, &fld, mask) {
            consider(stability_quotient(&fld, &gs, bank.field())?, kind, &gs, &mut best);
        }
    }

    // (b) ambiguity-adjacent perturbations when several classes exist
    let decomp = cheeger_graph::equivalence_decomposition(bank, f, DEFAULT_POSITIVITY_TOL)?;
    if decomp.classes.len() >= 2 {
        let parts = decomp.classes.clone();
        for i in 0..samples.min(32) {
            let signs: Vec<Complex64> = parts
                .iter()
                .map(|_| match bank.field() {
                    Field::Real => {
                        if rng.random::<bool>() {
                            Complex64::ONE
                        } else {
                            -Complex64::ONE
                        }
                    }
                    Field::Complex => {
                        Complex64::from_polar(1.0, rng.random::<f64>() * std::f64::consts::TAU)
                    }
                })
                .collect();
            let spec = AmbiguitySpec::new(parts.clone(), signs)?;
            let g = ambiguity::synthesize_ambiguity(bank, f, &spec, false)?;
            let eps = [1e-6, 1e-4, 1e-2][i % 3];
            let noise = Signal::random(bank.n(), bank.field(), &mut rng);
            let scale = eps * harmonic::norm(f) / harmonic::norm(&noise).max(f64::MIN_POSITIVE);
            let g_pert = g.add(&noise.scaled(Complex64::new(scale, 0.0)))?;
            let gg = transform::analyze(bank, &g_pert)?;
            consider(stability_quotient(&fld, &gg, bank.field())?, &format!("ambiguity_{i}"), &gg, &mut best);
        }
    }

    // (c) random kernel-range elements near F
    for i in 0..samples.min(64) {
        let delta = [1e-3, 1e-2, 0.1, 1.0][i % 4];
        let noise = Signal::random(bank.n(), bank.field(), &mut rng);
        let scale = delta * harmonic::norm(f) / harmonic::norm(&noise).max(f64::MIN_POSITIVE);
        let g = transform::analyze(bank, &f.add(&noise.scaled(Complex64::new(scale, 0.0)))?)?;
        consider(stability_quotient(&fld, &g, bank.field())?, &format!("nearby_{i}"), &g, &mut best);
    }

    let (empirical_lower, witness_kind, witness_g) = match best {
        Some((q, kind, g)) => (q, kind, Some(g)),
        None => (0.0, "none".to_string(), None),
    };
    Ok(StabilityReport {
        cheeger: cheeger.value,
        cheeger_certified: cheeger.certified,
        lower_bound,
        upper_bound,
        empirical_lower,
        witness_kind,
        witness_pair: witness_g.map(|g| (fld.clone(), g)),
        seed,
    })
}

/// One cell of the separation sweep.
#[derive(Debug, Clone)]
pub struct SweepRecord {
    pub shift: usize,
    pub kernel_cheeger: f64,
    pub kernel_certified: bool,
    pub graph_cheeger: f64,
    pub quotient_bound: f64,
    pub seed: u64,
}

/// For each shift x: the kernel Cheeger constant of W_Ψ(h+T_xh), the
/// graph Cheeger constant of G(h+T_xh), and the test-pair quotient
/// min_α‖W(h+T_xh) − α·W(h−T_xh)‖ / ‖|W(h+T_xh)| − |W(h−T_xh)|‖.
/// Requires a connected G(h).
pub fn separation_sweep(
    bank: &FilterBank,
    h: &Signal,
    shifts: &[usize],
    budget: u64,
    seed: u64,
) -> Result<Vec<SweepRecord>> {
    if shifts.is_empty() {
        return Err(Error::UndefinedInput("shift list is empty".into()));
    }
    let base_graph = cheeger_graph::build_graph(bank, h, DEFAULT_POSITIVITY_TOL)?;
    if base_graph.components().len() != 1 {
        return Err(Error::InvalidValue(
            "separation sweep requires a connected graph for the base signal".into(),
        ));
    }
    let mut records = Vec::with_capacity(shifts.len());
    for &shift in shifts {
        let shifted = harmonic::translate(h, shift);
        let f = h.add(&shifted)?;
        let g = h.sub(&shifted)?;
        let fld = transform::analyze(bank, &f)?;
        let kernel = best_kernel_cheeger(bank, &fld, budget, seed)?;
        let graph = cheeger_graph::build_graph(bank, &f, DEFAULT_POSITIVITY_TOL)?;
        let graph_res = cheeger_graph::graph_cheeger(&graph, Strategy::Exhaustive, budget, seed)?;
        let gld = transform::analyze(bank, &g)?;
        let quotient = stability_quotient(&fld, &gld, bank.field())?
            .unwrap_or(f64::INFINITY);
        records.push(SweepRecord {
            shift,
            kernel_cheeger: kernel.value,
            kernel_certified: kernel.certified,
            graph_cheeger: graph_res.value,
            quotient_bound: quotient,
            seed,
        });
    }
    Ok(records)
}

/// Spearman rank correlation of (x_i, y_i); used to test monotone trends.
pub fn spearman_rank_correlation(xs: &[f64], ys: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap());
        let mut r = vec![0.0; v.len()];
        for (rank, &i) in idx.iter().enumerate() {
            r[i] = rank as f64;
        }
        r
    }
    let rx = ranks(xs);
    let ry = ranks(ys);
    let n = xs.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        cov += (a - mx) * (b - my);
        vx += (a - mx) * (a - mx);
        vy += (b - my) * (b - my);
    }
    cov / (vx.sqrt() * vy.sqrt()).max(f64::MIN_POSITIVE)
}

pub fn separation_bump_width(n: usize) -> f64 {
    (n as f64 / 48.0).max(0.6)
}

/// Localized test bump for the separation experiments: a Gaussian of
/// effective support ≤ N/8 modulated to 3N/8, which keeps its spectrum
/// inside the high dyadic bands where the filters are spatially
/// concentrated (the low bands are delocalized on the circle and would
/// mask the separation effect).
pub fn separation_bump(n: usize) -> Result<Signal> {
    Signal::modulated_bump(n, 0, separation_bump_width(n), 3 * n / 8)
}

/// A normalized two-bump pair whose transform moduli nearly agree while
/// the signals stay far apart modulo phase.
#[derive(Debug, Clone)]
pub struct InstabilityWitness {
    pub n: usize,
    pub target_eps: f64,
    pub achieved_modulus_gap: f64,
    pub phase_distance: f64,
    pub met: bool,
    pub shift: usize,
    pub bump_width: f64,
}

/// Builds the maximal-separation two-bump pair h ± T_{N/2}h on an
/// overlapping Shannon bank of order `n` and measures the achieved
/// modulus gap against `eps`. Reports the best achieved gap either way.
pub fn instability_witness(n: usize, eps: f64) -> Result<InstabilityWitness> {
    let bank = FilterBank::overlapping_shannon(n, 0.25, true, false)?;
    let width = separation_bump_width(n);
    let h = separation_bump(n)?;
    let shift = n / 2;
    let shifted = harmonic::translate(&h, shift);
    let plus = h.add(&shifted)?;
    let minus = h.sub(&shifted)?;
    let fp = transform::analyze(&bank, &plus)?;
    let fm = transform::analyze(&bank, &minus)?;
    let fpn = fp.scaled(Complex64::new(1.0 / fp.norm(), 0.0));
    let fmn = fm.scaled(Complex64::new(1.0 / fm.norm(), 0.0));
    let achieved = fpn.modulus_distance(&fmn)?;
    let phase_distance = fpn.phase_min_dist_sq(&fmn, bank.field())?.sqrt();
    Ok(InstabilityWitness {
        n,
        target_eps: eps,
        achieved_modulus_gap: achieved,
        phase_distance,
        met: achieved <= eps && phase_distance >= 1.0,
        shift,
        bump_width: width,
    })
}
