//! Finite abelian harmonic analysis on the cyclic group Z_N.
//!
//! Conventions: counting measure on Z_N, unnormalized forward DFT
//! `f̂(ξ) = Σ_x f(x) e^{-2πi xξ/N}`, so Plancherel reads
//! `⟨f,g⟩ = (1/N)⟨f̂,ĝ⟩`. All operations are pure.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scalar field of a signal or filter family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

/// A complex-valued vector on Z_N together with its scalar-field flag.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    values: Vec<Complex64>,
    field: Field,
}

/// A complex-valued vector indexed by frequency ξ ∈ Z_N.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    values: Vec<Complex64>,
}

fn check_finite(values: &[Complex64]) -> Result<()> {
    for (i, v) in values.iter().enumerate() {
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::InvalidValue(format!("non-finite entry at index {i}")));
        }
    }
    Ok(())
}

impl Signal {
    /// Complex signal from raw values. Rejects non-finite entries.
    pub fn complex(values: Vec<Complex64>) -> Result<Self> {
        check_finite(&values)?;
        if values.is_empty() {
            return Err(Error::UnsupportedOrder("group order must be positive".into()));
        }
        Ok(Self { values, field: Field::Complex })
    }

    /// Real signal from real parts; imaginary parts are exactly zero.
    pub fn real(values: Vec<f64>) -> Result<Self> {
        let v: Vec<Complex64> = values.into_iter().map(|x| Complex64::new(x, 0.0)).collect();
        check_finite(&v)?;
        if v.is_empty() {
            return Err(Error::UnsupportedOrder("group order must be positive".into()));
        }
        Ok(Self { values: v, field: Field::Real })
    }

    /// Tag complex storage with an explicit field flag, enforcing the
    /// real-field invariant (imaginary parts exactly zero).
    pub fn with_field(values: Vec<Complex64>, field: Field) -> Result<Self> {
        check_finite(&values)?;
        if values.is_empty() {
            return Err(Error::UnsupportedOrder("group order must be positive".into()));
        }
        if field == Field::Real && values.iter().any(|v| v.im != 0.0) {
            return Err(Error::InvalidValue("real signal with nonzero imaginary part".into()));
        }
        Ok(Self { values, field })
    }

    /// Zero out imaginary parts that are below `tol` (absolute) and retag as
    /// real. Fails if any imaginary part exceeds the tolerance.
    pub fn realified(mut self, tol: f64) -> Result<Self> {
        for v in &mut self.values {
            if v.im.abs() > tol {
                return Err(Error::InvalidValue(format!(
                    "imaginary part {:.3e} exceeds realification tolerance {:.3e}",
                    v.im, tol
                )));
            }
            v.im = 0.0;
        }
        self.field = Field::Real;
        Ok(self)
    }

    pub fn delta(n: usize, pos: usize) -> Self {
        let mut values = vec![Complex64::ZERO; n];
        values[pos % n] = Complex64::ONE;
        Self { values, field: Field::Real }
    }

    pub fn zero(n: usize, field: Field) -> Self {
        Self { values: vec![Complex64::ZERO; n], field }
    }

    /// Periodized Gaussian bump centered at `center` with standard deviation
    /// `width` (in samples), unit L2 norm.
    pub fn gaussian_bump(n: usize, center: usize, width: f64) -> Result<Self> {
        if width <= 0.0 {
            return Err(Error::InvalidValue("bump width must be positive".into()));
        }
        let mut values = vec![0.0f64; n];
        for (x, v) in values.iter_mut().enumerate() {
            let mut d = (x as isize - center as isize).rem_euclid(n as isize) as f64;
            if d > n as f64 / 2.0 {
                d -= n as f64;
            }
            *v = (-0.5 * (d / width).powi(2)).exp();
        }
        let nrm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in &mut values {
            *v /= nrm;
        }
        Signal::real(values)
    }

    /// Gaussian bump modulated to carrier frequency `freq` (in bins),
    /// unit norm. Keeps the spectrum away from the low bands whose
    /// filters are spatially delocalized.
    pub fn modulated_bump(n: usize, center: usize, width: f64, freq: usize) -> Result<Self> {
        let bump = Self::gaussian_bump(n, center, width)?;
        let mut values: Vec<f64> = bump
            .values
            .iter()
            .enumerate()
            .map(|(x, v)| v.re * (std::f64::consts::TAU * (freq * x % n) as f64 / n as f64).cos())
            .collect();
        let nrm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if nrm == 0.0 {
            return Err(Error::InvalidValue("modulation annihilated the bump".into()));
        }
        for v in &mut values {
            *v /= nrm;
        }
        Signal::real(values)
    }

    /// Standard-normal random signal (complex: independent re/im parts).
    pub fn random<R: rand::Rng>(n: usize, field: Field, rng: &mut R) -> Self {
        let values: Vec<Complex64> = (0..n)
            .map(|_| match field {
                Field::Real => Complex64::new(gauss(rng), 0.0),
                Field::Complex => Complex64::new(gauss(rng), gauss(rng)),
            })
            .collect();
        Self { values, field }
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn scaled(&self, c: Complex64) -> Signal {
        let values = self.values.iter().map(|v| v * c).collect();
        let field = if self.field == Field::Real && c.im == 0.0 { Field::Real } else { Field::Complex };
        Signal { values, field }
    }

    pub fn add(&self, other: &Signal) -> Result<Signal> {
        check_same_order(self.n(), other.n())?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        let field = if self.field == Field::Real && other.field == Field::Real {
            Field::Real
        } else {
            Field::Complex
        };
        Ok(Signal { values, field })
    }

    pub fn sub(&self, other: &Signal) -> Result<Signal> {
        Ok(self.add(&other.scaled(-Complex64::ONE))?)
    }
}

/// Box–Muller gaussian; uses only the uniform source so results are stable
/// across rand versions of the distribution machinery.
pub(crate) fn gauss<R: rand::Rng>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random::<f64>();
        let v: f64 = rng.random::<f64>();
        if u > f64::MIN_POSITIVE {
            return (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos();
        }
    }
}

impl Spectrum {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        check_finite(&values)?;
        if values.is_empty() {
            return Err(Error::UnsupportedOrder("group order must be positive".into()));
        }
        Ok(Self { values })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }
}

fn check_same_order(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { expected: a, got: b });
    }
    Ok(())
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan_forward(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n))
}

fn plan_inverse(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n))
}

/// Unnormalized forward transform of a raw buffer, in place.
pub(crate) fn fft_forward(buf: &mut [Complex64]) {
    plan_forward(buf.len()).process(buf);
}

/// Inverse transform of a raw buffer, in place, including the 1/N factor.
pub(crate) fn fft_inverse(buf: &mut [Complex64]) {
    let n = buf.len();
    plan_inverse(n).process(buf);
    let scale = 1.0 / n as f64;
    for v in buf.iter_mut() {
        *v *= scale;
    }
}

/// f̂(ξ) = Σ_x f(x)·exp(−2πi x ξ / N).
pub fn dft(f: &Signal) -> Spectrum {
    let mut buf = f.values.clone();
    fft_forward(&mut buf);
    Spectrum { values: buf }
}

/// Inverse of [`dft`]: f(x) = (1/N) Σ_ξ F(ξ)·exp(+2πi x ξ / N).
pub fn idft(spec: &Spectrum) -> Signal {
    let mut buf = spec.values.clone();
    fft_inverse(&mut buf);
    Signal { values: buf, field: Field::Complex }
}

/// Circular convolution (f∗g)(x) = Σ_y f(y)·g(x−y).
pub fn convolve(f: &Signal, g: &Signal) -> Result<Signal> {
    check_same_order(f.n(), g.n())?;
    let mut a = f.values.clone();
    let mut b = g.values.clone();
    fft_forward(&mut a);
    fft_forward(&mut b);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    fft_inverse(&mut a);
    // the FFT path leaves ~1e-16 imaginary residue even on real inputs
    Ok(Signal { values: a, field: Field::Complex })
}

/// Involution g*(x) = conj(g(−x mod N)); satisfies dft(g*) = conj(dft(g)).
pub fn involute(g: &Signal) -> Signal {
    let n = g.n();
    let values: Vec<Complex64> = (0..n).map(|x| g.values[(n - x) % n].conj()).collect();
    Signal { values, field: g.field }
}

/// Cyclic translation (T_{x0} f)(x) = f(x − x0 mod N).
pub fn translate(f: &Signal, x0: usize) -> Signal {
    let n = f.n();
    let values: Vec<Complex64> = (0..n).map(|x| f.values[(x + n - x0 % n) % n]).collect();
    Signal { values, field: f.field }
}

/// Counting-measure inner product ⟨f,g⟩ = Σ_x f(x)·conj(g(x)).
pub fn inner(f: &Signal, g: &Signal) -> Result<Complex64> {
    check_same_order(f.n(), g.n())?;
    let mut acc = Complex64::ZERO;
    for (a, b) in f.values.iter().zip(&g.values) {
        acc += a * b.conj();
    }
    Ok(acc)
}

pub fn norm_sq(f: &Signal) -> f64 {
    f.values.iter().map(|v| v.norm_sqr()).sum()
}

pub fn norm(f: &Signal) -> f64 {
    norm_sq(f).sqrt()
}

/// min over unimodular α of ‖f − αg‖²; α ranges over {±1} for the real
/// field and the full unit circle otherwise. Closed form:
/// ‖f‖² + ‖g‖² − 2|⟨f,g⟩|  (complex),  ‖f‖² + ‖g‖² − 2|Re⟨f,g⟩|  (real).
pub fn phase_min_dist_sq(f: &Signal, g: &Signal, field: Field) -> Result<f64> {
    let ip = inner(f, g)?;
    let cross = match field {
        Field::Real => ip.re.abs(),
        Field::Complex => ip.norm(),
    };
    Ok((norm_sq(f) + norm_sq(g) - 2.0 * cross).max(0.0))
}
